#pragma once

#include <map>
#include <string>
#include <vector>

#include "hermcurv/grid.hpp"

namespace hermcurv {

struct PathStep {
    double a = 0.0;
    int newton_iters = 0;
    double residual = 0.0;
};

struct EnergyStep {
    int iter = 0;
    double value = 0.0;
    double constraint_defect = 0.0;
};

struct SolverReport {
    std::string method;
    RVec solution;  // f for the Chern solvers, phi for the Bismut minimizer
    double lambda = 0.0;
    double residual_linf = 0.0, residual_l2 = 0.0;
    std::vector<PathStep> path_trace;
    std::vector<EnergyStep> energy_trace;
    double wall_time = 0.0;

    RVec conformal_factor;          // total log-factor relative to the input metric
    RVec scalar_field;              // target scalar curvature of the output metric
    double scalar_deviation = 0.0;  // sup |scalar_field - lambda|
    std::map<std::string, double> diagnostics;
};

struct YamabeConstants {
    int n = 2;
    double N1 = 0.0, N2 = 0.0, q = 0.0;
    // q <= 0 selects q = N2; throws PreconditionError outside (2, 2n/(n-1)).
    static YamabeConstants make(int n, double q = 0.0);
};

struct SolverOptions {
    double tol = 1e-8;               // residual acceptance (grid max norm)
    double compat_tol = 1e-3;        // |Gamma^2| / integral |S^2| for the zero case
    double balanced_tol = 1e-6;      // max |del^* omega| for the Bismut minimizer
    double class_tol = 1e-8;         // Gauduchon residual for the input metric
    int max_iter = 5000;
    RVec initial_guess;              // continuity start at a = 0 (empty: zero)
    bool check_gauduchon = true;
    bool enforce_apriori_bound = true;  // continuity: throw when 0 <= f <= log(1 + min S / lambda) fails beyond slack
};

// Discrete compatibility constant c with w^T (S - c) = 0 for the left null
// vector w of the fd2 Laplacian; the discrete analogue of Gamma^2 / Vol.
double discrete_compatibility(const GridMetric& gm, const RVec& S);

// Delta^C f = S - c with c = discrete_compatibility(S); mean-zero f.
SolverReport solve_zero_case(const GridMetric& gm, const RVec& S, const SolverOptions& opt = {});
SolverReport solve_chern_zero(const GridMetric& gm, const SolverOptions& opt = {});

struct NormalizedMetric {
    RVec u;
    GridMetric metric;
    double constant = 0.0;         // discrete Gamma^2 / Vol used on the right-hand side
    double quadrature_ratio = 0.0;  // Gamma^2 / Vol by quadrature
    double max_scalar = 0.0;       // max of S_C^(2) of the output metric (< 0)
};
NormalizedMetric normalize_to_negative(const GridMetric& gm, const SolverOptions& opt = {});

// Continuity path F(a, f) = Delta f - a S + lambda e^f - lambda (1 - a) from a = 0 to 1.
SolverReport continuity_solve(const GridMetric& gm, const RVec& S, double lambda, const SolverOptions& opt = {});
SolverReport solve_chern_negative(const GridMetric& gm, const SolverOptions& opt = {});

SolverReport bismut_yamabe_minimize(const GridMetric& gm, const YamabeConstants& yc, const SolverOptions& opt = {});

// n Delta^C f + 2 Re <i del f, dbar^* omega> per node.
RVec lozenge(const GridMetric& gm, const RVec& f);

struct LozengeReport {
    RVec f_hat;
    double lozenge_norm = 0.0;     // max |n Delta f_hat + 2 Re <i del f_hat, dbar^* omega>|
    double einstein_residual = 0.0;  // max over nodes
    double s2_variance = 0.0;      // volume-weighted
    double s2_spread = 0.0;        // max - min
    bool constancy_asserted = false;
    bool constant = false;
};
LozengeReport lozenge_constancy_check(const GridMetric& gm, double tol = 1e-8);

// Report JSON (schema_version 1) with an input digest.
std::string solver_report_json(const SolverReport& r, const GridMetric& gm, int indent = 2);

}  // namespace hermcurv
