#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "hermcurv/curvature.hpp"
#include "hermcurv/metric.hpp"

namespace hermcurv {

enum class Scheme { FD2, Spectral };
Scheme parse_scheme(const std::string& s);
std::string scheme_name(Scheme s);

using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using SpMat = Eigen::SparseMatrix<double>;

// Periodic grid over a torus chart. Real axes are ordered (x1, y1, ..., xn, yn);
// node order is lexicographic with x1 slowest. An axis with count 1 is
// collapsed: fields are assumed constant along it.
class TorusGrid {
public:
    static constexpr double kDefaultBudgetBytes = 2.0 * 1024 * 1024 * 1024;

    TorusGrid(int n, int N, std::vector<double> periods = {}, std::vector<bool> active = {},
              double budget_bytes = kDefaultBudgetBytes);

    int n() const { return n_; }
    int N() const { return N_; }
    int axes() const { return 2 * n_; }
    int count(int a) const { return counts_[std::size_t(a)]; }
    bool collapsed(int a) const { return counts_[std::size_t(a)] == 1; }
    double period(int a) const { return periods_[std::size_t(a)]; }
    double spacing(int a) const { return periods_[std::size_t(a)] / counts_[std::size_t(a)]; }
    std::size_t size() const { return size_; }
    std::size_t stride(int a) const { return strides_[std::size_t(a)]; }
    double cell_volume() const;

    int index_along(std::size_t idx, int a) const { return int((idx / strides_[std::size_t(a)]) % std::size_t(counts_[std::size_t(a)])); }
    // neighbour s steps along axis a, periodic
    std::size_t shift(std::size_t idx, int a, int s) const;
    double coord(std::size_t idx, int a) const { return index_along(idx, a) * spacing(a); }
    ChartPoint point(std::size_t idx) const;

private:
    int n_, N_;
    std::vector<double> periods_;
    std::vector<int> counts_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

using GridPtr = std::shared_ptr<const TorusGrid>;

struct TorusField {
    GridPtr grid;
    CVec values;
    bool real = true;

    static TorusField from_real(GridPtr g, const RVec& v);
    static TorusField from_complex(GridPtr g, const CVec& v);
    static TorusField sample(GridPtr g, const std::function<cplx(const ChartPoint&)>& f, bool real);
    RVec real_part() const { return values.real(); }
};

// Run body(begin, end) over [0, count) split into contiguous chunks.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t, std::size_t)>& body);

// Real-axis derivatives on a grid; collapsed axes give zero.
template <class V>
V axis_d1(const TorusGrid& g, const V& u, int a, Scheme s);
template <class V>
V axis_d2(const TorusGrid& g, const V& u, int a, int b, Scheme s);

TorusField dz(const TorusField& u, int k, Scheme s = Scheme::FD2);
TorusField dzbar(const TorusField& u, int k, Scheme s = Scheme::FD2);

// Hermitian metric sampled on a torus grid, optionally scaled by e^sigma
// for a discrete field sigma. Pointwise curvature fields come from the
// analytic jets of the base manifold; the conformal factor enters through
// the transformation laws with discrete derivatives of sigma.
class GridMetric {
public:
    GridMetric(const ModelManifold& man, GridPtr grid, Scheme scheme = Scheme::FD2, int threads = 1);

    // Metric e^{sigma + s} h for the current sigma.
    GridMetric conformal(const RVec& s) const;

    const ModelManifold& manifold() const { return *man_; }
    const TorusGrid& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }
    Scheme scheme() const { return scheme_; }
    int threads() const { return threads_; }
    int n() const { return grid_->n(); }
    std::size_t size() const { return grid_->size(); }
    const RVec& sigma() const { return sigma_; }

    CMatrix hinv(std::size_t idx) const;  // of e^sigma h
    double det(std::size_t idx) const;
    std::vector<cplx> tau(std::size_t idx) const;

    const RVec& weights() const { return weights_; }  // 2^n det * cell volume
    double volume() const { return weights_.sum(); }

    RVec s1_chern() const;
    RVec s2_chern() const;
    RVec s2_bismut() const;
    // real Lee-form components along axis a
    RVec lee(int a) const;
    // coefficient of d/dx_a d/dx_b in the complex Laplacian, symmetrized
    double lap_coeff(std::size_t idx, int a, int b) const;

    // Pointwise class residuals of the base metric (sigma ignored), max over nodes.
    ClassResiduals base_class_residuals() const;
    double max_delstar_norm() const;  // max |del^* omega| of e^sigma h

private:
    std::shared_ptr<const ModelManifold> man_;
    GridPtr grid_;
    Scheme scheme_;
    int threads_;
    RVec sigma_;
    // base per-node data
    std::vector<cplx> G_;    // n*n per node
    RVec det0_;
    std::vector<cplx> tau0_;  // n per node
    RVec s1c0_, s2c0_, s2b0_;
    std::vector<double> lee0_;  // 2n per node
    RVec weights_;

    GridMetric() = default;
    void refresh_weights();
    RVec lap_base(const RVec& u) const;
};

// Complex Laplacian h^{i jbar} d_i dbar_j u of e^sigma h. Throws
// ConsistencyError if the imaginary residue exceeds 1e-9 (relative).
TorusField complex_laplacian(const GridMetric& gm, const TorusField& u);
RVec complex_laplacian(const GridMetric& gm, const RVec& u);
// Transpose of the discrete complex Laplacian (either scheme).
RVec complex_laplacian_adjoint(const GridMetric& gm, const RVec& v);
// Sparse fd2 matrix of the complex Laplacian.
SpMat laplacian_matrix(const GridMetric& gm);

// Hodge Laplacian d^*d u in flux form and <du, eta>_omega.
RVec hodge_laplacian(const GridMetric& gm, const RVec& u);
RVec lee_pairing(const GridMetric& gm, const RVec& u);
double laplacian_duality_defect(const GridMetric& gm, const RVec& u);
// Divergence-form operator div(kappa grad .) with kappa = sqrt(g) g^{ab} (fd2, symmetric).
SpMat flux_matrix(const GridMetric& gm);

double integrate(const GridMetric& gm, const RVec& u);

struct GauduchonDegrees {
    double gamma1 = 0.0, gamma2 = 0.0;
    bool gauduchon_verified = false;
    double gauduchon_residual = 0.0;
};
GauduchonDegrees gauduchon_degrees(const GridMetric& gm, double tol = 1e-8);

struct BalancedRepresentative {
    RVec u;
    GridMetric metric;
    double lee_residual = 0.0;  // max Lee component of the output metric
};
// Solves min |du - eta|^2 and returns e^{-u/(n-1)} gm. Throws PreconditionError
// if the Lee form has a nonzero period (harmonic part).
BalancedRepresentative balanced_representative(const GridMetric& gm, double tol = 1e-6);

void write_csv(std::ostream& os, const TorusGrid& g, const std::vector<std::pair<std::string, RVec>>& fields);

}  // namespace hermcurv
