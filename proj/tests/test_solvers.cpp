#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <random>

#include "hermcurv/errors.hpp"
#include "hermcurv/solvers.hpp"

using namespace hermcurv;

namespace {

const double tp = 2 * M_PI;
const std::vector<bool> kSep{true, false, true, false};

GridPtr make_grid(int n, int N, std::vector<bool> active = {}) {
    return std::make_shared<const TorusGrid>(n, N, std::vector<double>{}, std::move(active));
}

RVec sample_real(const GridPtr& g, const std::function<double(const ChartPoint&)>& f) {
    RVec v(static_cast<Eigen::Index>(g->size()));
    for (std::size_t i = 0; i < g->size(); ++i) v(Eigen::Index(i)) = f(g->point(i));
    return v;
}

double linf(const RVec& v) { return v.cwiseAbs().maxCoeff(); }
double order(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

double bump(const ChartPoint& p) {
    return std::sin(tp * p[0].real()) * std::cos(tp * p[1].real()) + 0.4 * std::cos(tp * p[1].real());
}

}  // namespace

TEST_CASE("Yamabe constants") {
    YamabeConstants y = YamabeConstants::make(2);
    CHECK(y.N1 == doctest::Approx(1.0 / 3));
    CHECK(y.N2 == doctest::Approx(3.0));
    CHECK(y.q == y.N2);
    for (int n = 2; n <= 6; ++n) {
        YamabeConstants c = YamabeConstants::make(n);
        CHECK(c.N2 > 2);
        CHECK(c.N2 < 2.0 * n / (n - 1));
    }
    CHECK(YamabeConstants::make(3, 2.5).q == 2.5);
    CHECK_THROWS_AS(YamabeConstants::make(2, 4.0), PreconditionError);
    CHECK_THROWS_AS(YamabeConstants::make(2, 1.5), PreconditionError);
    CHECK_THROWS_AS(YamabeConstants::make(1), PreconditionError);
}

TEST_CASE("zero case: flat torus and guards") {
    GridPtr g = make_grid(2, 8);
    SolverReport r = solve_chern_zero(GridMetric(builtin_manifold("flat-torus"), g));
    CHECK(linf(r.solution) < 1e-12);
    CHECK(r.scalar_deviation < 1e-12);
    // a degree far from zero is refused
    GridMetric skt(builtin_manifold("skt-bump"), g);
    CHECK_THROWS_AS(solve_chern_zero(skt), PreconditionError);
    // a non-Gauduchon input is refused
    GridMetric nc = GridMetric(builtin_manifold("kaehler-bump"), g).conformal(sample_real(g, bump));
    CHECK_THROWS_AS(solve_chern_zero(nc), PreconditionError);
}

TEST_CASE("zero case: manufactured solution converges at second order") {
    ModelManifold m = builtin_manifold("skt-bump", 2, {{"sep", 1}});
    std::vector<double> err;
    for (int N : {8, 16, 32}) {
        GridPtr g = make_grid(2, N, kSep);
        RVec fstar = sample_real(g, bump);
        fstar.array() -= fstar.mean();
        RVec S = complex_laplacian(GridMetric(m, g, Scheme::Spectral), fstar);
        SolverReport r = solve_zero_case(GridMetric(m, g), S);
        CHECK(r.residual_l2 < 1e-8);
        CHECK(std::abs(r.solution.mean()) < 1e-12);
        err.push_back(linf(r.solution - fstar));
    }
    CHECK(order(err[0], err[1]) >= 1.8);
    CHECK(order(err[1], err[2]) >= 1.8);
}

TEST_CASE("zero case: Kaehler bump") {
    GridMetric gm(builtin_manifold("kaehler-bump"), make_grid(2, 8));
    SolverReport r = solve_chern_zero(gm);
    CHECK(r.residual_linf < 1e-6);
    CHECK(std::abs(r.solution.mean()) < 1e-12);
    // the remaining non-constancy of S^2 is discretization error of order h^2
    ModelManifold m = builtin_manifold("kaehler-bump", 2, {{"sep", 1}});
    std::vector<double> spread;
    for (int N : {16, 32}) {
        SolverReport s = solve_chern_zero(GridMetric(m, make_grid(2, N, kSep)));
        spread.push_back(s.diagnostics.at("scalar_spread"));
        CHECK(std::abs(s.diagnostics.at("compatibility_constant")) < 0.1);
    }
    CHECK(order(spread[0], spread[1]) >= 1.8);
}

TEST_CASE("normalization to negative scalar curvature") {
    GridPtr g = make_grid(2, 8);
    GridMetric gm(builtin_manifold("kaehler-bump-scaled"), g);
    CHECK(gm.s2_chern().maxCoeff() > 0);  // mixed sign input
    NormalizedMetric nm = normalize_to_negative(gm);
    CHECK(nm.metric.s2_chern().maxCoeff() < 0);
    CHECK(nm.max_scalar < 0);
    CHECK(nm.constant < 0);
    CHECK(nm.quadrature_ratio == doctest::Approx(nm.constant).epsilon(0.1));
    CHECK_THROWS_AS(normalize_to_negative(GridMetric(builtin_manifold("flat-torus"), g)), PreconditionError);
    CHECK_THROWS_AS(normalize_to_negative(GridMetric(builtin_manifold("kaehler-bump"), g)), PreconditionError);
}

TEST_CASE("continuity method: start, manufactured solution, uniqueness") {
    ModelManifold m = builtin_manifold("skt-bump", 2, {{"sep", 1}});
    const double lambda = -4.0;
    auto fstar_of = [](const ChartPoint& p) { return 0.3 + 0.1 * std::sin(tp * p[0].real()) * std::cos(tp * p[1].real()); };
    std::vector<double> err;
    for (int N : {8, 16, 32}) {
        GridPtr g = make_grid(2, N, kSep);
        RVec fstar = sample_real(g, fstar_of);
        RVec S = complex_laplacian(GridMetric(m, g, Scheme::Spectral), fstar) + (lambda * fstar.array().exp()).matrix();
        REQUIRE(S.maxCoeff() < 0);
        SolverReport r = continuity_solve(GridMetric(m, g), S, lambda);
        REQUIRE(!r.path_trace.empty());
        CHECK(r.path_trace.front().a == 0.0);
        CHECK(r.path_trace.front().newton_iters == 0);  // F(0, 0) = 0
        CHECK(r.path_trace.back().a == 1.0);
        CHECK(r.residual_linf < 1e-8);
        CHECK(r.diagnostics.at("apriori_lower_violation") <= r.diagnostics.at("apriori_slack"));
        CHECK(r.diagnostics.at("apriori_upper_violation") <= r.diagnostics.at("apriori_slack"));
        err.push_back(linf(r.solution - fstar));
        if (N == 16) {
            std::mt19937 rng(7);
            std::uniform_real_distribution<double> U(-0.5, 0.5);
            SolverOptions opt;
            opt.initial_guess = RVec(S.size());
            for (Eigen::Index i = 0; i < S.size(); ++i) opt.initial_guess(i) = U(rng);
            SolverReport r2 = continuity_solve(GridMetric(m, g), S, lambda, opt);
            CHECK(linf(r2.solution - r.solution) < 1e-6);
        }
    }
    CHECK(order(err[0], err[1]) >= 1.8);
    CHECK(order(err[1], err[2]) >= 1.8);
    // a negative solution breaks the lower a-priori bound; enforcement is optional
    GridPtr g = make_grid(2, 16, kSep);
    RVec fneg = sample_real(g, fstar_of).array() - 0.6;
    RVec Sneg = complex_laplacian(GridMetric(m, g, Scheme::Spectral), fneg) + (lambda * fneg.array().exp()).matrix();
    REQUIRE(Sneg.maxCoeff() < 0);
    CHECK_THROWS_AS(continuity_solve(GridMetric(m, g), Sneg, lambda), ConsistencyError);
    SolverOptions loose;
    loose.enforce_apriori_bound = false;
    SolverReport rn = continuity_solve(GridMetric(m, g), Sneg, lambda, loose);
    CHECK(rn.diagnostics.at("apriori_lower_violation") > 0.1);
    CHECK(linf(rn.solution - fneg) < 1e-2);
    GridMetric flat(builtin_manifold("flat-torus"), make_grid(2, 4));
    CHECK_THROWS_AS(continuity_solve(flat, RVec::Constant(256, -1.0), 0.5), PreconditionError);
}

TEST_CASE("negative case end to end") {
    GridMetric gm(builtin_manifold("kaehler-bump-scaled"), make_grid(2, 8));
    SolverReport r = solve_chern_negative(gm);
    CHECK(r.lambda == doctest::Approx(integrate(gm, gm.s2_chern()) / gm.volume()).epsilon(1e-14));
    CHECK(r.lambda < 0);
    CHECK(r.residual_linf < 1e-8);
    CHECK(r.scalar_deviation < 1e-8);
    CHECK(r.path_trace.back().a == 1.0);
    CHECK_THROWS_AS(solve_chern_negative(GridMetric(builtin_manifold("flat-torus"), make_grid(2, 8))),
                    PreconditionError);
}

TEST_CASE("Bismut minimizer") {
    GridPtr g = make_grid(2, 8);
    YamabeConstants yc = YamabeConstants::make(2);
    SolverReport flat = bismut_yamabe_minimize(GridMetric(builtin_manifold("flat-torus"), g), yc);
    CHECK(std::abs(flat.lambda) < 1e-8);
    CHECK(flat.solution.maxCoeff() - flat.solution.minCoeff() < 1e-10);

    SolverReport r = bismut_yamabe_minimize(GridMetric(builtin_manifold("kaehler-bump"), g), yc);
    CHECK(r.residual_linf < 1e-6);
    CHECK(r.diagnostics.at("min_phi") > 0);
    CHECK(r.lambda <= r.diagnostics.at("upper_bound_y1") + 1e-12);
    CHECK(r.lambda >= r.diagnostics.at("lower_bound_holder"));
    CHECK(r.lambda >= r.diagnostics.at("lower_bound_stated"));
    CHECK(r.lambda < 0);
    for (std::size_t k = 1; k < r.energy_trace.size(); ++k) {
        CHECK(r.energy_trace[k].value <= r.energy_trace[k - 1].value + 1e-12 * std::abs(r.energy_trace[k - 1].value));
        CHECK(r.energy_trace[k].constraint_defect < 1e-10);
    }
    CHECK(r.conformal_factor.size() == r.solution.size());

    SolverReport sub = bismut_yamabe_minimize(GridMetric(builtin_manifold("kaehler-bump"), g), YamabeConstants::make(2, 2.5));
    CHECK(sub.residual_linf < 1e-6);
    CHECK(sub.conformal_factor.size() == 0);  // only q = N2 yields a conformal metric

    CHECK_THROWS_AS(bismut_yamabe_minimize(GridMetric(builtin_manifold("skt-bump"), g), yc), PreconditionError);
    CHECK_THROWS_AS(bismut_yamabe_minimize(GridMetric(builtin_manifold("flat-torus", 3), make_grid(3, 4)), yc),
                    PreconditionError);
}

TEST_CASE("spectral scheme") {
    // the Kaehler bump at N=16 reaches constant S^2 to round-off
    SolverReport z = solve_chern_zero(GridMetric(builtin_manifold("kaehler-bump"), make_grid(2, 16), Scheme::Spectral));
    CHECK(z.diagnostics.at("scalar_spread") < 1e-4);
    CHECK(std::abs(z.diagnostics.at("compatibility_constant")) < 1e-9);

    // manufactured data built with the same operator is recovered exactly
    ModelManifold m = builtin_manifold("skt-bump", 2, {{"sep", 1}});
    GridPtr g = make_grid(2, 16, kSep);
    GridMetric gm(m, g, Scheme::Spectral);
    RVec fs = sample_real(g, bump);
    fs.array() -= fs.mean();
    CHECK(linf(solve_zero_case(gm, complex_laplacian(gm, fs)).solution - fs) < 1e-10);

    const double lambda = -4.0;
    RVec fstar = sample_real(g, [](const ChartPoint& p) { return 0.3 + 0.1 * std::sin(tp * p[0].real()) * std::cos(tp * p[1].real()); });
    SolverReport c = continuity_solve(gm, complex_laplacian(gm, fstar) + (lambda * fstar.array().exp()).matrix(), lambda);
    CHECK(c.path_trace.back().a == 1.0);
    CHECK(linf(c.solution - fstar) < 1e-9);

    YamabeConstants yc = YamabeConstants::make(2);
    GridPtr g8 = make_grid(2, 8);
    SolverReport bs = bismut_yamabe_minimize(GridMetric(builtin_manifold("kaehler-bump"), g8, Scheme::Spectral), yc);
    CHECK(bs.residual_linf < 1e-6);
    for (std::size_t k = 1; k < bs.energy_trace.size(); ++k)
        CHECK(bs.energy_trace[k].value <= bs.energy_trace[k - 1].value + 1e-12 * std::abs(bs.energy_trace[k - 1].value));
    // the fd2 value approaches the spectral one at second order
    std::vector<double> gap;
    for (int N : {8, 12}) {
        SolverReport bf = bismut_yamabe_minimize(GridMetric(builtin_manifold("kaehler-bump"), make_grid(2, N)), yc);
        gap.push_back(std::abs(bf.lambda - bs.lambda));
    }
    CHECK(std::log(gap[0] / gap[1]) / std::log(1.5) >= 1.8);
}

TEST_CASE("lozenge operator and constancy check") {
    GridPtr g = make_grid(2, 8);
    GridMetric flat(builtin_manifold("flat-torus"), g);
    LozengeReport f = lozenge_constancy_check(flat);
    CHECK(f.lozenge_norm == 0.0);
    CHECK(f.constancy_asserted);
    CHECK(f.constant);

    GridMetric skt(builtin_manifold("skt-bump"), g);
    CHECK(linf(lozenge(skt, RVec::Constant(Eigen::Index(g->size()), 2.5))) == 0.0);
    LozengeReport s = lozenge_constancy_check(skt);
    CHECK(s.einstein_residual > 1e-3);
    CHECK_FALSE(s.constancy_asserted);
    CHECK(s.s2_spread > 0);
    CHECK(s.s2_variance > 0);

    CHECK_THROWS_AS(lozenge_constancy_check(skt.conformal(sample_real(g, bump))), PreconditionError);
}

TEST_CASE("report JSON") {
    GridMetric gm(builtin_manifold("flat-torus"), make_grid(2, 4));
    SolverReport r = solve_chern_zero(gm);
    nlohmann::json j = nlohmann::json::parse(solver_report_json(r, gm));
    CHECK(j.at("schema_version") == 1);
    CHECK(j.at("method") == "chern-zero");
    CHECK(j.at("input").at("manifold") == "flat-torus");
    CHECK(j.at("input").at("scheme") == "fd2");
    CHECK(j.at("solution").size() == 256);
}
