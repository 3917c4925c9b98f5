#include <Eigen/IterativeLinearSolvers>
#include <chrono>
#include <cmath>
#include <json.hpp>

#include "hermcurv/errors.hpp"
#include "hermcurv/linear_ops.hpp"
#include "hermcurv/solvers.hpp"

namespace hermcurv {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double linf(const RVec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }
double rms(const RVec& v) { return v.size() ? std::sqrt(v.squaredNorm() / double(v.size())) : 0.0; }

void require_gauduchon(const GridMetric& gm, const SolverOptions& opt) {
    if (!opt.check_gauduchon) return;
    GauduchonDegrees d = gauduchon_degrees(gm, opt.class_tol);
    if (!d.gauduchon_verified)
        throw PreconditionError("input metric is not Gauduchon at tolerance (residual " +
                                std::to_string(d.gauduchon_residual) + ")");
}

RVec lsq_solve(const SpMat& A, const RVec& b) {
    Eigen::LeastSquaresConjugateGradient<SpMat> ls;
    ls.setTolerance(1e-14);
    ls.setMaxIterations(40 * int(A.cols()) + 1000);
    ls.compute(A);
    RVec x = ls.solve(b);
    if (ls.info() != Eigen::Success && ls.error() > 1e-10)
        throw ConvergenceError("least-squares solve stagnated at relative residual " + std::to_string(ls.error()));
    return x;
}

const int kKrylovMax = 4000;

RVec krylov_solve(const LinearOp& A, const LinearOp& P, const RVec& b, const char* what) {
    KrylovResult k = gmres(A, P, b, RVec(), 1e-13, kKrylovMax);
    if (!k.converged && k.relative_residual > 1e-10)
        throw ConvergenceError(std::string(what) + " stagnated at relative residual " + std::to_string(k.relative_residual));
    return k.x;
}

// Adds the rank-one term 1 1^T x / m, which removes the constant kernel of the
// Laplacian (or the constant left kernel of its adjoint).
LinearOp bordered(LinearOp A) {
    return [A = std::move(A)](const RVec& x) { return RVec(A(x).array() + x.mean()); };
}

// Fourier inverse of the bordered operator: the constant mode has symbol 1.
LinearOp bordered_preconditioner(const FourierPreconditioner& P) {
    return [&P](const RVec& x) { return RVec(P.apply(x).array() + x.mean()); };
}

// Delta f = S - c with mean-zero f: normal-equation least squares for fd2,
// Fourier-preconditioned GMRES on the bordered system for spectral.
RVec solve_shifted(const GridMetric& gm, const RVec& S, double c) {
    const RVec rhs = (S.array() - c).matrix();
    RVec f;
    if (gm.scheme() == Scheme::FD2) {
        f = lsq_solve(laplacian_matrix(gm), rhs);
    } else {
        FourierPreconditioner P(gm, 1.0, 0.0);
        f = krylov_solve(bordered([&](const RVec& x) { return complex_laplacian(gm, x); }), bordered_preconditioner(P), rhs,
                         "Laplacian solve");
    }
    f.array() -= f.mean();
    return f;
}

RVec apply_laplacian(const GridMetric& gm, const SpMat& L, const RVec& f) {
    return gm.scheme() == Scheme::FD2 ? RVec(L * f) : complex_laplacian(gm, f);
}

}  // namespace

double discrete_compatibility(const GridMetric& gm, const RVec& S) {
    if (gm.scheme() == Scheme::Spectral) {
        // left null vector from (L^T + 1 1^T / m) w = 1, which forces L^T w = 0
        FourierPreconditioner P(gm, 1.0, 0.0);
        const RVec w = krylov_solve(bordered([&](const RVec& x) { return complex_laplacian_adjoint(gm, x); }),
                                    bordered_preconditioner(P), RVec::Ones(S.size()), "adjoint kernel solve");
        return w.dot(S) / w.sum();
    }
    // left null vector w = 1 - v, v the minimum-norm solution of L^T v = L^T 1
    SpMat L = laplacian_matrix(gm);
    SpMat Lt = L.transpose();
    const RVec one = RVec::Ones(S.size());
    RVec w = one - lsq_solve(Lt, Lt * one);
    return w.dot(S) / w.sum();
}

SolverReport solve_zero_case(const GridMetric& gm, const RVec& S, const SolverOptions& opt) {
    const auto t0 = Clock::now();
    const double gamma = integrate(gm, S);
    const double mass = integrate(gm, S.cwiseAbs());
    if (std::abs(gamma) > opt.compat_tol * std::max(1.0, mass))
        throw PreconditionError("zero case needs a vanishing degree; integral of S is " + std::to_string(gamma));
    const double c = discrete_compatibility(gm, S);
    RVec f = solve_shifted(gm, S, c);
    RVec r = complex_laplacian(gm, f) - (S.array() - c).matrix();

    SolverReport rep;
    rep.method = "chern-zero";
    rep.solution = f;
    rep.lambda = 0.0;
    rep.residual_linf = linf(r);
    rep.residual_l2 = rms(r);
    rep.conformal_factor = f;
    rep.diagnostics["degree"] = gamma;
    rep.diagnostics["compatibility_constant"] = c;
    rep.wall_time = seconds_since(t0);
    if (rep.residual_l2 > opt.tol)
        throw ConvergenceError("zero case residual " + std::to_string(rep.residual_l2) + " above tolerance");
    return rep;
}

SolverReport solve_chern_zero(const GridMetric& gm, const SolverOptions& opt) {
    const auto t0 = Clock::now();
    require_gauduchon(gm, opt);
    SolverReport rep = solve_zero_case(gm, gm.s2_chern(), opt);
    GridMetric out = gm.conformal(rep.solution);
    rep.scalar_field = out.s2_chern();
    rep.scalar_deviation = linf(rep.scalar_field);
    rep.diagnostics["scalar_spread"] = rep.scalar_field.maxCoeff() - rep.scalar_field.minCoeff();
    rep.wall_time = seconds_since(t0);
    return rep;
}

NormalizedMetric normalize_to_negative(const GridMetric& gm, const SolverOptions& opt) {
    const RVec S = gm.s2_chern();
    const double gamma = integrate(gm, S);
    // a degree within the compatibility tolerance counts as zero
    if (!(gamma < -opt.compat_tol * std::max(1.0, integrate(gm, S.cwiseAbs()))))
        throw PreconditionError("negative case needs Gamma^2 < 0; got " + std::to_string(gamma));
    require_gauduchon(gm, opt);
    const double c = discrete_compatibility(gm, S);
    if (!(c < 0)) throw ConsistencyError("discrete compatibility constant is not negative: " + std::to_string(c));
    RVec u = solve_shifted(gm, S, c);
    GridMetric m = gm.conformal(u);
    const double mx = m.s2_chern().maxCoeff();
    if (!(mx < 0)) throw ConsistencyError("normalized metric has S_C^(2) >= 0 at some node (max " + std::to_string(mx) + ")");
    return {u, m, c, gamma / gm.volume(), mx};
}

SolverReport continuity_solve(const GridMetric& gm, const RVec& S, double lambda, const SolverOptions& opt) {
    const auto t0 = Clock::now();
    if (!(lambda < 0)) throw PreconditionError("continuity method needs lambda < 0");
    const bool fd2 = gm.scheme() == Scheme::FD2;
    const SpMat L = fd2 ? laplacian_matrix(gm) : SpMat();
    const Eigen::Index m = S.size();
    const double newton_tol = std::min(opt.tol, 1e-10);
    const int newton_max = 50;

    auto F = [&](double a, const RVec& f) -> RVec {
        return apply_laplacian(gm, L, f) - a * S + (lambda * f.array().exp()).matrix() - RVec::Constant(m, lambda * (1 - a));
    };
    // Newton at fixed a; returns iterations or -1 on failure
    auto newton = [&](double a, RVec& f, double& res) -> int {
        RVec r = F(a, f);
        res = linf(r);
        const double start = res;
        for (int it = 0; it <= newton_max; ++it) {
            if (res < newton_tol) return it;
            if (it == newton_max || !std::isfinite(res) || res > 1e3 * std::max(1.0, start)) return -1;
            RVec dx;
            if (fd2) {
                SpMat D = L;
                for (Eigen::Index i = 0; i < m; ++i) D.coeffRef(i, i) += lambda * std::exp(f(i));
                Eigen::BiCGSTAB<SpMat, Eigen::DiagonalPreconditioner<double>> solver;
                solver.setTolerance(1e-14);
                solver.setMaxIterations(20 * int(m) + 1000);
                solver.compute(D);
                dx = solver.solve(-r);
                if (solver.info() != Eigen::Success && solver.error() > 1e-9) return -1;
            } else {
                const RVec e = (lambda * f.array().exp()).matrix();
                FourierPreconditioner P(gm, 1.0, e.mean());
                KrylovResult k = gmres([&](const RVec& x) { return RVec(complex_laplacian(gm, x) + e.cwiseProduct(x)); },
                                       P.op(), -r, RVec(), 1e-13, kKrylovMax);
                if (!k.converged && k.relative_residual > 1e-9) return -1;
                dx = k.x;
            }
            f += dx;
            r = F(a, f);
            res = linf(r);
        }
        return -1;
    };

    // a-priori bound 0 <= f <= log(1 + min S / lambda), meaningful when S < 0
    const bool bound_applies = S.maxCoeff() < 0;
    const double upper = bound_applies ? std::log(1 + S.minCoeff() / lambda) : 0.0;
    double lower_violation = 0, upper_violation = 0, slack = 1e-6;

    SolverReport rep;
    rep.method = "chern-negative";
    RVec f = opt.initial_guess.size() == m ? opt.initial_guess : RVec::Zero(m);
    double res = 0;
    int it = newton(0.0, f, res);
    if (it < 0) throw ConvergenceError("Newton failed at a = 0");
    rep.path_trace.push_back({0.0, it, res});

    double a = 0, da = 0.1;
    int successes = 0;
    while (a < 1.0) {
        const double next = std::min(1.0, a + da);
        RVec trial = f;
        double r = 0;
        int k = newton(next, trial, r);
        if (k < 0) {
            da *= 0.5;
            successes = 0;
            if (da < 1e-4) throw ConvergenceError("continuity step fell below 1e-4 at a = " + std::to_string(a));
            continue;
        }
        a = next;
        f = trial;
        rep.path_trace.push_back({a, k, r});
        if (bound_applies) {
            const double step_slack = 1e-2 * linf(f) + 1e-6;
            const double lo = -f.minCoeff(), hi = f.maxCoeff() - upper;
            slack = std::max(slack, step_slack);
            lower_violation = std::max(lower_violation, lo);
            upper_violation = std::max(upper_violation, hi);
            if (opt.enforce_apriori_bound && std::max(lo, hi) > step_slack)
                throw ConsistencyError("a-priori bound violated beyond slack at a = " + std::to_string(a) +
                                       " (lower " + std::to_string(lo) + ", upper " + std::to_string(hi) + ")");
        }
        if (++successes >= 2) {
            da *= 2;
            successes = 0;
        }
    }
    RVec r = F(1.0, f);
    rep.solution = f;
    rep.lambda = lambda;
    rep.residual_linf = linf(r);
    rep.residual_l2 = rms(r);
    rep.conformal_factor = f;
    rep.diagnostics["bound_applies"] = bound_applies;
    if (bound_applies) {
        rep.diagnostics["apriori_upper"] = upper;
        rep.diagnostics["apriori_lower_violation"] = lower_violation;
        rep.diagnostics["apriori_upper_violation"] = upper_violation;
        rep.diagnostics["apriori_slack"] = slack;
    }
    rep.wall_time = seconds_since(t0);
    return rep;
}

SolverReport solve_chern_negative(const GridMetric& gm, const SolverOptions& opt) {
    const auto t0 = Clock::now();
    NormalizedMetric nm = normalize_to_negative(gm, opt);
    const double lambda = integrate(gm, gm.s2_chern()) / gm.volume();
    SolverReport rep = continuity_solve(nm.metric, nm.metric.s2_chern(), lambda, opt);
    rep.conformal_factor = nm.u + rep.solution;
    rep.scalar_field = gm.conformal(rep.conformal_factor).s2_chern();
    rep.scalar_deviation = linf((rep.scalar_field.array() - lambda).matrix());
    rep.diagnostics["normalize_constant"] = nm.constant;
    rep.diagnostics["normalized_max_s2"] = nm.max_scalar;
    rep.diagnostics["degree"] = integrate(gm, gm.s2_chern());
    rep.diagnostics["volume"] = gm.volume();
    rep.wall_time = seconds_since(t0);
    return rep;
}

RVec lozenge(const GridMetric& gm, const RVec& f) {
    const int n = gm.n();
    RVec out = double(n) * complex_laplacian(gm, f);
    TorusField tf = TorusField::from_real(gm.grid_ptr(), f);
    std::vector<CVec> df;
    for (int k = 0; k < n; ++k) df.push_back(dz(tf, k, gm.scheme()).values);
    for (std::size_t i = 0; i < gm.size(); ++i) {
        // <i del f, i tau_j dz^j> = h^{i jbar} f_i conj(tau_j)
        CMatrix G = gm.hinv(i);
        std::vector<cplx> tau = gm.tau(i);
        cplx p = 0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) p += G(a, b) * df[std::size_t(a)](Eigen::Index(i)) * std::conj(tau[std::size_t(b)]);
        out(Eigen::Index(i)) += 2 * p.real();
    }
    return out;
}

LozengeReport lozenge_constancy_check(const GridMetric& gm, double tol) {
    const RVec& s = gm.sigma();
    if (s.size() && s.maxCoeff() != s.minCoeff())
        throw PreconditionError("lozenge check needs the analytic metric (constant conformal factor)");
    ClassResiduals cr = gm.base_class_residuals();
    if (cr.pluriclosed > tol || cr.gauduchon > tol)
        throw PreconditionError("lozenge check needs a pluriclosed Gauduchon metric (residuals " +
                                std::to_string(cr.pluriclosed) + ", " + std::to_string(cr.gauduchon) + ")");
    const int n = gm.n();
    LozengeReport rep;
    RVec S = gm.s2_chern();
    rep.f_hat = (2.0 / n) * S;
    rep.lozenge_norm = linf(lozenge(gm, rep.f_hat));
    std::vector<double> er(gm.size());
    parallel_for(gm.size(), gm.threads(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
            er[i] = einstein_residual(evaluate_metric_jet(gm.manifold(), gm.grid().point(i))).residual;
    });
    for (double v : er) rep.einstein_residual = std::max(rep.einstein_residual, v);
    const double mean = integrate(gm, S) / gm.volume();
    rep.s2_variance = integrate(gm, (S.array() - mean).square().matrix()) / gm.volume();
    rep.s2_spread = S.maxCoeff() - S.minCoeff();
    rep.constancy_asserted = rep.einstein_residual < tol;
    rep.constant = rep.s2_spread < tol * std::max(1.0, linf(S));
    if (rep.constancy_asserted && !rep.constant)
        throw ConsistencyError("Einstein condition holds but S_C^(2) is not constant (spread " +
                               std::to_string(rep.s2_spread) + ")");
    return rep;
}

std::string solver_report_json(const SolverReport& r, const GridMetric& gm, int indent) {
    using nlohmann::json;
    json j;
    j["schema_version"] = 1;
    j["method"] = r.method;
    json in;
    in["manifold"] = gm.manifold().name();
    in["params"] = gm.manifold().params();
    in["n"] = gm.n();
    in["grid"] = gm.grid().N();
    std::vector<int> counts;
    std::vector<double> periods;
    for (int a = 0; a < gm.grid().axes(); ++a) {
        counts.push_back(gm.grid().count(a));
        periods.push_back(gm.grid().period(a));
    }
    in["counts"] = counts;
    in["periods"] = periods;
    in["scheme"] = scheme_name(gm.scheme());
    j["input"] = in;
    j["lambda"] = r.lambda;
    j["residual_linf"] = r.residual_linf;
    j["residual_l2"] = r.residual_l2;
    j["scalar_deviation"] = r.scalar_deviation;
    j["wall_time"] = r.wall_time;
    json path = json::array();
    for (const PathStep& p : r.path_trace) path.push_back({{"a", p.a}, {"newton_iters", p.newton_iters}, {"residual", p.residual}});
    j["path_trace"] = path;
    json en = json::array();
    for (const EnergyStep& e : r.energy_trace)
        en.push_back({{"iter", e.iter}, {"value", e.value}, {"constraint_defect", e.constraint_defect}});
    j["energy_trace"] = en;
    j["diagnostics"] = r.diagnostics;
    j["solution"] = std::vector<double>(r.solution.data(), r.solution.data() + r.solution.size());
    if (r.conformal_factor.size())
        j["conformal_factor"] =
            std::vector<double>(r.conformal_factor.data(), r.conformal_factor.data() + r.conformal_factor.size());
    return j.dump(indent);
}

}  // namespace hermcurv
