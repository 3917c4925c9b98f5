#include <Eigen/IterativeLinearSolvers>
#include <chrono>
#include <cmath>
#include <memory>

#include "hermcurv/errors.hpp"
#include "hermcurv/linear_ops.hpp"
#include "hermcurv/solvers.hpp"

namespace hermcurv {

YamabeConstants YamabeConstants::make(int n, double q) {
    if (n < 2) throw PreconditionError("complex dimension n >= 2 required");
    YamabeConstants y;
    y.n = n;
    y.N1 = (n * n - 1.0) / ((2.0 * n - 1) * (2.0 * n - 1));
    y.N2 = 2 + (2.0 * n - 1) / (n * n - 1.0);
    y.q = q > 0 ? q : y.N2;
    const double qmax = 2.0 * n / (n - 1);
    if (!(y.q > 2 && y.q < qmax))
        throw PreconditionError("exponent q must lie in (2, " + std::to_string(qmax) + ")");
    return y;
}

namespace {

struct Functional {
    LinearOp K;  // W-symmetrized quadratic form of the conformal operator
    RVec W;
    double N1, q;

    double constraint(const RVec& phi) const { return W.dot(phi.array().pow(q).matrix()); }
    RVec project(const RVec& phi) const { return phi * std::pow(N1 * constraint(phi), -1.0 / q); }
    double value(const RVec& phi) const { return phi.dot(K(phi)) * std::pow(N1 * constraint(phi), -2.0 / q); }
};

}  // namespace

SolverReport bismut_yamabe_minimize(const GridMetric& gm, const YamabeConstants& yc, const SolverOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    if (yc.n != gm.n()) throw PreconditionError("Yamabe constants were built for a different dimension");
    const double dstar = gm.max_delstar_norm();
    if (dstar > opt.balanced_tol)
        throw PreconditionError("Bismut minimizer needs a balanced metric; max |del^* omega| = " + std::to_string(dstar));

    const int n = gm.n();
    const RVec& W = gm.weights();
    const RVec SB = gm.s2_bismut();
    const double vol = gm.volume();
    const Eigen::Index m = W.size();
    const RVec potential = yc.N1 * W.cwiseProduct(SB);
    Functional Y{nullptr, W, yc.N1, yc.q};
    LinearOp precondition;
    SpMat K, M;
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> pre;
    std::unique_ptr<FourierPreconditioner> fourier;
    if (gm.scheme() == Scheme::FD2) {
        const SpMat L = laplacian_matrix(gm);
        SpMat WL = W.asDiagonal() * L;
        K = -0.5 * (WL + SpMat(WL.transpose()));
        K += SpMat(potential.asDiagonal());
        Y.K = [&K](const RVec& x) { return RVec(K * x); };
        // H^1-type preconditioner from the symmetric flux form
        M = (-0.5 * gm.grid().cell_volume()) * flux_matrix(gm);
        M += SpMat(W.asDiagonal());
        pre.setTolerance(1e-10);
        pre.compute(M);
        precondition = [&pre](const RVec& x) { return RVec(pre.solve(x)); };
    } else {
        Y.K = [&](const RVec& x) {
            return RVec(-0.5 * (W.cwiseProduct(complex_laplacian(gm, x)) + complex_laplacian_adjoint(gm, W.cwiseProduct(x))) +
                        potential.cwiseProduct(x));
        };
        // constant-coefficient model of the same H^1-type form
        fourier = std::make_unique<FourierPreconditioner>(gm, -W.mean(), W.mean());
        precondition = fourier->op();
    }

    SolverReport rep;
    rep.method = "bismut";
    RVec phi = RVec::Constant(m, std::pow(1.0 / (yc.N1 * vol), 1.0 / yc.q));
    double y = Y.value(phi);
    double alpha = 0.5;
    auto el_residual = [&](const RVec& p, double mu) -> RVec {
        RVec r = Y.K(p) - (mu * yc.N1) * W.cwiseProduct(p.array().pow(yc.q - 1).matrix());
        return r.cwiseQuotient(W);
    };
    RVec r = el_residual(phi, y);
    int it = 0;
    rep.energy_trace.push_back({0, y, std::abs(Y.constraint(phi) - 1 / yc.N1)});
    while (r.cwiseAbs().maxCoeff() > opt.tol) {
        if (++it > opt.max_iter) throw ConvergenceError("Bismut minimizer: iteration limit reached");
        RVec grad = 2.0 * W.cwiseProduct(r);
        RVec dir = precondition(grad);
        const double slope = grad.dot(dir);
        bool accepted = false;
        alpha = std::min(1.0, 2 * alpha);
        while (alpha > 1e-14) {
            RVec trial = phi - alpha * dir;
            if (trial.minCoeff() <= 0) {
                alpha *= 0.5;
                continue;
            }
            trial = Y.project(trial);
            const double yt = Y.value(trial);
            bool take = yt <= y - 1e-4 * alpha * slope || (slope < 1e-30 && yt <= y);
            RVec rt;
            if (!take && yt <= y + 1e-13 * std::abs(y)) {
                // energy differences are at round-off: require the residual to drop instead
                rt = el_residual(trial, yt);
                take = rt.cwiseAbs().maxCoeff() < 0.9 * r.cwiseAbs().maxCoeff();
            }
            if (take) {
                phi = trial;
                y = yt;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            // round-off floor: accept the state if the residual has stopped moving
            if (r.cwiseAbs().maxCoeff() < 1e3 * opt.tol) break;
            throw ConvergenceError("Bismut minimizer stagnated at EL residual " + std::to_string(r.cwiseAbs().maxCoeff()));
        }
        r = el_residual(phi, y);
        rep.energy_trace.push_back({it, y, std::abs(Y.constraint(phi) - 1 / yc.N1)});
    }
    if (!(phi.minCoeff() > 0)) throw ConsistencyError("minimizer lost strict positivity");

    rep.solution = phi;
    rep.lambda = y;
    rep.residual_linf = r.cwiseAbs().maxCoeff();
    rep.residual_l2 = std::sqrt(r.squaredNorm() / double(m));

    // bounds on mu_q
    const double intS = integrate(gm, SB), minS = SB.minCoeff();
    const double q = yc.q;
    rep.diagnostics["mu"] = y;
    rep.diagnostics["min_phi"] = phi.minCoeff();
    rep.diagnostics["constraint_defect"] = std::abs(Y.constraint(phi) - 1 / yc.N1);
    rep.diagnostics["upper_bound_stated"] = std::pow(yc.N1, 1 - 2 / q) * intS;
    rep.diagnostics["upper_bound_y1"] = Y.value(RVec::Ones(m));
    rep.diagnostics["min_S_B"] = minS;
    if (minS < 0) {
        rep.diagnostics["lower_bound_stated"] = std::pow(yc.N1, 1.0 / n) * minS * std::max(1.0, std::pow(vol, 1.0 / n));
        rep.diagnostics["lower_bound_holder"] = std::pow(yc.N1, 1 - 2 / q) * minS * std::pow(vol, 1 - 2 / q);
    } else {
        rep.diagnostics["lower_bound_stated"] = 0.0;
        rep.diagnostics["lower_bound_holder"] = 0.0;
    }
    rep.diagnostics["volume"] = vol;
    rep.diagnostics["q"] = q;
    if (y > rep.diagnostics["upper_bound_y1"] + 1e-12 * std::max(1.0, std::abs(y)) ||
        y < rep.diagnostics["lower_bound_holder"] - 1e-12 * std::max(1.0, std::abs(y)))
        throw ConsistencyError("mu_q violates the provable bounds Y(1) / Hoelder");

    if (std::abs(q - yc.N2) < 1e-15) {
        RVec f = ((2.0 * n - 1) / (n * n - 1.0)) * phi.array().log().matrix();
        rep.conformal_factor = f;
        rep.scalar_field = gm.conformal(f).s2_bismut();
        rep.scalar_deviation = (rep.scalar_field.array() - y).abs().maxCoeff();
    }
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace hermcurv
