#include "hermcurv/conformal.hpp"

#include <cmath>
#include <random>

#include "hermcurv/errors.hpp"

namespace hermcurv {

namespace {

// f is real if it equals its formal conjugate, or numerically at a few points.
bool is_real_valued(const Expr& f, int n) {
    if (structurally_equal(f, conj(f))) return true;
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int s = 0; s < 12; ++s) {
        std::vector<cplx> z(static_cast<std::size_t>(n));
        for (auto& c : z) c = cplx(u(rng), 0.2 + std::abs(u(rng)));
        cplx v = evaluate(f, z);
        if (std::isfinite(v.real()) && std::abs(v.imag()) > 1e-12 * std::max(1.0, std::abs(v.real()))) return false;
    }
    return true;
}

}  // namespace

ConformalFactor::ConformalFactor(const Expr& f, int n, const std::map<std::string, double>& params)
    : f_(bind_params(f, params)), n_(n) {
    if (!free_params(f_).empty()) throw Error("conformal factor has unbound parameter '" + free_params(f_)[0] + "'");
    if (!is_real_valued(f_, n_)) throw Error("conformal factor f must be real-valued");
    c_ = CompiledExpr(f_);
    for (int i = 0; i < n_; ++i) {
        Expr di = wirtinger_derivative(f_, i, false);
        d_.emplace_back(di);
        for (int j = 0; j < n_; ++j) dd_.emplace_back(wirtinger_derivative(di, j, true));
    }
}

ConformalFactorJet ConformalFactor::jet(const ChartPoint& p) const {
    ChartPoint zb(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) zb[k] = std::conj(p[k]);
    ConformalFactorJet j;
    j.f = c_(p.data(), zb.data()).real();
    j.ddf = CMatrix(n_, n_);
    for (int i = 0; i < n_; ++i) {
        j.df.push_back(d_[std::size_t(i)](p.data(), zb.data()));
        for (int k = 0; k < n_; ++k) j.ddf(i, k) = dd_[std::size_t(i * n_ + k)](p.data(), zb.data());
    }
    return j;
}

ModelManifold conformal_manifold(const ModelManifold& man, const Expr& f) {
    const int n = man.n();
    auto factor = std::make_shared<ConformalFactor>(f, n, man.params());
    MetricExpr e = man.expr();
    Expr ef = exp(factor->expr());
    for (auto& entry : e.entries) entry = ef * entry;

    ModelManifold::JetFn jf = nullptr;
    if (man.has_closed_form()) {
        jf = [base = man, factor, n](const ChartPoint& p) {
            MetricJet b = base.jet_closed_form(p);
            ConformalFactorJet fj = factor->jet(p);
            const double ef = std::exp(fj.f);
            MetricJet r(n);
            r.h = ef * b.h;
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) {
                        r.dh(i, k, l) = ef * (fj.df[std::size_t(i)] * b.h(k, l) + b.dh(i, k, l));
                        for (int j = 0; j < n; ++j) {
                            cplx fjb = std::conj(fj.df[std::size_t(j)]);
                            r.ddh(i, j, k, l) = ef * ((fj.ddf(i, j) + fj.df[std::size_t(i)] * fjb) * b.h(k, l) +
                                                      fj.df[std::size_t(i)] * b.dbh(j, k, l) + fjb * b.dh(i, k, l) +
                                                      b.ddh(i, j, k, l));
                        }
                    }
            return r;
        };
    }
    ModelManifold out(man.name() + "*e^f", n, man.params(), e, man.domain(), jf);
    out.declared_gauduchon = false;
    out.declared_balanced = false;
    return out;
}

namespace {

struct Pieces {
    double lap = 0.0;    // Delta^C f = h^{i jbar} f_{i jbar}
    double grad2 = 0.0;  // |df|^2
    cplx pair = 0.0;     // <del^* omega, i dbar f>
};

Pieces pieces(const MetricJet& jet, const CMatrix& G, const std::vector<cplx>& tau, const ConformalFactorJet& fj) {
    const int n = jet.n;
    Pieces p;
    cplx lap = 0, g2 = 0, pr = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            lap += G(i, j) * fj.ddf(i, j);
            g2 += G(i, j) * fj.df[std::size_t(i)] * std::conj(fj.df[std::size_t(j)]);
            pr -= G(i, j) * fj.df[std::size_t(i)] * std::conj(tau[std::size_t(j)]);
        }
    p.lap = lap.real();
    p.grad2 = g2.real();
    p.pair = pr;
    return p;
}

double base_s2(const MetricJet& jet, double t) { return ricci_and_scalars(gauduchon_curvature(jet, t), jet).s2; }

}  // namespace

double transformed_s2(const MetricJet& jet, const ConformalFactorJet& fj, double t) {
    const int n = jet.n;
    CMatrix G = inverse_and_det(jet).hinv;
    Pieces p = pieces(jet, G, chern_torsion(jet).trace(), fj);
    const double a = 1 + 2 * (n - 1) * t, b = (n * n - 1) * t * t, c = 2 * (n + 1) * t * t;
    return std::exp(-fj.f) * (base_s2(jet, t) - a * p.lap - b * p.grad2 + c * p.pair.real());
}

double transformed_s2_chern(const MetricJet& jet, const ConformalFactorJet& fj) {
    CMatrix G = inverse_and_det(jet).hinv;
    Pieces p = pieces(jet, G, chern_torsion(jet).trace(), fj);
    return std::exp(-fj.f) * (base_s2(jet, 0.0) - 1.0 * p.lap - 0.0 * p.grad2 + 0.0 * p.pair.real());
}

double transformed_s2_bismut(const MetricJet& jet, const ConformalFactorJet& fj) {
    const int n = jet.n;
    CMatrix G = inverse_and_det(jet).hinv;
    Pieces p = pieces(jet, G, chern_torsion(jet).trace(), fj);
    return std::exp(-fj.f) *
           (base_s2(jet, 1.0) - (2.0 * n - 1) * p.lap - (n * n - 1.0) * p.grad2 + 2.0 * (n + 1) * p.pair.real());
}

TransformedCurvature transformed_ric34(const MetricJet& jet, const ConformalFactorJet& fj, double t) {
    const int n = jet.n;
    CMatrix G = inverse_and_det(jet).hinv;
    TorsionTensor T = chern_torsion(jet);
    std::vector<cplx> tau = T.trace();
    Pieces p = pieces(jet, G, tau, fj);
    RicciForms base = ricci_and_scalars(gauduchon_curvature(jet, t), jet);

    // V = (dbar f)^#, V^p = h^{p qbar} conj(f_q); T(V)_{ij} = h_{k jbar} T_{pi}^k V^p
    std::vector<cplx> V(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a)
        for (int q = 0; q < n; ++q) V[std::size_t(a)] += G(a, q) * std::conj(fj.df[std::size_t(q)]);
    CMatrix TV = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int a = 0; a < n; ++a) TV(i, j) += jet.h(k, j) * T(a, i, k) * V[std::size_t(a)];

    CMatrix dfdf(n, n), taudf(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            dfdf(i, j) = fj.df[std::size_t(i)] * std::conj(fj.df[std::size_t(j)]);
            taudf(i, j) = tau[std::size_t(i)] * std::conj(fj.df[std::size_t(j)]);
        }
    const double t2 = t * t;
    TransformedCurvature out;
    out.t = t;
    out.ric3 = base.ric3 - (1 + (n - 2) * t) * fj.ddf - (t * p.lap + n * t2 * p.grad2) * jet.h + t2 * dfdf -
               n * t2 * TV - t2 * TV.adjoint() + t2 * p.pair * jet.h - t2 * taudf;
    out.ric4 = out.ric3.adjoint();
    out.s2 = transformed_s2(jet, fj, t);
    return out;
}

OracleDefect conformal_oracle_check(const ModelManifold& man, const Expr& f, double t,
                                    const std::vector<ChartPoint>& points) {
    ModelManifold mf = conformal_manifold(man, f);
    ConformalFactor factor(f, man.n(), man.params());
    OracleDefect d;
    for (const ChartPoint& p : points) {
        MetricJet base = evaluate_metric_jet(man, p);
        MetricJet direct = evaluate_metric_jet(mf, p);
        ConformalFactorJet fj = factor.jet(p);
        TransformedCurvature tc = transformed_ric34(base, fj, t);
        RicciForms r = ricci_and_scalars(gauduchon_curvature(direct, t), direct);
        d.s2 = std::max(d.s2, std::abs(tc.s2 - r.s2));
        d.ric = std::max(d.ric, (tc.ric3 - r.ric3).cwiseAbs().maxCoeff());
        d.ric = std::max(d.ric, (tc.ric4 - r.ric4).cwiseAbs().maxCoeff());
    }
    return d;
}

}  // namespace hermcurv
