#include "hermcurv/curvature.hpp"

#include <Eigen/LU>
#include <cmath>

#include "hermcurv/errors.hpp"

namespace hermcurv {

std::vector<cplx> TorsionTensor::trace() const {
    std::vector<cplx> tau(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        for (int p = 0; p < n; ++p) tau[std::size_t(i)] += (*this)(i, p, p);
    return tau;
}

double CurvatureTensor::hermitian_defect() const {
    double d = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) d = std::max(d, std::abs(std::conj((*this)(i, j, k, l)) - (*this)(j, i, l, k)));
    return d;
}

namespace {

TorsionTensor torsion_with(const MetricJet& jet, const CMatrix& G) {
    const int n = jet.n;
    TorsionTensor T{n, std::vector<cplx>(std::size_t(n * n * n))};
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                cplx s = 0;
                for (int l = 0; l < n; ++l) s += G(k, l) * (jet.dh(i, j, l) - jet.dh(j, i, l));
                T(i, j, k) = s;
                T(j, i, k) = -s;
            }
    return T;
}

CurvatureTensor chern_with(const MetricJet& jet, const CMatrix& G) {
    const int n = jet.n;
    CurvatureTensor R{n, 0.0, CurvatureOrigin::Chern, std::vector<cplx>(std::size_t(n * n * n * n))};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    cplx s = -jet.ddh(i, j, k, l);
                    for (int p = 0; p < n; ++p)
                        for (int q = 0; q < n; ++q) s += G(p, q) * jet.dbh(j, p, l) * jet.dh(i, k, q);
                    R(i, j, k, l) = s;
                }
    return R;
}

CurvatureTensor gauduchon_with(const MetricJet& jet, const CMatrix& G, double t) {
    CurvatureTensor Th = chern_with(jet, G);
    if (t == 0.0) return Th;
    const int n = jet.n;
    TorsionTensor T = torsion_with(jet, G);
    const CMatrix& h = jet.h;
    CurvatureTensor R = Th;
    R.t = t;
    R.origin = CurvatureOrigin::Gauduchon;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    cplx lin = Th(i, l, k, j) + Th(k, j, i, l) - 2.0 * Th(i, j, k, l);
                    cplx q1 = 0, q2 = 0;
                    for (int p = 0; p < n; ++p)
                        for (int q = 0; q < n; ++q) q1 += T(i, k, p) * std::conj(T(j, l, q)) * h(p, q);
                    for (int p = 0; p < n; ++p)
                        for (int q = 0; q < n; ++q) {
                            if (G(p, q) == cplx(0.0)) continue;
                            cplx a = 0, b = 0;
                            for (int m = 0; m < n; ++m) a += h(m, l) * T(i, p, m);
                            for (int r = 0; r < n; ++r) b += h(k, r) * std::conj(T(j, q, r));
                            q2 += G(p, q) * a * b;
                        }
                    R(i, j, k, l) = Th(i, j, k, l) + t * lin + t * t * (q1 - q2);
                }
    return R;
}

double checked_real(cplx z, const char* what) {
    if (std::abs(z.imag()) > 1e-10 * std::max(1.0, std::abs(z.real())))
        throw ConsistencyError(std::string(what) + " has imaginary part " + std::to_string(z.imag()));
    return z.real();
}

RicciForms ricci_with(const CurvatureTensor& R, const CMatrix& G) {
    const int n = R.n;
    RicciForms f;
    f.ric1 = f.ric2 = f.ric3 = f.ric4 = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    cplx g = G(k, l);
                    f.ric1(i, j) += g * R(i, j, k, l);
                    f.ric2(i, j) += g * R(k, l, i, j);
                    f.ric3(i, j) += g * R(i, l, k, j);
                    f.ric4(i, j) += g * R(k, j, i, l);
                }
    cplx s1 = 0, s2 = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            s1 += G(i, j) * f.ric1(i, j);
            s2 += G(i, j) * f.ric3(i, j);
        }
    f.s1 = checked_real(s1, "S1");
    f.s2 = checked_real(s2, "S2");
    return f;
}

// dbar_i tau_j
CMatrix dbar_tau(const MetricJet& jet, const CMatrix& G) {
    const int n = jet.n;
    CMatrix out = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        CMatrix dG = CMatrix::Zero(n, n);
        for (int p = 0; p < n; ++p)
            for (int l = 0; l < n; ++l)
                for (int b = 0; b < n; ++b)
                    for (int c = 0; c < n; ++c) dG(p, l) -= G(p, b) * jet.dbh(i, c, b) * G(c, l);
        for (int j = 0; j < n; ++j) {
            cplx s = 0;
            for (int p = 0; p < n; ++p)
                for (int l = 0; l < n; ++l)
                    s += dG(p, l) * (jet.dh(j, p, l) - jet.dh(p, j, l)) +
                         G(p, l) * (jet.ddh(j, i, p, l) - jet.ddh(p, i, j, l));
            out(i, j) = s;
        }
    }
    return out;
}

double pair_form(const CMatrix& G, const std::vector<cplx>& a) {
    cplx s = 0;
    const int n = int(G.rows());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += G(i, j) * a[std::size_t(i)] * std::conj(a[std::size_t(j)]);
    return s.real();
}

TorsionDiagnostics diagnostics_with(const MetricJet& jet, const CMatrix& G) {
    const int n = jet.n;
    TorsionTensor T = torsion_with(jet, G);
    TorsionDiagnostics d;
    d.tau = T.trace();
    for (int j = 0; j < n; ++j) {
        d.del_star_omega.push_back(cplx(0, -1) * std::conj(d.tau[std::size_t(j)]));
        d.delbar_star_omega.push_back(cplx(0, 1) * d.tau[std::size_t(j)]);
    }

    double dw = 0;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    cplx g = G(k, a) * G(j, b);
                    if (g == cplx(0.0)) continue;
                    cplx s = 0;
                    for (int m = 0; m < n; ++m)
                        for (int r = 0; r < n; ++r) s += jet.h(m, r) * T(k, j, m) * std::conj(T(a, b, r));
                    dw += (g * s).real();
                }
    d.del_omega2 = 0.5 * dw;
    d.delbar_star2 = pair_form(G, d.tau);
    d.del_star2 = d.delbar_star2;

    CMatrix dbt = dbar_tau(jet, G);
    d.ddstar = -dbt.conjugate();
    cplx pr = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) pr += G(i, j) * d.ddstar(i, j);
    d.ddstar_pair = checked_real(pr, "<del del^* omega, omega>");

    // Lee form from d omega^{n-1} = eta ^ omega^{n-1}
    JetForm wn = power(kaehler_form(jet), n - 1);
    CForm Om = values(wn);
    CForm dOm = del(wn);
    CForm db = delbar(wn);
    for (std::size_t m = 0; m < dOm.c.size(); ++m) dOm.c[m] += db.c[m];
    const unsigned full = (1u << unsigned(2 * n)) - 1u;
    Eigen::MatrixXcd A(2 * n, 2 * n);
    Eigen::VectorXcd rhs(2 * n);
    for (int r = 0; r < 2 * n; ++r) {
        unsigned mask = full & ~(1u << unsigned(r));
        rhs(r) = dOm.c[mask];
        for (int c = 0; c < 2 * n; ++c) {
            unsigned e = 1u << unsigned(c);
            unsigned rest = mask & ~e;
            A(r, c) = (mask & e) ? double(wedge_sign(e, rest)) * Om.c[rest] : cplx(0.0);
        }
    }
    Eigen::VectorXcd eta = A.fullPivLu().solve(rhs);
    d.lee_complex.assign(eta.data(), eta.data() + eta.size());
    CForm ef(n);
    for (int c = 0; c < 2 * n; ++c) ef.c[1u << unsigned(c)] = eta(c);
    CForm recon = wedge(ef, Om);
    double res = 0;
    for (std::size_t m = 0; m < recon.c.size(); ++m) res = std::max(res, std::abs(recon.c[m] - dOm.c[m]));
    d.lee_equation_residual = res;
    for (int a = 0; a < n; ++a) {
        cplx p = eta(a), q = eta(n + a);
        d.lee.push_back((p + q).real());
        d.lee.push_back((cplx(0, 1) * (p - q)).real());
    }
    return d;
}

ClassResiduals residuals_with(const MetricJet& jet, const CMatrix& G, const TorsionDiagnostics& d) {
    const int n = jet.n;
    JetForm w = kaehler_form(jet);
    CForm dw = del(w), dbw = delbar(w);
    for (std::size_t m = 0; m < dw.c.size(); ++m) dw.c[m] += dbw.c[m];
    ClassResiduals r;
    r.kahler = std::sqrt(norm2(dw, G));
    CForm eta(n);
    for (int c = 0; c < 2 * n; ++c) eta.c[1u << unsigned(c)] = d.lee_complex[std::size_t(c)];
    r.balanced = std::sqrt(norm2(eta, G));
    r.gauduchon = std::sqrt(norm2(ddbar(power(w, n - 1)), G));
    r.pluriclosed = std::sqrt(norm2(ddbar(w), G));
    return r;
}

}  // namespace

TorsionTensor chern_torsion(const MetricJet& jet) { return torsion_with(jet, inverse_and_det(jet).hinv); }

CurvatureTensor chern_curvature(const MetricJet& jet) { return chern_with(jet, inverse_and_det(jet).hinv); }

CurvatureTensor gauduchon_curvature(const MetricJet& jet, double t) {
    return gauduchon_with(jet, inverse_and_det(jet).hinv, t);
}

RicciForms ricci_and_scalars(const CurvatureTensor& R, const MetricJet& jet) {
    return ricci_with(R, inverse_and_det(jet).hinv);
}

TorsionDiagnostics torsion_diagnostics(const MetricJet& jet) {
    return diagnostics_with(jet, inverse_and_det(jet).hinv);
}

std::pair<double, double> scalar_via_identity(const MetricJet& jet, double t) {
    CMatrix G = inverse_and_det(jet).hinv;
    double sc1 = ricci_with(chern_with(jet, G), G).s1;
    TorsionDiagnostics d = diagnostics_with(jet, G);
    double s1 = sc1 - 2 * t * d.ddstar_pair;
    double s2 = sc1 - (1 - 2 * t) * d.ddstar_pair - t * t * (2 * d.del_omega2 + d.del_star2);
    return {s1, s2};
}

PointScalars point_scalars(const MetricJet& jet) {
    MetricInverse inv = inverse_and_det(jet);
    PointScalars p;
    p.hinv = inv.hinv;
    p.det = inv.det;
    p.tau = torsion_with(jet, inv.hinv).trace();
    RicciForms c = ricci_with(chern_with(jet, inv.hinv), inv.hinv);
    p.s1_chern = c.s1;
    p.s2_chern = c.s2;
    p.s2_bismut = ricci_with(gauduchon_with(jet, inv.hinv, 1.0), inv.hinv).s2;
    return p;
}

ClassResiduals class_residuals(const MetricJet& jet) {
    CMatrix G = inverse_and_det(jet).hinv;
    return residuals_with(jet, G, diagnostics_with(jet, G));
}

ClassFlags classify(const ModelManifold& man, const std::vector<ChartPoint>& points, double tol) {
    if (points.empty()) throw PreconditionError("classify needs at least one sample point");
    ClassResiduals m;
    for (const ChartPoint& p : points) {
        ClassResiduals r = class_residuals(evaluate_metric_jet(man, p));
        m.kahler = std::max(m.kahler, r.kahler);
        m.balanced = std::max(m.balanced, r.balanced);
        m.gauduchon = std::max(m.gauduchon, r.gauduchon);
        m.pluriclosed = std::max(m.pluriclosed, r.pluriclosed);
    }
    ClassFlags f;
    f.tol = tol;
    f.kahler = {m.kahler < tol, m.kahler};
    f.balanced = {m.balanced < tol, m.balanced};
    f.gauduchon = {m.gauduchon < tol, m.gauduchon};
    f.pluriclosed = {m.pluriclosed < tol, m.pluriclosed};
    f.c_balanced_kahler = m.kahler > 0 ? m.balanced / m.kahler : 0.0;
    f.c_gauduchon_balanced = m.balanced > 0 ? m.gauduchon / m.balanced : 0.0;
    return f;
}

ComparisonDefect scalar_comparison_defect(const MetricJet& jet, double t) {
    CMatrix G = inverse_and_det(jet).hinv;
    RicciForms r = ricci_with(gauduchon_with(jet, G, t), G);
    TorsionDiagnostics d = diagnostics_with(jet, G);
    ComparisonDefect c;
    c.general = r.s2 - r.s1 + (t * t - 4 * t + 1) * d.delbar_star2 + 2 * t * t * d.del_omega2;
    c.dim2 = jet.n == 2 ? r.s2 - r.s1 + (3 * t - 1) * (t - 1) * d.del_omega2 : 0.0;
    return c;
}

EinsteinResidual einstein_residual(const MetricJet& jet) {
    CMatrix G = inverse_and_det(jet).hinv;
    RicciForms r = ricci_with(chern_with(jet, G), G);
    TorsionDiagnostics d = diagnostics_with(jet, G);
    EinsteinResidual e;
    e.f_hat = 2.0 / jet.n * r.s2;
    e.ric34 = r.ric3 + r.ric4;
    e.residual = std::sqrt(norm2(one_one_form(e.ric34 - e.f_hat * jet.h), G));
    CMatrix other = 2.0 * r.ric1 - d.ddstar - d.ddstar.adjoint();
    e.identity_defect = (e.ric34 - other).cwiseAbs().maxCoeff();
    return e;
}

CurvatureReport curvature_report(const ModelManifold& man, const ChartPoint& p, double t) {
    MetricJet jet = evaluate_metric_jet(man, p);
    CMatrix G = inverse_and_det(jet).hinv;
    CurvatureReport rep;
    rep.point = p;
    rep.t = t;
    rep.ricci = ricci_with(gauduchon_with(jet, G, t), G);
    rep.torsion = diagnostics_with(jet, G);
    rep.classes = residuals_with(jet, G, rep.torsion);
    return rep;
}

}  // namespace hermcurv
