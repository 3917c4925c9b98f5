#include <cmath>
#include <sstream>

#include "hermcurv/errors.hpp"
#include "hermcurv/metric.hpp"

namespace hermcurv {

namespace {

constexpr cplx I{0.0, 1.0};

double param(const std::map<std::string, double>& p, const std::string& k, double def) {
    auto it = p.find(k);
    return it == p.end() ? def : it->second;
}

// ---- Hopf: h = 4 delta / |z|^2 ---------------------------------------------

MetricJet hopf_jet(const ChartPoint& z) {
    const int n = int(z.size());
    const double c = 4.0;
    double r = 0.0;
    for (auto& v : z) r += std::norm(v);
    MetricJet j(n);
    for (int a = 0; a < n; ++a) j.h(a, a) = c / r;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) j.dh(i, k, k) = -c * std::conj(z[std::size_t(i)]) / (r * r);
    for (int i = 0; i < n; ++i)
        for (int b = 0; b < n; ++b) {
            cplx v = -c * ((i == b ? r : 0.0) - 2.0 * std::conj(z[std::size_t(i)]) * z[std::size_t(b)]) / (r * r * r);
            for (int k = 0; k < n; ++k) j.ddh(i, b, k, k) = v;
        }
    return j;
}

// ---- Charts on H x C: coefficients as functions of (y, s) -------------------
// F and its partials in (y, s); s is a real function with known Wirtinger data.
struct Partials {
    double f, fy, fs, fyy, fys, fss;
};

struct RealChain {
    // Wirtinger derivatives of y = Im z1 and of s, per coordinate.
    std::vector<cplx> dy, ds;
    std::vector<std::vector<cplx>> ddy, dds;  // d_a dbar_b

    void fill(MetricJet& j, int k, int l, const Partials& p) const {
        const int n = j.n;
        j.h(k, l) = p.f;
        for (int a = 0; a < n; ++a) j.dh(a, k, l) = p.fy * dy[std::size_t(a)] + p.fs * ds[std::size_t(a)];
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                cplx dyb = std::conj(dy[std::size_t(b)]), dsb = std::conj(ds[std::size_t(b)]);
                j.ddh(a, b, k, l) = p.fyy * dy[std::size_t(a)] * dyb +
                                    p.fys * (dy[std::size_t(a)] * dsb + ds[std::size_t(a)] * dyb) +
                                    p.fss * ds[std::size_t(a)] * dsb + p.fy * ddy[std::size_t(a)][std::size_t(b)] +
                                    p.fs * dds[std::size_t(a)][std::size_t(b)];
            }
    }
};

MetricJet inoue1_jet(const ChartPoint& z) {
    double y = z[0].imag();
    RealChain c{{-0.5 * I, 0.0}, {0.0, 0.0}, {{0.0, 0.0}, {0.0, 0.0}}, {{0.0, 0.0}, {0.0, 0.0}}};
    MetricJet j(2);
    c.fill(j, 0, 0, {1 / (y * y), -2 / (y * y * y), 0, 6 / (y * y * y * y), 0, 0});
    c.fill(j, 1, 1, {y, 1, 0, 0, 0, 0});
    return j;
}

MetricJet inoue2_jet(const ChartPoint& z, double m) {
    double y = z[0].imag(), v = z[1].imag();
    double s = v - m * std::log(y);
    RealChain c;
    c.dy = {-0.5 * I, 0.0};
    c.ds = {0.5 * I * m / y, -0.5 * I};
    c.ddy = {{0.0, 0.0}, {0.0, 0.0}};
    c.dds = {{m / (4 * y * y), 0.0}, {0.0, 0.0}};
    double y2 = y * y, y3 = y2 * y, y4 = y3 * y;
    MetricJet j(2);
    c.fill(j, 0, 0, {(1 + s * s) / y2, -2 * (1 + s * s) / y3, 2 * s / y2, 6 * (1 + s * s) / y4, -4 * s / y3, 2 / y2});
    Partials off{-s / y, s / y2, -1 / y, -2 * s / y3, 1 / y2, 0};
    c.fill(j, 0, 1, off);
    c.fill(j, 1, 0, off);
    c.fill(j, 1, 1, {1, 0, 0, 0, 0, 0});
    return j;
}

MetricJet elliptic_jet(const ChartPoint& p) {
    const cplx w = p[1], wb = std::conj(w);
    const double y = p[0].imag();
    const double y2 = y * y, y3 = y2 * y, y4 = y3 * y;
    MetricJet j(2);
    j.h(0, 0) = 2 / y2;
    j.h(0, 1) = -2.0 * I / (y * wb);
    j.h(1, 0) = 2.0 * I / (w * y);
    j.h(1, 1) = 4.0 / (w * wb);
    // index 0 = z, 1 = w
    j.dh(0, 0, 0) = 2.0 * I / y3;
    j.dh(0, 0, 1) = 1.0 / (y2 * wb);
    j.dh(0, 1, 0) = -1.0 / (y2 * w);
    j.dh(1, 1, 0) = -2.0 * I / (y * w * w);
    j.dh(1, 1, 1) = -4.0 / (w * w * wb);
    j.ddh(0, 0, 0, 0) = 3.0 / y4;
    j.ddh(0, 0, 0, 1) = -I / (y3 * wb);
    j.ddh(0, 1, 0, 1) = -1.0 / (y2 * wb * wb);
    j.ddh(0, 0, 1, 0) = I / (y3 * w);
    j.ddh(1, 0, 1, 0) = -1.0 / (y2 * w * w);
    j.ddh(1, 1, 1, 1) = 4.0 / (w * w * wb * wb);
    return j;
}

// ---- Torus metrics as finite Fourier sums --------------------------------
// h = H0 + sum_m M_m exp(i theta_m),  theta = 2 pi (p.x + q.y)

struct Mode {
    std::vector<int> p, q;
    CMatrix M;
};

struct TrigMetric {
    int n;
    CMatrix H0;
    std::vector<Mode> modes;

    MetricJet operator()(const ChartPoint& z) const {
        MetricJet j(n);
        j.h = H0;
        for (const Mode& md : modes) {
            double th = 0.0;
            std::vector<cplx> al(static_cast<std::size_t>(n)), be(static_cast<std::size_t>(n));
            for (int k = 0; k < n; ++k) {
                th += 2 * M_PI * (md.p[std::size_t(k)] * z[std::size_t(k)].real() + md.q[std::size_t(k)] * z[std::size_t(k)].imag());
                al[std::size_t(k)] = M_PI * cplx(md.q[std::size_t(k)], md.p[std::size_t(k)]);
                be[std::size_t(k)] = M_PI * cplx(-md.q[std::size_t(k)], md.p[std::size_t(k)]);
            }
            cplx e = std::polar(1.0, th);
            j.h += md.M * e;
            for (int i = 0; i < n; ++i)
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b) {
                        j.dh(i, a, b) += al[std::size_t(i)] * md.M(a, b) * e;
                        for (int jj = 0; jj < n; ++jj)
                            j.ddh(i, jj, a, b) += al[std::size_t(i)] * be[std::size_t(jj)] * md.M(a, b) * e;
                    }
        }
        return j;
    }
};

// Scalar Fourier term c*exp(i theta) with its conjugate partner added.
struct ScalarMode {
    cplx c;
    std::vector<int> p, q;
};

void add_real_mode(std::vector<ScalarMode>& out, cplx c, std::vector<int> p, std::vector<int> q) {
    std::vector<int> mp(p.size()), mq(q.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        mp[k] = -p[k];
        mq[k] = -q[k];
    }
    out.push_back({c, std::move(p), std::move(q)});
    out.push_back({std::conj(c), std::move(mp), std::move(mq)});
}

// sin(2pi x1) sin(2pi x2) = -1/4 (e^{i(A+B)} + cc) + 1/4 (e^{i(A-B)} + cc)
void sinx1_sinx2(std::vector<ScalarMode>& out, double amp) {
    add_real_mode(out, -0.25 * amp, {1, 1}, {0, 0});
    add_real_mode(out, 0.25 * amp, {1, -1}, {0, 0});
}

void cos_y1_plus_y2(std::vector<ScalarMode>& out, double amp) { add_real_mode(out, 0.5 * amp, {0, 0}, {1, 1}); }

void cosy1_cosy2(std::vector<ScalarMode>& out, double amp) {
    add_real_mode(out, 0.25 * amp, {0, 0}, {1, 1});
    add_real_mode(out, 0.25 * amp, {0, 0}, {1, -1});
}

// h = I + i ddbar(phi)
void add_kaehler_potential(TrigMetric& t, const std::vector<ScalarMode>& phi) {
    for (const ScalarMode& s : phi) {
        Mode m{s.p, s.q, CMatrix::Zero(t.n, t.n)};
        for (int i = 0; i < t.n; ++i)
            for (int j = 0; j < t.n; ++j) {
                cplx al = M_PI * cplx(s.q[std::size_t(i)], s.p[std::size_t(i)]);
                cplx be = M_PI * cplx(-s.q[std::size_t(j)], s.p[std::size_t(j)]);
                m.M(i, j) = s.c * al * be;
            }
        t.modes.push_back(m);
    }
}

// h += diag(-c F, c F)
void add_skt_part(TrigMetric& t, const std::vector<ScalarMode>& F, double c) {
    for (const ScalarMode& s : F) {
        Mode m{s.p, s.q, CMatrix::Zero(t.n, t.n)};
        m.M(0, 0) = -c * s.c;
        m.M(1, 1) = c * s.c;
        t.modes.push_back(m);
    }
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << "(" << v << ")";
    return os.str();
}

ChartDomain torus_domain(int n) {
    ChartDomain d;
    d.periodic = true;
    d.periods.assign(std::size_t(2 * n), 1.0);
    return d;
}

const char* kPhiFull = "sin(2*pi*re(z1))*sin(2*pi*re(z2)) + 0.5*cos(2*pi*(im(z1) + im(z2)))";
const char* kPhiSep = "sin(2*pi*re(z1))*sin(2*pi*re(z2))";
const char* kFFull = "sin(2*pi*re(z1))*sin(2*pi*re(z2)) + 0.5*cos(2*pi*im(z1))*cos(2*pi*im(z2))";
const char* kFSep = "sin(2*pi*re(z1))*sin(2*pi*re(z2))";

MetricExpr kaehler_expr(const std::string& phi_text) {
    Expr phi = parse_expr(phi_text, 2);
    MetricExpr m{2, std::vector<Expr>(4)};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Expr d = wirtinger_derivative(wirtinger_derivative(phi, i, false), j, true);
            m.entries[std::size_t(i * 2 + j)] = (i == j ? Expr::constant(1.0) : Expr::constant(0.0)) + d;
        }
    return m;
}

}  // namespace

std::vector<std::string> builtin_names() {
    return {"hopf", "elliptic", "inoue1", "inoue2", "flat-torus", "kaehler-bump", "skt-bump", "kaehler-bump-scaled"};
}

ModelManifold builtin_manifold(const std::string& name, int n, const std::map<std::string, double>& params) {
    if (name == "hopf") {
        if (n < 2) throw Error("complex dimension n >= 2 required");
        std::string den;
        for (int k = 1; k <= n; ++k) den += (k > 1 ? " + " : "") + std::string("abs2(z") + std::to_string(k) + ")";
        std::string text;
        for (int k = 1; k <= n; ++k) text += "h[" + std::to_string(k) + "][" + std::to_string(k) + "] = 4/(" + den + ");";
        ChartDomain d;
        d.punctured = true;
        ModelManifold m("hopf", n, {}, parse_metric(text, n), d, hopf_jet);
        m.declared_gauduchon = true;
        return m;
    }
    if (name == "elliptic") {
        ChartDomain d;
        d.upper_half_plane = {0};
        d.nonzero = {1};
        ModelManifold m("elliptic", 2, {},
                        parse_metric("h[1][1] = 2/pow(im(z1),2); h[1][2] = -2*i/(im(z1)*zb2);"
                                     "h[2][1] = 2*i/(z2*im(z1)); h[2][2] = 4/abs2(z2)",
                                     2),
                        d, elliptic_jet);
        m.declared_gauduchon = true;
        return m;
    }
    if (name == "inoue1") {
        ChartDomain d;
        d.upper_half_plane = {0};
        ModelManifold m("inoue1", 2, {}, parse_metric("h[1][1] = 1/pow(im(z1),2); h[2][2] = im(z1)", 2), d, inoue1_jet);
        m.declared_gauduchon = true;
        return m;
    }
    if (name == "inoue2") {
        double mm = param(params, "m", 1.0);
        ChartDomain d;
        d.upper_half_plane = {0};
        const std::string s = "(im(z2) - m*log(im(z1)))";
        std::string text = "h[1][1] = (1 + pow(" + s + ",2))/pow(im(z1),2);" + "h[1][2] = -" + s + "/im(z1);" +
                           "h[2][1] = -" + s + "/im(z1);" + "h[2][2] = 1";
        ModelManifold m("inoue2", 2, {{"m", mm}}, parse_metric(text, 2, {"m"}), d,
                        [mm](const ChartPoint& p) { return inoue2_jet(p, mm); });
        m.declared_gauduchon = true;
        return m;
    }
    if (name == "flat-torus") {
        if (n < 2) throw Error("complex dimension n >= 2 required");
        std::string text;
        for (int k = 1; k <= n; ++k) text += "h[" + std::to_string(k) + "][" + std::to_string(k) + "] = 1;";
        TrigMetric t{n, CMatrix::Identity(n, n), {}};
        ModelManifold m("flat-torus", n, {}, parse_metric(text, n), torus_domain(n), t);
        m.declared_gauduchon = m.declared_balanced = true;
        return m;
    }
    if (name == "kaehler-bump" || name == "skt-bump" || name == "kaehler-bump-scaled") {
        const bool sep = param(params, "sep", 0.0) != 0.0;
        const double a = param(params, "a", 0.2);
        const double c = param(params, "c", 0.2);
        std::map<std::string, double> used{{"sep", sep ? 1.0 : 0.0}};
        TrigMetric t{2, CMatrix::Identity(2, 2), {}};
        MetricExpr ex{2, {Expr::constant(1.0), Expr(), Expr(), Expr::constant(1.0)}};
        if (name != "skt-bump") {
            used["a"] = a;
            std::vector<ScalarMode> phi;
            sinx1_sinx2(phi, a / (M_PI * M_PI));
            if (!sep) cos_y1_plus_y2(phi, 0.5 * a / (M_PI * M_PI));
            add_kaehler_potential(t, phi);
            ex = kaehler_expr(num(a / (M_PI * M_PI)) + "*(" + (sep ? kPhiSep : kPhiFull) + ")");
        }
        if (name != "kaehler-bump") {
            used["c"] = c;
            std::vector<ScalarMode> F;
            sinx1_sinx2(F, 1.0);
            if (!sep) cosy1_cosy2(F, 0.5);
            add_skt_part(t, F, c);
            Expr Fe = parse_expr(sep ? kFSep : kFFull, 2);
            ex.entries[0] = ex.entries[0] - Expr::constant(c) * Fe;
            ex.entries[3] = ex.entries[3] + Expr::constant(c) * Fe;
        }
        ModelManifold m(name, 2, used, ex, torus_domain(2), t);
        m.declared_gauduchon = true;
        m.declared_balanced = (name == "kaehler-bump");
        return m;
    }
    throw Error("unknown builtin manifold '" + name + "'");
}

}  // namespace hermcurv
