#include "hermcurv/metric.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "hermcurv/errors.hpp"

namespace hermcurv {

MetricJet::MetricJet(int dim)
    : n(dim), h(CMatrix::Zero(dim, dim)), dh_data(std::size_t(dim * dim * dim)), ddh_data(std::size_t(dim * dim * dim * dim)) {}

double MetricJet::invariant_defect() const {
    double d = (h - h.adjoint()).cwiseAbs().maxCoeff();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    d = std::max(d, std::abs(std::conj(ddh(i, j, k, l)) - ddh(j, i, l, k)));
    return d;
}

void check_positive_definite(const CMatrix& h) {
    const int n = int(h.rows());
    double maxdiag = 0.0;
    for (int i = 0; i < n; ++i) maxdiag = std::max(maxdiag, std::abs(h(i, i).real()));
    if (!(maxdiag > 0.0) || !h.allFinite()) throw PreconditionError("metric coefficients are not finite or vanish");
    // Plain LDL^H without pivoting so the pivots are inspectable.
    CMatrix a = h;
    for (int k = 0; k < n; ++k) {
        double piv = a(k, k).real();
        if (!(piv > 1e-10 * maxdiag))
            throw PreconditionError("metric not positive definite (pivot " + std::to_string(piv) + ")");
        for (int i = k + 1; i < n; ++i) {
            cplx f = a(i, k) / piv;
            for (int j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
}

MetricInverse inverse_and_det(const MetricJet& jet) {
    check_positive_definite(jet.h);
    Eigen::LLT<CMatrix> llt(jet.h);
    MetricInverse out;
    // (h^{-1})^T: sum_l hinv(k,l) h(m,l) = (h^{-1} ...)  with h_{m lbar} = h(m,l)
    out.hinv = llt.solve(CMatrix::Identity(jet.n, jet.n)).transpose();
    double det = 1.0;
    for (int i = 0; i < jet.n; ++i) det *= std::norm(llt.matrixL()(i, i));
    out.det = det;
    return out;
}

namespace {

std::vector<std::string> split_statements(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ';' || c == '\n') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

bool blank(const std::string& s) {
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    return true;
}

ChartPoint check_point(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ux(-1.0, 1.0), uy(0.3, 1.5);
    ChartPoint p(static_cast<std::size_t>(n));
    for (auto& z : p) z = cplx(ux(rng), uy(rng));
    return p;
}

void check_hermitian(const MetricExpr& m, const std::vector<std::string>& params) {
    std::map<std::string, double> pv;
    for (std::size_t i = 0; i < params.size(); ++i) pv[params[i]] = 0.37 + 0.11 * double(i);
    for (int i = 0; i < m.n; ++i) {
        for (int j = i; j < m.n; ++j) {
            Expr a = m.entry(j, i);
            Expr b = conj(m.entry(i, j));
            if (structurally_equal(a, b)) continue;
            std::mt19937_64 rng(0x5eed + 17 * i + j);
            int finite = 0;
            for (int s = 0; s < 12; ++s) {
                ChartPoint p = check_point(m.n, rng);
                cplx va = evaluate(a, p, pv), vb = evaluate(b, p, pv);
                if (!std::isfinite(std::abs(va)) || !std::isfinite(std::abs(vb))) continue;
                ++finite;
                if (std::abs(va - vb) > 1e-9 * (1.0 + std::abs(va)))
                    throw Error("non-Hermitian metric: h[" + std::to_string(j + 1) + "][" + std::to_string(i + 1) +
                                "] is not the conjugate of h[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) +
                                "] (conj gives " + print(b) + ")");
            }
            if (finite == 0)
                throw Error("cannot verify Hermitian symmetry of entry pair (" + std::to_string(i + 1) + "," +
                            std::to_string(j + 1) + ")");
        }
    }
}

}  // namespace

MetricExpr parse_metric(const std::string& text, int n, const std::vector<std::string>& params) {
    if (n < 2) throw Error("complex dimension n >= 2 required (got " + std::to_string(n) + ")");
    std::vector<Expr> entries(std::size_t(n * n));
    std::vector<bool> given(std::size_t(n * n), false);
    std::size_t offset = 0;
    for (const std::string& stmt : split_statements(text)) {
        std::size_t base = offset;
        offset += stmt.size() + 1;
        if (blank(stmt)) continue;
        std::size_t eq = stmt.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'h[i][j] = expr'", base);
        std::string lhs = stmt.substr(0, eq);
        int i = 0, j = 0;
        char tail = 0;
        std::string compact;
        for (char c : lhs)
            if (!std::isspace(static_cast<unsigned char>(c))) compact += c;
        if (std::sscanf(compact.c_str(), "h[%d][%d]%c", &i, &j, &tail) != 2)
            throw ParseError("malformed left-hand side '" + compact + "'", base);
        if (i < 1 || j < 1 || i > n || j > n)
            throw ParseError("index h[" + std::to_string(i) + "][" + std::to_string(j) + "] outside dimension " +
                                 std::to_string(n),
                             base);
        try {
            entries[std::size_t((i - 1) * n + j - 1)] = parse_expr(stmt.substr(eq + 1), n, params);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), base + eq + 1 + e.position());
        }
        given[std::size_t((i - 1) * n + j - 1)] = true;
    }
    MetricExpr m{n, entries};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (!given[std::size_t(i * n + j)] && given[std::size_t(j * n + i)])
                m.entries[std::size_t(i * n + j)] = conj(m.entries[std::size_t(j * n + i)]);
    check_hermitian(m, params);
    return m;
}

std::string print_metric(const MetricExpr& m) {
    std::ostringstream os;
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j) {
            const Expr& e = m.entry(i, j);
            if (e.is_zero()) continue;
            os << "h[" << i + 1 << "][" << j + 1 << "] = " << print(e) << "\n";
        }
    return os.str();
}

MetricExpr bind_params(const MetricExpr& m, const std::map<std::string, double>& params) {
    MetricExpr out = m;
    for (auto& e : out.entries) e = bind_params(e, params);
    return out;
}

bool ChartDomain::contains(const ChartPoint& p) const {
    for (int k : upper_half_plane)
        if (!(p.at(std::size_t(k)).imag() > 0.0)) return false;
    for (int k : nonzero)
        if (p.at(std::size_t(k)) == cplx(0.0)) return false;
    if (punctured) {
        double r = 0.0;
        for (auto& z : p) r += std::norm(z);
        if (!(r > 0.0)) return false;
    }
    for (auto& z : p)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

std::string ChartDomain::describe() const {
    std::ostringstream os;
    if (periodic) os << "periodic torus chart; ";
    for (int k : upper_half_plane) os << "Im z" << k + 1 << " > 0; ";
    for (int k : nonzero) os << "z" << k + 1 << " != 0; ";
    if (punctured) os << "z != 0; ";
    std::string s = os.str();
    return s.empty() ? "C^n" : s.substr(0, s.size() - 2);
}

struct ModelManifold::Compiled {
    std::vector<CompiledExpr> h, dh, ddh;
};

ModelManifold::ModelManifold(std::string name, int n, std::map<std::string, double> params, MetricExpr expr,
                             ChartDomain domain, JetFn closed_form)
    : name_(std::move(name)), n_(n), params_(std::move(params)), expr_(bind_params(expr, params_)),
      domain_(std::move(domain)), closed_form_(std::move(closed_form)) {
    if (n_ < 2) throw Error("complex dimension n >= 2 required");
    if (expr_.n != n_) throw Error("metric expression dimension mismatch");
    if (domain_.periodic && domain_.periods.empty()) domain_.periods.assign(std::size_t(2 * n_), 1.0);
    auto c = std::make_shared<Compiled>();
    for (int j = 0; j < n_; ++j)
        for (int l = 0; l < n_; ++l) c->h.emplace_back(expr_.entry(j, l));
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            for (int l = 0; l < n_; ++l) c->dh.emplace_back(wirtinger_derivative(expr_.entry(j, l), i, false));
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            for (int k = 0; k < n_; ++k)
                for (int l = 0; l < n_; ++l)
                    c->ddh.emplace_back(
                        wirtinger_derivative(wirtinger_derivative(expr_.entry(k, l), i, false), j, true));
    compiled_ = std::move(c);
}

MetricJet ModelManifold::jet_closed_form(const ChartPoint& p) const {
    if (!closed_form_) throw Error("manifold '" + name_ + "' has no closed-form jets");
    return closed_form_(p);
}

MetricJet ModelManifold::jet_from_expr(const ChartPoint& p) const {
    if (int(p.size()) != n_) throw Error("chart point dimension mismatch");
    ChartPoint zb(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) zb[k] = std::conj(p[k]);
    MetricJet jet(n_);
    for (int j = 0; j < n_; ++j)
        for (int l = 0; l < n_; ++l) jet.h(j, l) = compiled_->h[std::size_t(j * n_ + l)](p.data(), zb.data());
    for (std::size_t a = 0; a < jet.dh_data.size(); ++a) jet.dh_data[a] = compiled_->dh[a](p.data(), zb.data());
    for (std::size_t a = 0; a < jet.ddh_data.size(); ++a) jet.ddh_data[a] = compiled_->ddh[a](p.data(), zb.data());
    return jet;
}

ChartPoint ModelManifold::sample_point(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ChartPoint p(static_cast<std::size_t>(n_));
    for (bool ok = false; !ok;) {
    for (int k = 0; k < n_; ++k) {
        double a = u(rng), b = u(rng);
        if (domain_.periodic) {
            p[std::size_t(k)] = cplx(a * domain_.periods[std::size_t(2 * k)], b * domain_.periods[std::size_t(2 * k + 1)]);
        } else if (std::find(domain_.upper_half_plane.begin(), domain_.upper_half_plane.end(), k) !=
                   domain_.upper_half_plane.end()) {
            p[std::size_t(k)] = cplx(2.0 * a - 1.0, 0.2 + 1.8 * b);
        } else {
            p[std::size_t(k)] = cplx(2.0 * a - 1.0, 2.0 * b - 1.0);
        }
    }
    // keep a margin from the excluded sets so the coefficients stay moderate
    ok = true;
    for (int k : domain_.nonzero) ok = ok && std::abs(p[std::size_t(k)]) > 0.2;
    if (domain_.punctured) {
        double r = 0.0;
        for (auto& z : p) r += std::norm(z);
        ok = ok && r > 0.04;
    }
    }
    return p;
}

std::vector<bool> ModelManifold::active_axes() const {
    std::vector<bool> active(std::size_t(2 * n_), false);
    for (std::uint64_t s = 0; s < 6; ++s) {
        ChartPoint p = sample_point(977 + s);
        MetricJet j = has_closed_form() ? jet_closed_form(p) : jet_from_expr(p);
        double scale = 1.0 + j.h.cwiseAbs().maxCoeff();
        for (int k = 0; k < n_; ++k)
            for (int a = 0; a < n_; ++a)
                for (int b = 0; b < n_; ++b) {
                    cplx d = j.dh(k, a, b), db = j.dbh(k, a, b);
                    if (std::abs(d + db) > 1e-13 * scale) active[std::size_t(2 * k)] = true;
                    if (std::abs(d - db) > 1e-13 * scale) active[std::size_t(2 * k + 1)] = true;
                }
    }
    return active;
}

MetricJet evaluate_metric_jet(const ModelManifold& man, const ChartPoint& p) {
    if (int(p.size()) != man.n()) throw PreconditionError("chart point has wrong dimension");
    if (!man.domain().contains(p))
        throw PreconditionError("point outside chart domain of '" + man.name() + "' (" + man.domain().describe() + ")");
    MetricJet j = man.has_closed_form() ? man.jet_closed_form(p) : man.jet_from_expr(p);
    check_positive_definite(j.h);
    return j;
}

}  // namespace hermcurv
