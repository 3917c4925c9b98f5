#include "hermcurv/forms.hpp"

#include <Eigen/Cholesky>

namespace hermcurv {

JetScalar& JetScalar::operator+=(const JetScalar& o) {
    v += o.v;
    for (std::size_t a = 0; a < d.size(); ++a) {
        d[a] += o.d[a];
        db[a] += o.db[a];
    }
    for (std::size_t k = 0; k < ddb.size(); ++k) ddb[k] += o.ddb[k];
    return *this;
}

JetScalar operator*(const JetScalar& a, const JetScalar& b) {
    const int n = a.n();
    JetScalar r(n, a.v * b.v);
    for (int i = 0; i < n; ++i) {
        r.d[i] = a.d[i] * b.v + a.v * b.d[i];
        r.db[i] = a.db[i] * b.v + a.v * b.db[i];
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            std::size_t k = std::size_t(i * n + j);
            r.ddb[k] = a.ddb[k] * b.v + a.d[i] * b.db[j] + a.db[j] * b.d[i] + a.v * b.ddb[k];
        }
    return r;
}

JetScalar operator*(cplx s, const JetScalar& a) {
    JetScalar r = a;
    r.v *= s;
    for (auto& x : r.d) x *= s;
    for (auto& x : r.db) x *= s;
    for (auto& x : r.ddb) x *= s;
    return r;
}

JetScalar metric_entry(const MetricJet& jet, int j, int l) {
    const int n = jet.n;
    JetScalar s(n, jet.h(j, l));
    for (int a = 0; a < n; ++a) {
        s.d[a] = jet.dh(a, j, l);
        s.db[a] = jet.dbh(a, j, l);
        for (int b = 0; b < n; ++b) s.ddb[std::size_t(a * n + b)] = jet.ddh(a, b, j, l);
    }
    return s;
}

int wedge_sign(unsigned a, unsigned b) {
    if (a & b) return 0;
    // count pairs (i in a, j in b) with i > j
    int swaps = 0;
    while (b) {
        unsigned low = b & (~b + 1u);
        swaps += std::popcount(a & ~((low << 1) - 1u));
        b &= b - 1u;
    }
    return (swaps & 1) ? -1 : 1;
}

namespace {

bool is_zero(const cplx& z) { return z == cplx(0.0); }
bool is_zero(const JetScalar& s) {
    if (s.v != cplx(0.0)) return false;
    for (auto& x : s.d) if (x != cplx(0.0)) return false;
    for (auto& x : s.db) if (x != cplx(0.0)) return false;
    for (auto& x : s.ddb) if (x != cplx(0.0)) return false;
    return true;
}

void add_to(cplx& acc, const cplx& x) { acc += x; }
void add_to(JetScalar& acc, const JetScalar& x) { acc += x; }

template <class C>
Form<C> wedge_impl(const Form<C>& a, const Form<C>& b, const C& zero) {
    Form<C> r(a.n, zero);
    const unsigned m = unsigned(a.c.size());
    for (unsigned i = 0; i < m; ++i) {
        if (is_zero(a.c[i])) continue;
        for (unsigned j = 0; j < m; ++j) {
            if (is_zero(b.c[j])) continue;
            int s = wedge_sign(i, j);
            if (s == 0) continue;
            add_to(r.c[i | j], cplx(double(s)) * (a.c[i] * b.c[j]));
        }
    }
    return r;
}

}  // namespace

CForm wedge(const CForm& a, const CForm& b) { return wedge_impl(a, b, cplx(0.0)); }
JetForm wedge(const JetForm& a, const JetForm& b) { return wedge_impl(a, b, JetScalar(a.n)); }

CForm values(const JetForm& f) {
    CForm r(f.n);
    for (std::size_t i = 0; i < f.c.size(); ++i) r.c[i] = f.c[i].v;
    return r;
}

namespace {

// sum over a of coef(a) e_{shift+a} ^ f_I
template <class Get>
CForm apply_one(const JetForm& f, int shift, Get get) {
    CForm r(f.n);
    for (unsigned I = 0; I < f.c.size(); ++I) {
        if (is_zero(f.c[I])) continue;
        for (int a = 0; a < f.n; ++a) {
            unsigned e = 1u << unsigned(shift + a);
            int s = wedge_sign(e, I);
            if (s) r.c[e | I] += double(s) * get(f.c[I], a);
        }
    }
    return r;
}

}  // namespace

CForm del(const JetForm& f) {
    return apply_one(f, 0, [](const JetScalar& s, int a) { return s.d[std::size_t(a)]; });
}

CForm delbar(const JetForm& f) {
    return apply_one(f, f.n, [](const JetScalar& s, int a) { return s.db[std::size_t(a)]; });
}

CForm ddbar(const JetForm& f) {
    const int n = f.n;
    CForm r(n);
    for (unsigned I = 0; I < f.c.size(); ++I) {
        if (is_zero(f.c[I])) continue;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                unsigned eb = 1u << unsigned(n + b);
                int s1 = wedge_sign(eb, I);
                if (!s1) continue;
                unsigned ea = 1u << unsigned(a);
                int s2 = wedge_sign(ea, eb | I);
                if (!s2) continue;
                r.c[ea | eb | I] += double(s1 * s2) * f.c[I].ddb[std::size_t(a * n + b)];
            }
    }
    return r;
}

JetForm kaehler_form(const MetricJet& jet) {
    const int n = jet.n;
    JetForm w(n, JetScalar(n));
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) w.c[(1u << unsigned(j)) | (1u << unsigned(n + l))] = cplx(0, 1) * metric_entry(jet, j, l);
    return w;
}

JetForm power(const JetForm& f, int k) {
    JetForm r(f.n, JetScalar(f.n));
    r.c[0] = JetScalar(f.n, 1.0);
    for (int i = 0; i < k; ++i) r = wedge(r, f);
    return r;
}

double norm2(const CForm& f, const CMatrix& hinv) {
    const int n = f.n;
    // hinv = L L^H; dz^i = sum_a L(i,a) theta^a is a unitary coframe expansion
    CMatrix L = Eigen::LLT<CMatrix>(hinv).matrixL();
    std::vector<CForm> img(std::size_t(2 * n), CForm(n));
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < n; ++a) {
            img[std::size_t(i)].c[1u << unsigned(a)] = L(i, a);
            img[std::size_t(n + i)].c[1u << unsigned(n + a)] = std::conj(L(i, a));
        }
    CForm t(n);
    for (unsigned I = 0; I < f.c.size(); ++I) {
        if (f.c[I] == cplx(0.0)) continue;
        CForm p(n);
        p.c[0] = f.c[I];
        for (int k = 0; k < 2 * n; ++k)
            if (I & (1u << unsigned(k))) p = wedge(p, img[std::size_t(k)]);
        for (std::size_t m = 0; m < p.c.size(); ++m) t.c[m] += p.c[m];
    }
    double s = 0;
    for (auto& z : t.c) s += std::norm(z);
    return s;
}

double max_abs(const CForm& f) {
    double m = 0;
    for (auto& z : f.c) m = std::max(m, std::abs(z));
    return m;
}

CForm one_one_form(const CMatrix& C) {
    const int n = int(C.rows());
    CForm r(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r.c[(1u << unsigned(i)) | (1u << unsigned(n + j))] = cplx(0, 1) * C(i, j);
    return r;
}

}  // namespace hermcurv
