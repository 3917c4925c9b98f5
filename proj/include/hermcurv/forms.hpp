#pragma once

#include <bit>
#include <vector>

#include "hermcurv/metric.hpp"

namespace hermcurv {

// Scalar with its first Wirtinger derivatives and mixed second derivatives.
struct JetScalar {
    cplx v{};
    std::vector<cplx> d, db;  // d_a v, dbar_a v
    std::vector<cplx> ddb;    // d_a dbar_b v at a*n+b

    JetScalar() = default;
    explicit JetScalar(int n, cplx value = 0.0)
        : v(value), d(std::size_t(n)), db(std::size_t(n)), ddb(std::size_t(n) * std::size_t(n)) {}
    int n() const { return int(d.size()); }

    JetScalar& operator+=(const JetScalar& o);
    friend JetScalar operator*(const JetScalar& a, const JetScalar& b);
    friend JetScalar operator*(cplx s, const JetScalar& a);
};

// h_{j lbar} as a JetScalar.
JetScalar metric_entry(const MetricJet& jet, int j, int l);

// Forms on C^n over the basis dz^1..dz^n, dzbar^1..dzbar^n (indices 0..2n-1);
// a monomial is a bitmask of basis indices in increasing order.
template <class C>
struct Form {
    int n = 0;
    std::vector<C> c;

    Form() = default;
    explicit Form(int dim, const C& zero = C{}) : n(dim), c(std::size_t(1) << (2 * dim), zero) {}
};

using CForm = Form<cplx>;
using JetForm = Form<JetScalar>;

// Sign of e_A ^ e_B relative to e_{A|B}; 0 if they overlap.
int wedge_sign(unsigned a, unsigned b);

CForm wedge(const CForm& a, const CForm& b);
JetForm wedge(const JetForm& a, const JetForm& b);

CForm values(const JetForm& f);
CForm del(const JetForm& f);
CForm delbar(const JetForm& f);
CForm ddbar(const JetForm& f);  // del delbar f

JetForm kaehler_form(const MetricJet& jet);  // omega = i h_{j lbar} dz^j ^ dzbar^l
JetForm power(const JetForm& f, int k);      // f^k, k >= 0

// Pointwise metric norm squared: coefficients in a unitary coframe.
double norm2(const CForm& f, const CMatrix& hinv);
double max_abs(const CForm& f);

// (1,1)-form i * sum C(i,j) dz^i ^ dzbar^j
CForm one_one_form(const CMatrix& C);

}  // namespace hermcurv
