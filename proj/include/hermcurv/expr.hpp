#pragma once

#include <complex>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace hermcurv {

using cplx = std::complex<double>;

enum class Op {
    Const,
    Var,
    Param,
    Add,
    Mul,
    Div,
    Pow,
    Exp,
    Log,
    Sin,
    Cos,
    Re,
    Im,
    Abs2,
};

struct Node;

// Immutable expression tree handle. Trees are always kept in normal form:
// conjugation is pushed down to the leaves, sums and products are flattened
// and constant-folded, and trivial identities are removed.
class Expr {
public:
    Expr();  // the constant 0
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    static Expr constant(cplx c);
    static Expr var(int index, bool barred);  // index is 0-based
    static Expr param(const std::string& name);

    const Node& node() const { return *node_; }
    Op op() const;
    bool is_const() const { return op() == Op::Const; }
    bool is_zero() const;
    bool is_one() const;
    cplx const_value() const;

private:
    std::shared_ptr<const Node> node_;
};

struct Node {
    Op op = Op::Const;
    cplx value{};          // Const
    int index = 0;         // Var
    bool barred = false;   // Var
    std::string name;      // Param
    int exponent = 0;      // Pow
    std::vector<Expr> args;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

Expr add(std::vector<Expr> terms);
Expr mul(std::vector<Expr> factors);
Expr pow(const Expr& base, int k);
Expr exp(const Expr& e);
Expr log(const Expr& e);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr re(const Expr& e);
Expr im(const Expr& e);
Expr abs2(const Expr& e);
Expr conj(const Expr& e);

// Wirtinger derivative d/dz_k (barred=false) or d/dzbar_k (barred=true).
Expr wirtinger_derivative(const Expr& e, int k, bool barred);

// Replace named parameters by constants. Unknown names are left in place.
Expr bind_params(const Expr& e, const std::map<std::string, double>& params);

// Canonical text; parse(print(e)) reproduces e node for node.
std::string print(const Expr& e);
bool structurally_equal(const Expr& a, const Expr& b);

std::vector<std::string> free_params(const Expr& e);

// Tree-walking evaluation; zb_k is taken as conj(z_k).
cplx evaluate(const Expr& e, const std::vector<cplx>& z,
              const std::map<std::string, double>& params = {});

// Flat stack program for repeated evaluation of a parameter-free tree.
class CompiledExpr {
public:
    CompiledExpr() = default;
    explicit CompiledExpr(const Expr& e);
    cplx operator()(const cplx* z, const cplx* zb) const;

private:
    struct Instr {
        Op op;
        int arg = 0;  // arity, var index, or exponent
        bool barred = false;
        cplx value{};
    };
    std::vector<Instr> code_;
    int max_stack_ = 0;
};

// Single-expression parser; identifiers other than z<k>, zb<k>, i, pi and
// the function names are parameters and must appear in allowed_params.
Expr parse_expr(const std::string& text, int n,
                const std::vector<std::string>& allowed_params = {});

}  // namespace hermcurv
