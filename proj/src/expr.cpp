#include "hermcurv/expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "hermcurv/errors.hpp"

namespace hermcurv {

namespace {

Expr make(Node n) { return Expr(std::make_shared<const Node>(std::move(n))); }

Expr make_unary(Op op, const Expr& a) {
    Node n;
    n.op = op;
    n.args = {a};
    return make(std::move(n));
}

cplx ipow(cplx b, int k) {
    if (k < 0) return 1.0 / ipow(b, -k);
    cplx r = 1.0;
    while (k) {
        if (k & 1) r *= b;
        b *= b;
        k >>= 1;
    }
    return r;
}

bool is_real_valued(const Expr& e) {
    switch (e.op()) {
        case Op::Re:
        case Op::Im:
        case Op::Abs2:
        case Op::Param:
            return true;
        case Op::Const:
            return e.const_value().imag() == 0.0;
        default:
            return false;
    }
}

}  // namespace

Expr::Expr() : node_(std::make_shared<const Node>()) {}

Expr Expr::constant(cplx c) {
    Node n;
    n.op = Op::Const;
    n.value = cplx(c.real() + 0.0, c.imag() + 0.0);  // drop negative zeros
    return make(std::move(n));
}

Expr Expr::var(int index, bool barred) {
    Node n;
    n.op = Op::Var;
    n.index = index;
    n.barred = barred;
    return make(std::move(n));
}

Expr Expr::param(const std::string& name) {
    Node n;
    n.op = Op::Param;
    n.name = name;
    return make(std::move(n));
}

Op Expr::op() const { return node_->op; }
bool Expr::is_zero() const { return is_const() && node_->value == cplx(0.0); }
bool Expr::is_one() const { return is_const() && node_->value == cplx(1.0); }
cplx Expr::const_value() const { return node_->value; }

Expr add(std::vector<Expr> terms) {
    std::vector<Expr> flat;
    cplx c = 0.0;
    bool have_const = false;
    for (auto& t : terms) {
        if (t.op() == Op::Add) {
            for (auto& s : t.node().args) {
                if (s.is_const()) {
                    c += s.const_value();
                    have_const = true;
                } else {
                    flat.push_back(s);
                }
            }
        } else if (t.is_const()) {
            c += t.const_value();
            have_const = true;
        } else {
            flat.push_back(t);
        }
    }
    if (flat.empty()) return Expr::constant(c);
    if (have_const && c != cplx(0.0)) flat.insert(flat.begin(), Expr::constant(c));
    if (flat.size() == 1) return flat[0];
    Node n;
    n.op = Op::Add;
    n.args = std::move(flat);
    return make(std::move(n));
}

Expr mul(std::vector<Expr> factors) {
    std::vector<Expr> flat;
    cplx c = 1.0;
    for (auto& f : factors) {
        if (f.op() == Op::Mul) {
            for (auto& s : f.node().args) {
                if (s.is_const())
                    c *= s.const_value();
                else
                    flat.push_back(s);
            }
        } else if (f.is_const()) {
            c *= f.const_value();
        } else {
            flat.push_back(f);
        }
    }
    if (c == cplx(0.0) || flat.empty()) return Expr::constant(c);
    if (c != cplx(1.0)) flat.insert(flat.begin(), Expr::constant(c));
    if (flat.size() == 1) return flat[0];
    Node n;
    n.op = Op::Mul;
    n.args = std::move(flat);
    return make(std::move(n));
}

Expr operator+(const Expr& a, const Expr& b) { return add({a, b}); }
Expr operator*(const Expr& a, const Expr& b) { return mul({a, b}); }
Expr operator-(const Expr& a) { return mul({Expr::constant(-1.0), a}); }
Expr operator-(const Expr& a, const Expr& b) { return add({a, -b}); }

Expr operator/(const Expr& a, const Expr& b) {
    if (b.is_const()) return mul({a, Expr::constant(1.0 / b.const_value())});
    if (a.is_zero()) return a;
    Node n;
    n.op = Op::Div;
    n.args = {a, b};
    return make(std::move(n));
}

Expr pow(const Expr& base, int k) {
    if (k == 0) return Expr::constant(1.0);
    if (k == 1) return base;
    if (base.is_const()) return Expr::constant(ipow(base.const_value(), k));
    if (base.op() == Op::Pow) return pow(base.node().args[0], base.node().exponent * k);
    Node n;
    n.op = Op::Pow;
    n.exponent = k;
    n.args = {base};
    return make(std::move(n));
}

Expr exp(const Expr& e) {
    if (e.is_const()) return Expr::constant(std::exp(e.const_value()));
    return make_unary(Op::Exp, e);
}

Expr log(const Expr& e) {
    if (e.is_const()) return Expr::constant(std::log(e.const_value()));
    return make_unary(Op::Log, e);
}

Expr sin(const Expr& e) {
    if (e.is_const()) return Expr::constant(std::sin(e.const_value()));
    return make_unary(Op::Sin, e);
}

Expr cos(const Expr& e) {
    if (e.is_const()) return Expr::constant(std::cos(e.const_value()));
    return make_unary(Op::Cos, e);
}

Expr re(const Expr& e) {
    if (e.is_const()) return Expr::constant(e.const_value().real());
    if (is_real_valued(e)) return e;
    return make_unary(Op::Re, e);
}

Expr im(const Expr& e) {
    if (e.is_const()) return Expr::constant(e.const_value().imag());
    if (is_real_valued(e)) return Expr::constant(0.0);
    return make_unary(Op::Im, e);
}

Expr abs2(const Expr& e) {
    if (e.is_const()) return Expr::constant(std::norm(e.const_value()));
    return make_unary(Op::Abs2, e);
}

Expr conj(const Expr& e) {
    const Node& n = e.node();
    switch (n.op) {
        case Op::Const:
            return Expr::constant(std::conj(n.value));
        case Op::Var:
            return Expr::var(n.index, !n.barred);
        case Op::Param:
        case Op::Re:
        case Op::Im:
        case Op::Abs2:
            return e;
        case Op::Add: {
            std::vector<Expr> a;
            for (auto& s : n.args) a.push_back(conj(s));
            return add(std::move(a));
        }
        case Op::Mul: {
            std::vector<Expr> a;
            for (auto& s : n.args) a.push_back(conj(s));
            return mul(std::move(a));
        }
        case Op::Div:
            return conj(n.args[0]) / conj(n.args[1]);
        case Op::Pow:
            return pow(conj(n.args[0]), n.exponent);
        case Op::Exp:
            return exp(conj(n.args[0]));
        case Op::Log:
            return log(conj(n.args[0]));
        case Op::Sin:
            return sin(conj(n.args[0]));
        case Op::Cos:
            return cos(conj(n.args[0]));
    }
    return e;
}

Expr wirtinger_derivative(const Expr& e, int k, bool barred) {
    const Node& n = e.node();
    auto d = [&](const Expr& x) { return wirtinger_derivative(x, k, barred); };
    // d/dv conj(x) = conj(d/dvbar x)
    auto dconj = [&](const Expr& x) { return conj(wirtinger_derivative(x, k, !barred)); };
    switch (n.op) {
        case Op::Const:
        case Op::Param:
            return Expr::constant(0.0);
        case Op::Var:
            return Expr::constant((n.index == k && n.barred == barred) ? 1.0 : 0.0);
        case Op::Add: {
            std::vector<Expr> t;
            for (auto& s : n.args) t.push_back(d(s));
            return add(std::move(t));
        }
        case Op::Mul: {
            std::vector<Expr> t;
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                Expr di = d(n.args[i]);
                if (di.is_zero()) continue;
                std::vector<Expr> f;
                for (std::size_t j = 0; j < n.args.size(); ++j) f.push_back(j == i ? di : n.args[j]);
                t.push_back(mul(std::move(f)));
            }
            return add(std::move(t));
        }
        case Op::Div: {
            const Expr& a = n.args[0];
            const Expr& b = n.args[1];
            Expr da = d(a), db = d(b);
            if (db.is_zero()) return da / b;
            return (da * b - a * db) / pow(b, 2);
        }
        case Op::Pow: {
            const Expr& b = n.args[0];
            return mul({Expr::constant(double(n.exponent)), pow(b, n.exponent - 1), d(b)});
        }
        case Op::Exp:
            return e * d(n.args[0]);
        case Op::Log:
            return d(n.args[0]) / n.args[0];
        case Op::Sin:
            return cos(n.args[0]) * d(n.args[0]);
        case Op::Cos:
            return -(sin(n.args[0]) * d(n.args[0]));
        case Op::Re: {
            const Expr& x = n.args[0];
            return Expr::constant(0.5) * (d(x) + dconj(x));
        }
        case Op::Im: {
            const Expr& x = n.args[0];
            return Expr::constant(cplx(0.0, -0.5)) * (d(x) - dconj(x));
        }
        case Op::Abs2: {
            const Expr& x = n.args[0];
            return d(x) * conj(x) + x * dconj(x);
        }
    }
    return Expr::constant(0.0);
}

Expr bind_params(const Expr& e, const std::map<std::string, double>& params) {
    const Node& n = e.node();
    switch (n.op) {
        case Op::Const:
        case Op::Var:
            return e;
        case Op::Param: {
            auto it = params.find(n.name);
            return it == params.end() ? e : Expr::constant(it->second);
        }
        case Op::Add: {
            std::vector<Expr> a;
            for (auto& s : n.args) a.push_back(bind_params(s, params));
            return add(std::move(a));
        }
        case Op::Mul: {
            std::vector<Expr> a;
            for (auto& s : n.args) a.push_back(bind_params(s, params));
            return mul(std::move(a));
        }
        case Op::Div:
            return bind_params(n.args[0], params) / bind_params(n.args[1], params);
        case Op::Pow:
            return pow(bind_params(n.args[0], params), n.exponent);
        case Op::Exp:
            return exp(bind_params(n.args[0], params));
        case Op::Log:
            return log(bind_params(n.args[0], params));
        case Op::Sin:
            return sin(bind_params(n.args[0], params));
        case Op::Cos:
            return cos(bind_params(n.args[0], params));
        case Op::Re:
            return re(bind_params(n.args[0], params));
        case Op::Im:
            return im(bind_params(n.args[0], params));
        case Op::Abs2:
            return abs2(bind_params(n.args[0], params));
    }
    return e;
}

namespace {

std::string fmt_real(double v) {
    char buf[64];
    if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15)
        std::snprintf(buf, sizeof buf, "%.0f", v);
    else
        std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_const(cplx c) {
    if (c.imag() == 0.0) return fmt_real(c.real());
    if (c.real() == 0.0) return fmt_real(c.imag()) + "i";
    std::string im = fmt_real(std::fabs(c.imag())) + "i";
    return "(" + fmt_real(c.real()) + (c.imag() < 0 ? "-" : "+") + im + ")";
}

const char* fname(Op op) {
    switch (op) {
        case Op::Exp: return "exp";
        case Op::Log: return "log";
        case Op::Sin: return "sin";
        case Op::Cos: return "cos";
        case Op::Re: return "re";
        case Op::Im: return "im";
        case Op::Abs2: return "abs2";
        default: return "?";
    }
}

void print_into(const Expr& e, std::string& out) {
    const Node& n = e.node();
    auto wrapped = [&](const Expr& x, bool wrap) {
        if (wrap) out += '(';
        print_into(x, out);
        if (wrap) out += ')';
    };
    switch (n.op) {
        case Op::Const:
            out += fmt_const(n.value);
            break;
        case Op::Var:
            out += (n.barred ? "zb" : "z") + std::to_string(n.index + 1);
            break;
        case Op::Param:
            out += n.name;
            break;
        case Op::Add:
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                if (i) out += " + ";
                print_into(n.args[i], out);
            }
            break;
        case Op::Mul:
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                if (i) out += '*';
                Op o = n.args[i].op();
                wrapped(n.args[i], o == Op::Add || o == Op::Div);
            }
            break;
        case Op::Div: {
            Op a = n.args[0].op(), b = n.args[1].op();
            wrapped(n.args[0], a == Op::Add);
            out += '/';
            wrapped(n.args[1], b == Op::Add || b == Op::Mul || b == Op::Div);
            break;
        }
        case Op::Pow:
            out += "pow(";
            print_into(n.args[0], out);
            out += "," + std::to_string(n.exponent) + ")";
            break;
        default:
            out += fname(n.op);
            out += '(';
            print_into(n.args[0], out);
            out += ')';
    }
}

void collect_params(const Expr& e, std::set<std::string>& out) {
    if (e.op() == Op::Param) out.insert(e.node().name);
    for (auto& a : e.node().args) collect_params(a, out);
}

}  // namespace

std::string print(const Expr& e) {
    std::string s;
    print_into(e, s);
    return s;
}

bool structurally_equal(const Expr& a, const Expr& b) { return print(a) == print(b); }

std::vector<std::string> free_params(const Expr& e) {
    std::set<std::string> s;
    collect_params(e, s);
    return {s.begin(), s.end()};
}

cplx evaluate(const Expr& e, const std::vector<cplx>& z, const std::map<std::string, double>& params) {
    const Node& n = e.node();
    auto ev = [&](const Expr& x) { return evaluate(x, z, params); };
    switch (n.op) {
        case Op::Const:
            return n.value;
        case Op::Var:
            return n.barred ? std::conj(z.at(n.index)) : z.at(n.index);
        case Op::Param: {
            auto it = params.find(n.name);
            if (it == params.end()) throw Error("unbound parameter '" + n.name + "'");
            return it->second;
        }
        case Op::Add: {
            cplx s = 0.0;
            for (auto& a : n.args) s += ev(a);
            return s;
        }
        case Op::Mul: {
            cplx s = 1.0;
            for (auto& a : n.args) s *= ev(a);
            return s;
        }
        case Op::Div:
            return ev(n.args[0]) / ev(n.args[1]);
        case Op::Pow:
            return ipow(ev(n.args[0]), n.exponent);
        case Op::Exp:
            return std::exp(ev(n.args[0]));
        case Op::Log:
            return std::log(ev(n.args[0]));
        case Op::Sin:
            return std::sin(ev(n.args[0]));
        case Op::Cos:
            return std::cos(ev(n.args[0]));
        case Op::Re:
            return ev(n.args[0]).real();
        case Op::Im:
            return ev(n.args[0]).imag();
        case Op::Abs2:
            return std::norm(ev(n.args[0]));
    }
    return 0.0;
}

CompiledExpr::CompiledExpr(const Expr& e) {
    int depth = 0;
    auto emit = [&](auto&& self, const Expr& x) -> void {
        const Node& n = x.node();
        for (auto& a : n.args) self(self, a);
        Instr in{n.op};
        switch (n.op) {
            case Op::Const:
                in.value = n.value;
                ++depth;
                break;
            case Op::Var:
                in.arg = n.index;
                in.barred = n.barred;
                ++depth;
                break;
            case Op::Param:
                throw Error("cannot compile expression with unbound parameter '" + n.name + "'");
            case Op::Add:
            case Op::Mul:
                in.arg = int(n.args.size());
                depth -= in.arg - 1;
                break;
            case Op::Div:
                depth -= 1;
                break;
            case Op::Pow:
                in.arg = n.exponent;
                break;
            default:
                break;
        }
        max_stack_ = std::max(max_stack_, depth);
        code_.push_back(in);
    };
    emit(emit, e);
}

cplx CompiledExpr::operator()(const cplx* z, const cplx* zb) const {
    constexpr int kLocal = 64;
    cplx local[kLocal];
    std::vector<cplx> heap;
    cplx* st = local;
    if (max_stack_ > kLocal) {
        heap.resize(max_stack_);
        st = heap.data();
    }
    int sp = 0;
    for (const Instr& in : code_) {
        switch (in.op) {
            case Op::Const:
                st[sp++] = in.value;
                break;
            case Op::Var:
                st[sp++] = in.barred ? zb[in.arg] : z[in.arg];
                break;
            case Op::Add: {
                cplx s = 0.0;
                for (int i = 0; i < in.arg; ++i) s += st[sp - in.arg + i];
                sp -= in.arg;
                st[sp++] = s;
                break;
            }
            case Op::Mul: {
                cplx s = 1.0;
                for (int i = 0; i < in.arg; ++i) s *= st[sp - in.arg + i];
                sp -= in.arg;
                st[sp++] = s;
                break;
            }
            case Op::Div:
                st[sp - 2] /= st[sp - 1];
                --sp;
                break;
            case Op::Pow:
                st[sp - 1] = ipow(st[sp - 1], in.arg);
                break;
            case Op::Exp:
                st[sp - 1] = std::exp(st[sp - 1]);
                break;
            case Op::Log:
                st[sp - 1] = std::log(st[sp - 1]);
                break;
            case Op::Sin:
                st[sp - 1] = std::sin(st[sp - 1]);
                break;
            case Op::Cos:
                st[sp - 1] = std::cos(st[sp - 1]);
                break;
            case Op::Re:
                st[sp - 1] = st[sp - 1].real();
                break;
            case Op::Im:
                st[sp - 1] = st[sp - 1].imag();
                break;
            case Op::Abs2:
                st[sp - 1] = std::norm(st[sp - 1]);
                break;
            case Op::Param:
                break;
        }
    }
    return st[0];
}

}  // namespace hermcurv
