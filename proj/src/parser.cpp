#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include "hermcurv/errors.hpp"
#include "hermcurv/expr.hpp"

namespace hermcurv {

namespace {

class Parser {
public:
    Parser(const std::string& s, int n, const std::vector<std::string>& params)
        : s_(s), n_(n), params_(params) {}

    Expr parse_all() {
        Expr e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    const std::string& s_;
    int n_;
    const std::vector<std::string>& params_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    Expr expr() {
        Expr e = term();
        for (;;) {
            if (accept('+'))
                e = e + term();
            else if (accept('-'))
                e = e - term();
            else
                return e;
        }
    }

    Expr term() {
        Expr e = unary();
        for (;;) {
            if (accept('*'))
                e = e * unary();
            else if (accept('/'))
                e = e / unary();
            else
                return e;
        }
    }

    Expr unary() {
        if (accept('-')) return -unary();
        if (accept('+')) return unary();
        return primary();
    }

    static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

    Expr number() {
        const char* begin = s_.c_str() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos_ += std::size_t(end - begin);
        if (pos_ < s_.size() && s_[pos_] == 'i' &&
            (pos_ + 1 == s_.size() || !ident_char(s_[pos_ + 1]))) {
            ++pos_;
            return Expr::constant(cplx(0.0, v));
        }
        return Expr::constant(v);
    }

    int integer() {
        skip();
        std::size_t start = pos_;
        if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ == start || !std::isdigit(static_cast<unsigned char>(s_[pos_ - 1]))) {
            pos_ = start;
            fail("pow exponent must be an integer literal");
        }
        return std::stoi(s_.substr(start, pos_ - start));
    }

    Expr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (!std::isalpha(static_cast<unsigned char>(c)) && c != '_') fail("unexpected '" + std::string(1, c) + "'");
        std::size_t start = pos_;
        while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
        std::string id = s_.substr(start, pos_ - start);

        static const char* funcs[] = {"exp", "log", "sin", "cos", "re", "im", "abs2", "conj", "pow"};
        if (std::find(std::begin(funcs), std::end(funcs), id) != std::end(funcs)) {
            expect('(');
            Expr a = expr();
            if (id == "pow") {
                expect(',');
                int k = integer();
                expect(')');
                return pow(a, k);
            }
            expect(')');
            if (id == "exp") return exp(a);
            if (id == "log") return log(a);
            if (id == "sin") return sin(a);
            if (id == "cos") return cos(a);
            if (id == "re") return re(a);
            if (id == "im") return im(a);
            if (id == "abs2") return abs2(a);
            return conj(a);
        }
        if (id == "i") return Expr::constant(cplx(0.0, 1.0));
        if (id == "pi") return Expr::constant(M_PI);
        for (const char* prefix : {"zb", "z"}) {
            std::size_t len = std::char_traits<char>::length(prefix);
            if (id.size() > len && id.compare(0, len, prefix) == 0 &&
                std::all_of(id.begin() + long(len), id.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
                int k = std::stoi(id.substr(len));
                if (k < 1 || k > n_) {
                    pos_ = start;
                    fail("variable " + id + " outside dimension " + std::to_string(n_));
                }
                return Expr::var(k - 1, len == 2);
            }
        }
        if (std::find(params_.begin(), params_.end(), id) != params_.end()) return Expr::param(id);
        pos_ = start;
        fail("unknown identifier '" + id + "'");
    }
};

}  // namespace

Expr parse_expr(const std::string& text, int n, const std::vector<std::string>& allowed_params) {
    Parser p(text, n, allowed_params);
    return p.parse_all();
}

}  // namespace hermcurv
