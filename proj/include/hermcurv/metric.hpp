#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hermcurv/expr.hpp"

namespace hermcurv {

using CMatrix = Eigen::MatrixXcd;
using ChartPoint = std::vector<cplx>;

// Pointwise 2-jet: h(j,l) = h_{j lbar}, dh(i,j,l) = d_i h_{j lbar},
// ddh(i,j,k,l) = d_i dbar_j h_{k lbar}.
struct MetricJet {
    int n = 0;
    CMatrix h;
    std::vector<cplx> dh_data;
    std::vector<cplx> ddh_data;

    MetricJet() = default;
    explicit MetricJet(int dim);

    cplx& dh(int i, int j, int l) { return dh_data[(i * n + j) * n + l]; }
    cplx dh(int i, int j, int l) const { return dh_data[(i * n + j) * n + l]; }
    // dbar_i h_{j lbar}
    cplx dbh(int i, int j, int l) const { return std::conj(dh(i, l, j)); }
    cplx& ddh(int i, int j, int k, int l) { return ddh_data[((i * n + j) * n + k) * n + l]; }
    cplx ddh(int i, int j, int k, int l) const { return ddh_data[((i * n + j) * n + k) * n + l]; }

    // Largest violation of the Hermitian/conjugation invariants.
    double invariant_defect() const;
};

struct MetricInverse {
    CMatrix hinv;  // hinv(k,l) = h^{k lbar}, so that sum_l h^{k lbar} h_{m lbar} = delta_km
    double det = 0.0;
};

// Throws PreconditionError when h is not numerically positive definite
// (smallest Cholesky pivot below 1e-10 times the largest diagonal entry).
MetricInverse inverse_and_det(const MetricJet& jet);
void check_positive_definite(const CMatrix& h);

struct MetricExpr {
    int n = 0;
    std::vector<Expr> entries;  // row-major, entries[i*n+j] = h_{i jbar}
    const Expr& entry(int i, int j) const { return entries[i * n + j]; }
};

// Parse an assignment list "h[i][j] = expr" separated by newlines or ';'.
// Missing lower entries h[j][i] are filled with conj(h[i][j]); entries given
// on both sides must be formal conjugates of each other.
MetricExpr parse_metric(const std::string& text, int n, const std::vector<std::string>& params = {});
std::string print_metric(const MetricExpr& m);
MetricExpr bind_params(const MetricExpr& m, const std::map<std::string, double>& params);

struct ChartDomain {
    std::vector<int> upper_half_plane;  // 0-based coordinates needing Im z > 0
    std::vector<int> nonzero;           // 0-based coordinates needing z != 0
    bool punctured = false;             // whole coordinate vector must be nonzero
    bool periodic = false;              // torus chart, coefficients periodic in all real axes
    std::vector<double> periods;        // 2n entries (x1,y1,...), default 1

    bool contains(const ChartPoint& p) const;
    std::string describe() const;
};

enum class MetricSource { BuiltinClosedForm, ParsedExpression };

class ModelManifold {
public:
    using JetFn = std::function<MetricJet(const ChartPoint&)>;

    ModelManifold(std::string name, int n, std::map<std::string, double> params, MetricExpr expr,
                  ChartDomain domain, JetFn closed_form = nullptr);

    const std::string& name() const { return name_; }
    int n() const { return n_; }
    const std::map<std::string, double>& params() const { return params_; }
    MetricSource source() const { return closed_form_ ? MetricSource::BuiltinClosedForm : MetricSource::ParsedExpression; }
    const ChartDomain& domain() const { return domain_; }
    const MetricExpr& expr() const { return expr_; }

    bool declared_gauduchon = false;
    bool declared_balanced = false;

    MetricJet jet_closed_form(const ChartPoint& p) const;
    MetricJet jet_from_expr(const ChartPoint& p) const;
    bool has_closed_form() const { return bool(closed_form_); }

    // Real axes (x1,y1,...) on which the coefficients actually depend.
    std::vector<bool> active_axes() const;

    // Uniform random point inside the chart domain.
    ChartPoint sample_point(std::uint64_t seed) const;

private:
    std::string name_;
    int n_;
    std::map<std::string, double> params_;
    MetricExpr expr_;
    ChartDomain domain_;
    JetFn closed_form_;
    struct Compiled;
    std::shared_ptr<const Compiled> compiled_;
};

// Closed form when available, otherwise the expression path. Checks the
// domain and positive-definiteness.
MetricJet evaluate_metric_jet(const ModelManifold& man, const ChartPoint& p);

std::vector<std::string> builtin_names();
// n is used by hopf and flat-torus; params override catalog defaults.
ModelManifold builtin_manifold(const std::string& name, int n = 2, const std::map<std::string, double>& params = {});

// Manifest: JSON object {name, n, params{}, metric{"h[i][j]": expr}, domain{}}.
ModelManifold load_manifest(const std::string& path);
ModelManifold manifest_from_json_text(const std::string& text);

}  // namespace hermcurv
