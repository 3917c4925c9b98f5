#pragma once

#include "hermcurv/curvature.hpp"
#include "hermcurv/metric.hpp"

namespace hermcurv {

struct ConformalFactorJet {
    double f = 0.0;
    std::vector<cplx> df;  // d_i f
    CMatrix ddf;           // d_i dbar_j f
};

// Compiled real-valued factor f(z); throws Error when f is not real.
class ConformalFactor {
public:
    ConformalFactor(const Expr& f, int n, const std::map<std::string, double>& params = {});
    const Expr& expr() const { return f_; }
    int n() const { return n_; }
    ConformalFactorJet jet(const ChartPoint& p) const;

private:
    Expr f_;
    int n_;
    CompiledExpr c_;
    std::vector<CompiledExpr> d_, dd_;
};

// Manifold with metric e^f h. Closed-form jets (product rule on the base
// jet) when the base has them; the expression entries are exp(f) h_ij.
ModelManifold conformal_manifold(const ModelManifold& man, const Expr& f);

struct TransformedCurvature {
    CMatrix ric3, ric4;
    double s2 = 0.0;
    double t = 0.0;
};

double transformed_s2(const MetricJet& jet, const ConformalFactorJet& fj, double t);
double transformed_s2_chern(const MetricJet& jet, const ConformalFactorJet& fj);
double transformed_s2_bismut(const MetricJet& jet, const ConformalFactorJet& fj);
TransformedCurvature transformed_ric34(const MetricJet& jet, const ConformalFactorJet& fj, double t);

struct OracleDefect {
    double s2 = 0.0;   // max |formula - direct| for S^(2)
    double ric = 0.0;  // max entrywise |formula - direct| for Ric^(3), Ric^(4)
    double max() const { return std::max(s2, ric); }
};

OracleDefect conformal_oracle_check(const ModelManifold& man, const Expr& f, double t,
                                    const std::vector<ChartPoint>& points);

}  // namespace hermcurv
