#pragma once

#include <array>
#include <string>
#include <vector>

#include "hermcurv/forms.hpp"
#include "hermcurv/metric.hpp"

namespace hermcurv {

// T(i,j,k) = T_{ij}^k
struct TorsionTensor {
    int n = 0;
    std::vector<cplx> T;
    cplx operator()(int i, int j, int k) const { return T[std::size_t((i * n + j) * n + k)]; }
    cplx& operator()(int i, int j, int k) { return T[std::size_t((i * n + j) * n + k)]; }
    // tau_i = T_{ip}^p
    std::vector<cplx> trace() const;
};

enum class CurvatureOrigin { Chern, Gauduchon };

// R(i,j,k,l) = R_{i jbar k lbar}
struct CurvatureTensor {
    int n = 0;
    double t = 0.0;
    CurvatureOrigin origin = CurvatureOrigin::Chern;
    std::vector<cplx> R;
    cplx operator()(int i, int j, int k, int l) const { return R[std::size_t(((i * n + j) * n + k) * n + l)]; }
    cplx& operator()(int i, int j, int k, int l) { return R[std::size_t(((i * n + j) * n + k) * n + l)]; }
    // max |conj(R_ijkl) - R_jilk|
    double hermitian_defect() const;
};

// Coefficient matrices of i C_{ij} dz^i ^ dzbar^j.
struct RicciForms {
    CMatrix ric1, ric2, ric3, ric4;
    double s1 = 0.0, s2 = 0.0;
};

struct TorsionDiagnostics {
    std::vector<cplx> tau;                // T_{ip}^p
    std::vector<cplx> del_star_omega;     // dzbar^j coefficients of del^* omega
    std::vector<cplx> delbar_star_omega;  // dz^i coefficients of delbar^* omega
    std::vector<double> lee;              // real components on (dx1, dy1, ..., dxn, dyn)
    std::vector<cplx> lee_complex;        // coefficients on dz^1..dz^n, dzbar^1..dzbar^n
    double lee_equation_residual = 0.0;   // max coefficient of d omega^{n-1} - lee ^ omega^{n-1}
    CMatrix ddstar;                       // del del^* omega = i ddstar_{ij} dz^i ^ dzbar^j
    double del_omega2 = 0.0;              // |del omega|^2
    double del_star2 = 0.0;               // |del^* omega|^2
    double delbar_star2 = 0.0;            // |delbar^* omega|^2
    double ddstar_pair = 0.0;             // <del del^* omega, omega>
};

struct ClassResiduals {
    double kahler = 0.0, balanced = 0.0, gauduchon = 0.0, pluriclosed = 0.0;
};

struct ClassFlags {
    struct Flag {
        bool holds = false;
        double residual = 0.0;
    };
    Flag kahler, balanced, gauduchon, pluriclosed;
    double tol = 1e-8;
    // observed ratios residual_balanced / residual_kahler and residual_gauduchon / residual_balanced
    double c_balanced_kahler = 0.0, c_gauduchon_balanced = 0.0;
};

TorsionTensor chern_torsion(const MetricJet& jet);
CurvatureTensor chern_curvature(const MetricJet& jet);
CurvatureTensor gauduchon_curvature(const MetricJet& jet, double t);
// Throws ConsistencyError when a scalar has an imaginary part above 1e-10 (relative).
RicciForms ricci_and_scalars(const CurvatureTensor& R, const MetricJet& jet);
std::pair<double, double> scalar_via_identity(const MetricJet& jet, double t);
TorsionDiagnostics torsion_diagnostics(const MetricJet& jet);

// Scalars needed on every grid node, sharing one inverse.
struct PointScalars {
    CMatrix hinv;
    double det = 0.0;
    std::vector<cplx> tau;
    double s1_chern = 0.0, s2_chern = 0.0, s2_bismut = 0.0;
};
PointScalars point_scalars(const MetricJet& jet);

ClassResiduals class_residuals(const MetricJet& jet);
ClassFlags classify(const ModelManifold& man, const std::vector<ChartPoint>& points, double tol = 1e-8);

struct ComparisonDefect {
    double general = 0.0;  // S2 - S1 + (t^2-4t+1)|delbar^* omega|^2 + 2t^2|del omega|^2
    double dim2 = 0.0;     // S2 - S1 + (3t-1)(t-1)|del omega|^2, n = 2 only
};
ComparisonDefect scalar_comparison_defect(const MetricJet& jet, double t);

struct EinsteinResidual {
    double f_hat = 0.0;
    double residual = 0.0;         // |ric3 + ric4 - f_hat h| in the metric norm
    double identity_defect = 0.0;  // max |ric3 + ric4 - (2 ric1 - ddstar - ddstar^H)| at t = 0
    CMatrix ric34;                 // Chern ric3 + ric4
};
EinsteinResidual einstein_residual(const MetricJet& jet);

struct CurvatureReport {
    ChartPoint point;
    double t = 0.0;
    RicciForms ricci;
    TorsionDiagnostics torsion;
    ClassResiduals classes;
};

CurvatureReport curvature_report(const ModelManifold& man, const ChartPoint& p, double t);
std::string report_to_json(const std::vector<CurvatureReport>& reports, const std::string& manifold, int indent = 2);

}  // namespace hermcurv
