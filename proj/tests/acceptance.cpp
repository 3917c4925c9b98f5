// Acceptance gate: one PASS/FAIL line per criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "hermcurv/conformal.hpp"
#include "hermcurv/errors.hpp"
#include "hermcurv/golden.hpp"
#include "hermcurv/solvers.hpp"

using namespace hermcurv;

namespace {

using Clock = std::chrono::steady_clock;
const double tp = 2 * M_PI;
int failures = 0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

// Runs a criterion, times it, and prints one line.
void criterion(const std::string& id, const std::string& text, double time_limit, const std::function<Outcome()>& body) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (secs > time_limit) {
        o.pass = false;
        o.detail += "; over time limit";
    }
    if (!o.pass) ++failures;
    std::printf("%s  %-5s %s  [%s; %.2fs]\n", o.pass ? "PASS" : "FAIL", id.c_str(), text.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

std::vector<ChartPoint> samples(const ModelManifold& m, int count, std::uint64_t seed = 11) {
    std::vector<ChartPoint> p;
    for (int k = 0; k < count; ++k) p.push_back(m.sample_point(seed + std::uint64_t(k)));
    return p;
}

GridPtr make_grid(int n, int N, std::vector<bool> active = {}) {
    return std::make_shared<const TorusGrid>(n, N, std::vector<double>{}, std::move(active));
}

RVec sample_real(const GridPtr& g, const std::function<double(const ChartPoint&)>& f) {
    RVec v(static_cast<Eigen::Index>(g->size()));
    for (std::size_t i = 0; i < g->size(); ++i) v(Eigen::Index(i)) = f(g->point(i));
    return v;
}

double linf(const RVec& v) { return v.cwiseAbs().maxCoeff(); }

// max over points of |probe - expected|
double worst(const ModelManifold& m, const std::vector<ChartPoint>& pts,
             const std::function<double(const ChartPoint&, const MetricJet&, const RicciForms&)>& probe) {
    double w = 0;
    for (const ChartPoint& p : pts) {
        MetricJet j = evaluate_metric_jet(m, p);
        RicciForms r = ricci_and_scalars(chern_curvature(j), j);
        w = std::max(w, std::abs(probe(p, j, r)));
    }
    return w;
}

Outcome below(double value, double tol, const std::string& what) { return {value < tol, what + " " + fmt(value) + " (tol " + fmt(tol) + ")"}; }

const char* torus_factors[] = {
    "0.3*cos(2*pi*re(z1))",
    "0.2*sin(2*pi*re(z1))*cos(2*pi*im(z2)) + 0.1",
    "0.25*cos(2*pi*(re(z1)+im(z1)))*sin(2*pi*re(z2))",
    "0.15*sin(2*pi*im(z1)) - 0.1*cos(4*pi*re(z2))",
    "0.1*cos(2*pi*re(z2))*cos(2*pi*im(z2)) + 0.2*sin(2*pi*re(z1))",
};
const char* chart_factors[] = {
    "0.3*re(z1)",
    "0.2*im(z2) + 0.1*pow(re(z1),2)",
    "0.1*abs2(z1) - 0.2*re(z2)",
    "0.25*sin(re(z1))*cos(im(z2))",
    "0.05*abs2(z2) + 0.1*im(z1)",
};

std::vector<ModelManifold> all_builtins() {
    return {builtin_manifold("hopf", 2),
            builtin_manifold("hopf", 3),
            builtin_manifold("elliptic"),
            builtin_manifold("inoue1"),
            builtin_manifold("inoue2", 2, {{"m", 0.0}}),
            builtin_manifold("inoue2", 2, {{"m", 1.0}}),
            builtin_manifold("inoue2", 2, {{"m", 2.0}}),
            builtin_manifold("flat-torus", 2),
            builtin_manifold("kaehler-bump"),
            builtin_manifold("skt-bump"),
            builtin_manifold("kaehler-bump-scaled")};
}

void golden_values() {
    const double tol = 1e-8;
    ModelManifold h2 = builtin_manifold("hopf", 2), h3 = builtin_manifold("hopf", 3);
    auto pts = samples(h2, 100);
    criterion("1.1", "Hopf n=2: S_C^(1) = 1/2, S_C^(2) = 1/4", 1.0, [&] {
        double w = std::max(worst(h2, pts, [](auto&, auto&, auto& r) { return r.s1 - 0.5; }),
                            worst(h2, pts, [](auto&, auto&, auto& r) { return r.s2 - 0.25; }));
        return below(w, tol, "max defect");
    });
    criterion("1.2", "Hopf n=2: Theta^(2) = (1/4) omega_h", 1.0, [&] {
        return below(worst(h2, pts, [](auto&, auto& j, auto& r) {
                         return (r.ric2 - 0.25 * j.h).cwiseAbs().maxCoeff() / j.h.cwiseAbs().maxCoeff();
                     }),
                     tol, "max relative defect");
    });
    // (delta_ij |z|^2 - z^i zbar^j) / |z|^4 as stated, entry (i, j), at 100 random points
    auto literal = [](const ChartPoint& z, bool transpose) {
        const int n = int(z.size());
        double r2 = 0;
        for (const cplx& c : z) r2 += std::norm(c);
        CMatrix M(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const cplx zz = transpose ? std::conj(z[std::size_t(i)]) * z[std::size_t(j)]
                                          : z[std::size_t(i)] * std::conj(z[std::size_t(j)]);
                M(i, j) = ((i == j ? r2 : 0.0) - zz) / (r2 * r2);
            }
        return std::pair<CMatrix, double>(M, r2);
    };
    criterion("1.3", "Hopf n=2: Theta^(3) = Theta^(4) = (delta_ij|z|^2 - z^i zbar^j)/|z|^4", 1.0, [&] {
        double lit = 0, tr = 0, eq34 = 0;
        for (const ChartPoint& p : pts) {
            MetricJet j = evaluate_metric_jet(h2, p);
            RicciForms r = ricci_and_scalars(chern_curvature(j), j);
            auto [M, r2] = literal(p, false);
            auto [T, r2b] = literal(p, true);
            lit = std::max(lit, (r.ric3 - M).cwiseAbs().maxCoeff() * r2);
            tr = std::max(tr, (r.ric3 - T).cwiseAbs().maxCoeff() * r2b);
            eq34 = std::max(eq34, (r.ric4 - r.ric3).cwiseAbs().maxCoeff() * r2);
        }
        return Outcome{lit < tol && eq34 < tol, "stated matrix defect " + fmt(lit) + ", Theta^(4)-Theta^(3) " +
                                                    fmt(eq34) + ", transposed matrix defect " + fmt(tr)};
    });
    criterion("1.4", "Hopf n=3: S_C^(1) = 3/2, S_C^(2) = 1/2", 1.0, [&] {
        auto p3 = samples(h3, 100);
        double w = std::max(worst(h3, p3, [](auto&, auto&, auto& r) { return r.s1 - 1.5; }),
                            worst(h3, p3, [](auto&, auto&, auto& r) { return r.s2 - 0.5; }));
        return below(w, tol, "max defect");
    });
    ModelManifold el = builtin_manifold("elliptic"), in = builtin_manifold("inoue1");
    auto pe = samples(el, 100), pi = samples(in, 100);
    auto value_line = [&](const ModelManifold& m, const std::vector<ChartPoint>& p, double expected,
                          const std::function<double(const ChartPoint&, const MetricJet&, const RicciForms&)>& f) {
        const double w = worst(m, p, [&](auto& z, auto& j, auto& r) { return f(z, j, r) - expected; });
        const double got = f(p[0], evaluate_metric_jet(m, p[0]), [&] {
            MetricJet j = evaluate_metric_jet(m, p[0]);
            return ricci_and_scalars(chern_curvature(j), j);
        }());
        return Outcome{w < tol, "expected " + fmt(expected) + ", computed " + fmt(got) + ", max defect " + fmt(w)};
    };
    criterion("1.5", "Elliptic surface: S_C^(1) = -1/2", 1.0,
              [&] { return value_line(el, pe, -0.5, [](auto&, auto&, auto& r) { return r.s1; }); });
    criterion("1.6", "Elliptic surface: S_C^(2) = -3/2", 1.0,
              [&] { return value_line(el, pe, -1.5, [](auto&, auto&, auto& r) { return r.s2; }); });
    criterion("1.7", "Elliptic surface: Theta^(3) coefficient -3/(2y^2)", 1.0, [&] {
        return value_line(el, pe, -1.5, [](auto& z, auto&, auto& r) { return r.ric3(0, 0).real() * z[0].imag() * z[0].imag(); });
    });
    criterion("1.8", "Inoue S1: S_C^(1) = -1/4", 1.0,
              [&] { return value_line(in, pi, -0.25, [](auto&, auto&, auto& r) { return r.s1; }); });
    criterion("1.9", "Inoue S1: S_C^(2) = -5/4", 1.0,
              [&] { return value_line(in, pi, -1.25, [](auto&, auto&, auto& r) { return r.s2; }); });
    criterion("1.10", "Inoue S1: del del^* omega coefficient 1/y^2", 1.0, [&] {
        return value_line(in, pi, 1.0, [](auto& z, auto& j, auto&) {
            return torsion_diagnostics(j).ddstar(0, 0).real() * z[0].imag() * z[0].imag();
        });
    });
    criterion("1.11", "Inoue S2, m in {0,1,2}: S_C^(1) = -1/2", 1.0, [&] {
        double w = 0;
        for (double m : {0.0, 1.0, 2.0}) {
            ModelManifold m2 = builtin_manifold("inoue2", 2, {{"m", m}});
            w = std::max(w, worst(m2, samples(m2, 100), [](auto&, auto&, auto& r) { return r.s1 + 0.5; }));
        }
        return below(w, tol, "max defect");
    });
    criterion("1.12", "Inoue S2, m in {0,1,2}: S_C^(2) = -1 - m^2/2", 1.0, [&] {
        double w = 0;
        std::string got;
        for (double m : {0.0, 1.0, 2.0}) {
            ModelManifold m2 = builtin_manifold("inoue2", 2, {{"m", m}});
            auto p = samples(m2, 100);
            w = std::max(w, worst(m2, p, [m](auto&, auto&, auto& r) { return r.s2 + 1 + m * m / 2; }));
            MetricJet j = evaluate_metric_jet(m2, p[0]);
            got += (got.empty() ? "" : ", ") + fmt(ricci_and_scalars(chern_curvature(j), j).s2);
        }
        return Outcome{w < tol, "computed " + got + " for m = 0, 1, 2; max defect " + fmt(w)};
    });
}

void identity_suites() {
    criterion("2.1", "conformal oracle: formula vs direct < 1e-7 (5 metrics x 5 factors x 20 points x 4 t)", 30.0, [] {
        std::vector<ModelManifold> mans{builtin_manifold("hopf", 2), builtin_manifold("inoue1"),
                                        builtin_manifold("inoue2", 2, {{"m", 1}}), builtin_manifold("skt-bump"),
                                        builtin_manifold("kaehler-bump-scaled")};
        double w = 0;
        for (const ModelManifold& m : mans)
            for (int k = 0; k < 5; ++k) {
                Expr f = parse_expr(m.domain().periodic ? torus_factors[k] : chart_factors[k], 2);
                for (double t : {0.0, 0.5, 1.0, -1.0})
                    w = std::max(w, conformal_oracle_check(m, f, t, samples(m, 20, 100 + std::uint64_t(k))).max());
            }
        return below(w, 1e-7, "max defect");
    });
    criterion("2.2", "conformal specializations t=0 (Chern) and t=1 (Bismut) bit-consistent", 30.0, [] {
        int mismatches = 0, total = 0;
        for (const char* name : {"hopf", "elliptic", "inoue1", "skt-bump", "kaehler-bump-scaled"}) {
            ModelManifold m = builtin_manifold(name);
            for (int k = 0; k < 5; ++k) {
                ConformalFactor f(parse_expr(m.domain().periodic ? torus_factors[k] : chart_factors[k], 2), 2);
                for (const ChartPoint& p : samples(m, 20)) {
                    MetricJet j = evaluate_metric_jet(m, p);
                    ConformalFactorJet fj = f.jet(p);
                    mismatches += transformed_s2(j, fj, 0.0) != transformed_s2_chern(j, fj);
                    mismatches += transformed_s2(j, fj, 1.0) != transformed_s2_bismut(j, fj);
                    total += 2;
                }
            }
        }
        return Outcome{mismatches == 0, std::to_string(mismatches) + " of " + std::to_string(total) + " differ"};
    });
    criterion("2.3", "comparison identity defect < 1e-8 on all Gauduchon builtins, t in {-1,0,0.3,1,2}", 30.0, [] {
        double w = 0;
        int used = 0;
        for (const ModelManifold& m : all_builtins()) {
            if (!m.declared_gauduchon) continue;
            ++used;
            for (const ChartPoint& p : samples(m, 20, 70)) {
                MetricJet j = evaluate_metric_jet(m, p);
                for (double t : {-1.0, 0.0, 0.3, 1.0, 2.0}) {
                    ComparisonDefect d = scalar_comparison_defect(j, t);
                    w = std::max(w, std::abs(d.general));
                    if (j.n == 2) w = std::max(w, std::abs(d.dim2));
                }
            }
        }
        Outcome o = below(w, 1e-8, "max defect");
        o.detail += " over " + std::to_string(used) + " metrics";
        return o;
    });
    criterion("2.4", "two-path scalars (identity vs tensor trace) < 1e-7", 30.0, [] {
        double w = 0;
        for (const ModelManifold& m : all_builtins())
            for (const ChartPoint& p : samples(m, 20, 500)) {
                MetricJet j = evaluate_metric_jet(m, p);
                for (double t : {-1.0, 0.0, 0.3, 0.5, 1.0, 2.0}) {
                    RicciForms rf = ricci_and_scalars(gauduchon_curvature(j, t), j);
                    auto [s1, s2] = scalar_via_identity(j, t);
                    const double scale = std::max({1.0, std::abs(rf.s1), std::abs(rf.s2)});
                    w = std::max({w, std::abs(rf.s1 - s1) / scale, std::abs(rf.s2 - s2) / scale});
                }
            }
        return below(w, 1e-7, "max relative defect");
    });
    criterion("2.5", "Laplacian duality: fd2 defect order >= 1.8 over N = 8, 16, 32", 120.0, [] {
        ModelManifold m = builtin_manifold("skt-bump", 2, {{"sep", 1}});
        std::vector<double> d;
        for (int N : {8, 16, 32}) {
            GridPtr g = make_grid(2, N, {true, false, true, false});
            RVec u = sample_real(g, [](const ChartPoint& p) { return std::cos(tp * (p[0].real() - p[1].real())); });
            d.push_back(laplacian_duality_defect(GridMetric(m, g), u));
        }
        const double o1 = std::log2(d[0] / d[1]), o2 = std::log2(d[1] / d[2]);
        return Outcome{o1 >= 1.8 && o2 >= 1.8, "defects " + fmt(d[0]) + ", " + fmt(d[1]) + ", " + fmt(d[2]) +
                                                   "; orders " + fmt(o1) + ", " + fmt(o2)};
    });
}

void solver_criteria() {
    const std::vector<bool> sep{true, false, true, false};
    auto bump = [](const ChartPoint& p) {
        return std::sin(tp * p[0].real()) * std::cos(tp * p[1].real()) + 0.4 * std::cos(tp * p[1].real());
    };
    criterion("3.1", "manufactured zero case: L-inf recovery order >= 1.8 over N = 8, 16, 32", 120.0, [&] {
        ModelManifold m = builtin_manifold("skt-bump", 2, {{"sep", 1}});
        std::vector<double> e;
        for (int N : {8, 16, 32}) {
            GridPtr g = make_grid(2, N, sep);
            RVec fs = sample_real(g, bump);
            fs.array() -= fs.mean();
            RVec S = complex_laplacian(GridMetric(m, g, Scheme::Spectral), fs);
            e.push_back(linf(solve_zero_case(GridMetric(m, g), S).solution - fs));
        }
        const double o1 = std::log2(e[0] / e[1]), o2 = std::log2(e[1] / e[2]);
        return Outcome{o1 >= 1.8 && o2 >= 1.8, "errors " + fmt(e[0]) + ", " + fmt(e[1]) + ", " + fmt(e[2]) + "; orders " +
                                                   fmt(o1) + ", " + fmt(o2)};
    });
    criterion("3.2", "manufactured negative case (N=16): a reaches 1, residual < 1e-8, a-priori bound, uniqueness 1e-6",
              120.0, [&] {
                  ModelManifold m = builtin_manifold("skt-bump");
                  GridPtr g = make_grid(2, 16);
                  const double lambda = -4.0;
                  RVec fs = sample_real(g, [](const ChartPoint& p) {
                      return 0.3 + 0.1 * std::sin(tp * p[0].real()) * std::cos(tp * p[1].imag()) +
                             0.05 * std::cos(tp * p[1].real());
                  });
                  RVec S = complex_laplacian(GridMetric(m, g, Scheme::Spectral), fs) + (lambda * fs.array().exp()).matrix();
                  GridMetric gm(m, g);
                  SolverReport r = continuity_solve(gm, S, lambda);
                  std::mt19937_64 rng(5);
                  std::uniform_real_distribution<double> U(-0.1, 0.1);
                  SolverOptions opt;
                  opt.initial_guess = RVec(S.size());
                  for (Eigen::Index i = 0; i < S.size(); ++i) opt.initial_guess(i) = U(rng);
                  SolverReport r2 = continuity_solve(gm, S, lambda, opt);
                  const double slack = r.diagnostics.at("apriori_slack");
                  const double viol = std::max(r.diagnostics.at("apriori_lower_violation"), r.diagnostics.at("apriori_upper_violation"));
                  const double agree = linf(r.solution - r2.solution);
                  const bool ok = r.path_trace.back().a == 1.0 && r.residual_linf < 1e-8 && viol <= slack && agree < 1e-6;
                  return Outcome{ok, "final a " + fmt(r.path_trace.back().a) + ", residual " + fmt(r.residual_linf) +
                                         ", bound violation " + fmt(viol) + " (slack " + fmt(slack) + "), runs differ by " +
                                         fmt(agree) + ", recovery error " + fmt(linf(r.solution - fs))};
              });
    SolverReport neg;
    criterion("3.3", "end-to-end negative case (N=16): lambda equals independently quadratured Gamma^2/Vol to 1e-3", 120.0,
              [&] {
                  ModelManifold m = builtin_manifold("kaehler-bump-scaled");
                  GridMetric gm(m, make_grid(2, 16));
                  neg = solve_chern_negative(gm);
                  // midpoint rule on an offset N=20 lattice, directly from the analytic jets
                  const int M = 20;
                  double num = 0, den = 0;
                  for (int a = 0; a < M; ++a)
                      for (int b = 0; b < M; ++b)
                          for (int c = 0; c < M; ++c)
                              for (int d = 0; d < M; ++d) {
                                  ChartPoint p{cplx((a + 0.5) / M, (b + 0.5) / M), cplx((c + 0.5) / M, (d + 0.5) / M)};
                                  MetricJet j = evaluate_metric_jet(m, p);
                                  const double det = std::real(j.h.determinant());
                                  num += det * ricci_and_scalars(chern_curvature(j), j).s2;
                                  den += det;
                              }
                  const double ratio = num / den;
                  const double rel = std::abs(neg.lambda - ratio) / std::abs(ratio);
                  return Outcome{rel < 1e-3 && neg.scalar_deviation < 1e-8,
                                 "lambda " + fmt(neg.lambda) + ", quadrature " + fmt(ratio) + ", relative gap " + fmt(rel) +
                                     ", sup|S - lambda| " + fmt(neg.scalar_deviation)};
              });
    criterion("3.4", "end-to-end uniqueness: zero and random starts agree to 1e-6", 120.0, [&] {
        GridMetric gm(builtin_manifold("kaehler-bump-scaled"), make_grid(2, 16));
        SolverOptions opt;
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> U(-0.1, 0.1);
        opt.initial_guess = RVec(static_cast<Eigen::Index>(gm.size()));
        for (Eigen::Index i = 0; i < opt.initial_guess.size(); ++i) opt.initial_guess(i) = U(rng);
        SolverReport r2 = solve_chern_negative(gm, opt);
        return below(linf(r2.conformal_factor - neg.conformal_factor), 1e-6, "L-inf difference");
    });
    const YamabeConstants yc = YamabeConstants::make(2);
    criterion("3.5", "Bismut minimizer, flat torus: mu = 0 +- 1e-8, phi constant", 120.0, [&] {
        SolverReport r = bismut_yamabe_minimize(GridMetric(builtin_manifold("flat-torus"), make_grid(2, 16)), yc);
        const double spread = r.solution.maxCoeff() - r.solution.minCoeff();
        return Outcome{std::abs(r.lambda) < 1e-8 && spread < 1e-10, "mu " + fmt(r.lambda) + ", phi spread " + fmt(spread)};
    });
    SolverReport bis;
    GridMetric kb(builtin_manifold("kaehler-bump"), make_grid(2, 16));
    criterion("3.6", "Bismut minimizer, Kaehler bump (N=16): EL residual < 1e-6", 120.0, [&] {
        bis = bismut_yamabe_minimize(kb, yc);
        return below(bis.residual_linf, 1e-6, "EL residual");
    });
    criterion("3.7", "Bismut minimizer: mu within the stated upper and lower bounds", 1.0, [&] {
        const auto& d = bis.diagnostics;
        const bool ok = bis.lambda <= d.at("upper_bound_stated") && bis.lambda >= d.at("lower_bound_stated");
        return Outcome{ok, "mu " + fmt(bis.lambda) + ", upper " + fmt(d.at("upper_bound_stated")) + " (Y(1) " +
                               fmt(d.at("upper_bound_y1")) + "), lower " + fmt(d.at("lower_bound_stated")) +
                               " (Hoelder " + fmt(d.at("lower_bound_holder")) + ")"};
    });
    criterion("3.8", "Bismut minimizer: f agrees with the zero-case solver to 1e-3 after mean alignment", 120.0, [&] {
        SolverReport z = solve_chern_zero(kb);
        RVec fb = bis.conformal_factor.array() - bis.conformal_factor.mean();
        RVec fz = z.solution.array() - z.solution.mean();
        const double gap = linf(fb - fz);
        const double ratio = fz.norm() / fb.norm();
        return Outcome{gap < 1e-3, "max gap " + fmt(gap) + ", norm ratio |f_zero|/|f_bismut| " + fmt(ratio)};
    });
}

int run_cli(const std::string& cli, const std::string& args) {
    const int st = std::system((cli + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

void negative_controls(const std::string& cli) {
    criterion("4.1", "classify rejects Kaehler for Hopf and Inoue metrics with residual > 0.1", 5.0, [] {
        double least = INFINITY;
        bool rejected = true;
        for (const ModelManifold& m : {builtin_manifold("hopf", 2), builtin_manifold("hopf", 3), builtin_manifold("inoue1"),
                                       builtin_manifold("inoue2", 2, {{"m", 0.0}}), builtin_manifold("inoue2", 2, {{"m", 1.0}}),
                                       builtin_manifold("inoue2", 2, {{"m", 2.0}})}) {
            ClassFlags c = classify(m, samples(m, 20));
            rejected = rejected && !c.kahler.holds;
            least = std::min(least, c.kahler.residual);
        }
        return Outcome{rejected && least > 0.1, "smallest Kaehler residual " + fmt(least)};
    });
    criterion("4.2", "Einstein residual strictly positive for Inoue S1", 5.0, [] {
        ModelManifold in = builtin_manifold("inoue1");
        double least = INFINITY;
        for (const ChartPoint& p : samples(in, 20)) least = std::min(least, einstein_residual(evaluate_metric_jet(in, p)).residual);
        return Outcome{least > 0, "smallest residual " + fmt(least)};
    });
    criterion("4.3", "solve chern-negative refuses Gamma^2 >= 0 inputs with exit code 2", 60.0, [&] {
        if (cli.empty()) return Outcome{false, "CLI path not given"};
        const int a = run_cli(cli, "solve chern-negative --manifold flat-torus --grid 8");
        const int b = run_cli(cli, "solve chern-negative --manifold kaehler-bump --grid 8");
        bool lib = false;
        try {
            solve_chern_negative(GridMetric(builtin_manifold("flat-torus"), make_grid(2, 8)));
        } catch (const PreconditionError&) {
            lib = true;
        }
        return Outcome{a == 2 && b == 2 && lib, "exit codes " + std::to_string(a) + " (flat), " + std::to_string(b) +
                                                    " (Kaehler); library PreconditionError " + (lib ? "yes" : "no")};
    });
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    std::printf("1. reference values\n");
    golden_values();
    std::printf("2. identity suites\n");
    identity_suites();
    std::printf("3. solvers\n");
    solver_criteria();
    std::printf("4. negative controls\n");
    negative_controls(cli);
    std::printf("%d criterion line(s) failed\n", failures);
    return failures ? 1 : 0;
}
