#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "hermcurv/conformal.hpp"
#include "hermcurv/errors.hpp"
#include "hermcurv/golden.hpp"
#include "hermcurv/solvers.hpp"

using namespace hermcurv;

namespace {

enum Exit { kOk = 0, kUsage = 1, kPrecondition = 2, kConvergence = 3, kMismatch = 4 };

// Rows of doubles under named columns, emitted as text, csv or json.
struct Table {
    std::vector<std::string> cols;
    std::vector<std::vector<double>> rows;
};

void emit(const Table& t, const std::string& format, std::ostream& os) {
    if (format == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : t.rows) {
            nlohmann::json o;
            for (std::size_t c = 0; c < t.cols.size(); ++c) o[t.cols[c]] = r[c];
            arr.push_back(o);
        }
        os << nlohmann::json{{"schema_version", 1}, {"rows", arr}}.dump(2) << "\n";
        return;
    }
    os << std::setprecision(format == "csv" ? 17 : 10);
    const char* sep = format == "csv" ? "," : "  ";
    if (format == "csv") {
        for (std::size_t c = 0; c < t.cols.size(); ++c) os << (c ? "," : "") << t.cols[c];
        os << "\n";
    }
    for (const auto& r : t.rows) {
        for (std::size_t c = 0; c < t.cols.size(); ++c) {
            if (c) os << sep;
            if (format != "csv") os << t.cols[c] << "=";
            os << r[c];
        }
        os << "\n";
    }
}

struct ManifoldSpec {
    std::string name;
    int n = 2;
    std::vector<std::string> params;  // key=value

    ModelManifold load() const {
        std::map<std::string, double> p;
        for (const std::string& kv : params) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw Error("--param expects key=value, got '" + kv + "'");
            p[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
        }
        if (std::filesystem::exists(name)) {
            if (!p.empty()) throw Error("--param applies to builtins only; edit the manifest instead");
            return load_manifest(name);
        }
        return builtin_manifold(name, n, p);
    }
};

void add_manifold_options(CLI::App* app, ManifoldSpec& m, bool positional) {
    if (positional)
        app->add_option("manifold", m.name, "builtin name or manifest path")->required();
    else
        app->add_option("--manifold", m.name, "builtin name or manifest path")->required();
    app->add_option("--n", m.n, "complex dimension for hopf and flat-torus")->capture_default_str();
    app->add_option("--param", m.params, "catalog parameter override key=value (repeatable)");
}

std::vector<ChartPoint> sample_points(const ModelManifold& man, int count, std::uint64_t seed) {
    std::vector<ChartPoint> p;
    for (int k = 0; k < count; ++k) p.push_back(man.sample_point(seed + std::uint64_t(k)));
    return p;
}

void point_columns(Table& t, int n) {
    t.cols.push_back("point");
    for (int k = 1; k <= n; ++k) {
        t.cols.push_back("re_z" + std::to_string(k));
        t.cols.push_back("im_z" + std::to_string(k));
    }
}

void point_values(std::vector<double>& row, std::size_t idx, const ChartPoint& p) {
    row.push_back(double(idx));
    for (const cplx& c : p) {
        row.push_back(c.real());
        row.push_back(c.imag());
    }
}

// Output sink: the --out file when given, stdout otherwise.
struct Sink {
    std::ofstream file;
    std::ostream* os = &std::cout;
    explicit Sink(const std::string& path) {
        if (path.empty()) return;
        file.open(path);
        if (!file) throw Error("cannot open '" + path + "' for writing");
        os = &file;
    }
};

struct Common {
    std::string format = "text";
    std::string out;
    std::uint64_t seed = 1;
    int points = 10;
    std::vector<double> t{0.0};
    double tol = -1;
};

void add_output_options(CLI::App* app, Common& c) {
    app->add_option("--format", c.format, "text, csv or json")
        ->check(CLI::IsMember({"text", "csv", "json"}))
        ->capture_default_str();
    app->add_option("--out", c.out, "output file (default stdout)");
}

int cmd_inspect(const ManifoldSpec& ms, const Common& c, bool golden) {
    ModelManifold man = ms.load();
    const int n = man.n();
    std::vector<ChartPoint> pts = sample_points(man, c.points, c.seed);
    Sink sink(c.out);
    if (c.format == "json") {
        std::vector<CurvatureReport> reps;
        for (const ChartPoint& p : pts)
            for (double t : c.t) reps.push_back(curvature_report(man, p, t));
        *sink.os << report_to_json(reps, man.name()) << "\n";
    } else {
        Table tab;
        point_columns(tab, n);
        for (const char* s : {"t", "s1", "s2", "del_omega2", "del_star2", "delbar_star2", "kahler", "balanced",
                              "gauduchon", "pluriclosed"})
            tab.cols.push_back(s);
        for (int k = 1; k <= 4; ++k)
            for (int i = 1; i <= n; ++i)
                for (int j = 1; j <= n; ++j)
                    for (const char* part : {"re", "im"})
                        tab.cols.push_back("ric" + std::to_string(k) + "_" + std::to_string(i) + std::to_string(j) + "_" + part);
        for (std::size_t k = 0; k < pts.size(); ++k)
            for (double t : c.t) {
                CurvatureReport r = curvature_report(man, pts[k], t);
                std::vector<double> row;
                point_values(row, k, pts[k]);
                for (double v : {t, r.ricci.s1, r.ricci.s2, r.torsion.del_omega2, r.torsion.del_star2,
                                 r.torsion.delbar_star2, r.classes.kahler, r.classes.balanced, r.classes.gauduchon,
                                 r.classes.pluriclosed})
                    row.push_back(v);
                for (const CMatrix* M : {&r.ricci.ric1, &r.ricci.ric2, &r.ricci.ric3, &r.ricci.ric4})
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j) {
                            row.push_back((*M)(i, j).real());
                            row.push_back((*M)(i, j).imag());
                        }
                tab.rows.push_back(std::move(row));
            }
        emit(tab, c.format, *sink.os);
    }
    if (!golden) return kOk;
    GoldenResult g = golden_check(man, pts, c.tol > 0 ? c.tol : 1e-8);
    std::ostream& gs = c.out.empty() && c.format != "text" ? std::cerr : std::cout;
    gs << std::setprecision(12);
    for (const GoldenCheck& k : g.checks)
        gs << "golden " << (k.pass ? "PASS" : "FAIL") << "  " << k.quantity << "  expected=" << k.expected
           << "  got=" << k.got << "  defect=" << k.defect << "\n";
    gs << "golden " << man.name() << ": " << (g.pass() ? "PASS" : "FAIL") << "\n";
    return g.pass() ? kOk : kMismatch;
}

struct GridOptions {
    std::vector<int> grid{16};
    std::vector<double> periods;
    std::string scheme = "fd2";
    int threads = 1;
    bool collapse = false;
};

void add_grid_options(CLI::App* app, GridOptions& g, bool multi) {
    if (multi)
        app->add_option("--grid", g.grid, "points per real axis (comma list allowed)")->delimiter(',');
    else
        app->add_option("--grid", g.grid[0], "points per real axis")->capture_default_str();
    app->add_option("--periods", g.periods, "2n axis periods (x1,y1,...)")->delimiter(',');
    app->add_option("--scheme", g.scheme, "fd2 or spectral")->check(CLI::IsMember({"fd2", "spectral"}))->capture_default_str();
    app->add_option("--threads", g.threads, "worker threads for node loops")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_flag("--collapse-inactive", g.collapse, "drop real axes the metric does not depend on");
}

GridMetric make_grid_metric(const ModelManifold& man, const GridOptions& g, int N) {
    std::vector<bool> active;
    if (g.collapse) active = man.active_axes();
    auto grid = std::make_shared<const TorusGrid>(man.n(), N, g.periods, active);
    return GridMetric(man, grid, parse_scheme(g.scheme), g.threads);
}

// Smooth periodic test function on the active axes.
RVec duality_test_function(const TorusGrid& g, const std::vector<bool>& active) {
    RVec u(static_cast<Eigen::Index>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) {
        double v = 0;
        for (int a = 0; a < g.axes(); ++a)
            if (active.empty() || active[std::size_t(a)])
                v += std::cos(2 * M_PI * g.coord(i, a) / g.period(a) + 0.3 * a) / (1 + a);
        u(Eigen::Index(i)) = v;
    }
    return u;
}

int cmd_check(const std::string& kind, const ManifoldSpec& ms, const Common& c, const GridOptions& go,
              const std::string& factor_text) {
    ModelManifold man = ms.load();
    const int n = man.n();
    Table tab;
    double worst = 0.0, tol = c.tol;
    if (kind == "conformal") {
        if (tol <= 0) tol = 1e-7;
        std::string ftext = factor_text;
        if (ftext.empty()) ftext = man.domain().periodic ? "0.2*sin(2*pi*re(z1))*cos(2*pi*im(z2)) + 0.1" : "0.3*re(z1) + 0.1*abs2(z2)";
        Expr f = parse_expr(ftext, n);
        ModelManifold mf = conformal_manifold(man, f);
        ConformalFactor factor(f, n, man.params());
        std::vector<ChartPoint> pts = sample_points(man, c.points, c.seed);
        point_columns(tab, n);
        for (const char* s : {"t", "formula_s2", "direct_s2", "defect", "ric_defect"}) tab.cols.push_back(s);
        for (std::size_t k = 0; k < pts.size(); ++k) {
            MetricJet base = evaluate_metric_jet(man, pts[k]);
            MetricJet direct = evaluate_metric_jet(mf, pts[k]);
            ConformalFactorJet fj = factor.jet(pts[k]);
            for (double t : c.t) {
                TransformedCurvature tc = transformed_ric34(base, fj, t);
                RicciForms r = ricci_and_scalars(gauduchon_curvature(direct, t), direct);
                const double ric = std::max((tc.ric3 - r.ric3).cwiseAbs().maxCoeff(), (tc.ric4 - r.ric4).cwiseAbs().maxCoeff());
                std::vector<double> row;
                point_values(row, k, pts[k]);
                for (double v : {t, tc.s2, r.s2, std::abs(tc.s2 - r.s2), ric}) row.push_back(v);
                worst = std::max({worst, std::abs(tc.s2 - r.s2), ric});
                tab.rows.push_back(std::move(row));
            }
        }
    } else if (kind == "comparison") {
        if (tol <= 0) tol = 1e-8;
        std::vector<ChartPoint> pts = sample_points(man, c.points, c.seed);
        point_columns(tab, n);
        tab.cols.push_back("t");
        tab.cols.push_back("defect");
        if (n == 2) tab.cols.push_back("defect_dim2");
        for (std::size_t k = 0; k < pts.size(); ++k) {
            MetricJet j = evaluate_metric_jet(man, pts[k]);
            for (double t : c.t) {
                ComparisonDefect d = scalar_comparison_defect(j, t);
                std::vector<double> row;
                point_values(row, k, pts[k]);
                row.push_back(t);
                row.push_back(std::abs(d.general));
                worst = std::max(worst, std::abs(d.general));
                if (n == 2) {
                    row.push_back(std::abs(d.dim2));
                    worst = std::max(worst, std::abs(d.dim2));
                }
                tab.rows.push_back(std::move(row));
            }
        }
    } else {
        if (tol <= 0) tol = 1e-9;
        tab.cols = {"grid", "defect", "order"};
        double prev = NAN;
        for (int N : go.grid) {
            GridMetric gm = make_grid_metric(man, go, N);
            const double d = laplacian_duality_defect(gm, duality_test_function(gm.grid(), man.active_axes()));
            tab.rows.push_back({double(N), d, std::isnan(prev) ? NAN : std::log2(prev / d)});
            prev = d;
            worst = std::max(worst, d);
        }
    }
    Sink sink(c.out);
    emit(tab, c.format, *sink.os);
    std::ostream& s = c.out.empty() && c.format != "text" ? std::cerr : std::cout;
    s << std::setprecision(6) << "check " << kind << " " << man.name() << ": max defect " << worst << " (tol " << tol
      << ") " << (worst < tol ? "PASS" : "FAIL") << "\n";
    return worst < tol ? kOk : kMismatch;
}

struct SolveOptions {
    double q = 0.0;
    std::string init = "zero";
    std::string field_csv;
    bool no_timing = false;
    int max_iter = 5000;
};

int cmd_solve(const std::string& method, const ManifoldSpec& ms, const Common& c, const GridOptions& go,
              const SolveOptions& so) {
    ModelManifold man = ms.load();
    GridMetric gm = make_grid_metric(man, go, go.grid[0]);
    SolverOptions opt;
    if (c.tol > 0) opt.tol = c.tol;
    opt.max_iter = so.max_iter;
    if (so.init == "random") {
        std::mt19937_64 rng(c.seed);
        std::uniform_real_distribution<double> U(-0.1, 0.1);
        opt.initial_guess = RVec(static_cast<Eigen::Index>(gm.size()));
        for (Eigen::Index i = 0; i < opt.initial_guess.size(); ++i) opt.initial_guess(i) = U(rng);
    }
    SolverReport rep;
    if (method == "chern-zero")
        rep = solve_chern_zero(gm, opt);
    else if (method == "chern-negative")
        rep = solve_chern_negative(gm, opt);
    else
        rep = bismut_yamabe_minimize(gm, YamabeConstants::make(man.n(), so.q), opt);
    rep.diagnostics["seed"] = double(c.seed);
    if (so.no_timing) rep.wall_time = 0.0;
    {
        Sink sink(c.out);
        *sink.os << solver_report_json(rep, gm) << "\n";
    }
    if (!so.field_csv.empty()) {
        std::ofstream f(so.field_csv);
        if (!f) throw Error("cannot open '" + so.field_csv + "' for writing");
        std::vector<std::pair<std::string, RVec>> fields{{"solution", rep.solution}};
        if (rep.conformal_factor.size()) fields.push_back({"conformal_factor", rep.conformal_factor});
        if (rep.scalar_field.size()) fields.push_back({"scalar_field", rep.scalar_field});
        write_csv(f, gm.grid(), fields);
    }
    std::ostream& s = c.out.empty() ? std::cerr : std::cout;
    s << std::setprecision(10) << method << " " << man.name() << " N=" << go.grid[0] << ": lambda=" << rep.lambda
      << " residual_linf=" << rep.residual_linf << " scalar_deviation=" << rep.scalar_deviation << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hermitian curvature toolkit: pointwise curvature, identity checks and conformal solvers"};
    app.require_subcommand(1);

    ManifoldSpec ms;
    Common com;
    GridOptions go;
    SolveOptions so;
    bool golden = false;
    std::string check_kind, method, factor;

    CLI::App* inspect = app.add_subcommand("inspect", "pointwise curvature report at sample points");
    add_manifold_options(inspect, ms, true);
    inspect->add_option("--points", com.points, "number of sample points")->check(CLI::PositiveNumber)->capture_default_str();
    inspect->add_option("--t", com.t, "Gauduchon parameters (comma list)")->delimiter(',');
    inspect->add_option("--seed", com.seed, "sample point seed")->capture_default_str();
    inspect->add_option("--tol", com.tol, "golden tolerance (default 1e-8)");
    inspect->add_flag("--golden", golden, "compare against stored reference values");
    add_output_options(inspect, com);

    CLI::App* check = app.add_subcommand("check", "identity defect tables");
    check->add_option("kind", check_kind, "conformal, comparison or duality")
        ->required()
        ->check(CLI::IsMember({"conformal", "comparison", "duality"}));
    add_manifold_options(check, ms, false);
    check->add_option("--t", com.t, "Gauduchon parameters (comma list)")->delimiter(',');
    check->add_option("--points", com.points, "number of sample points")->check(CLI::PositiveNumber)->capture_default_str();
    check->add_option("--seed", com.seed, "sample point seed")->capture_default_str();
    check->add_option("--tol", com.tol, "pass threshold (defaults 1e-7, 1e-8, 1e-9)");
    check->add_option("--factor", factor, "conformal factor expression in z1..zn");
    add_grid_options(check, go, true);
    add_output_options(check, com);

    CLI::App* solve = app.add_subcommand("solve", "conformal scalar curvature solvers on a torus grid");
    solve->add_option("method", method, "chern-zero, chern-negative or bismut")
        ->required()
        ->check(CLI::IsMember({"chern-zero", "chern-negative", "bismut"}));
    add_manifold_options(solve, ms, false);
    add_grid_options(solve, go, false);
    solve->add_option("--tol", com.tol, "residual tolerance (default 1e-8)");
    solve->add_option("--seed", com.seed, "seed for --init random")->capture_default_str();
    solve->add_option("--init", so.init, "continuity start: zero or random")->check(CLI::IsMember({"zero", "random"}));
    solve->add_option("--q", so.q, "Bismut exponent in (2, 2n/(n-1)); default N2");
    solve->add_option("--max-iter", so.max_iter, "iteration cap for the Bismut minimizer")->capture_default_str();
    solve->add_option("--field-csv", so.field_csv, "write solution fields per node as CSV");
    solve->add_flag("--no-timing", so.no_timing, "write wall_time as 0 for byte-reproducible reports");
    solve->add_option("--out", com.out, "report file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        if (*inspect) return cmd_inspect(ms, com, golden);
        if (*check) return cmd_check(check_kind, ms, com, go, factor);
        return cmd_solve(method, ms, com, go, so);
    } catch (const PreconditionError& e) {
        std::cerr << "precondition: " << e.what() << "\n";
        return kPrecondition;
    } catch (const ConvergenceError& e) {
        std::cerr << "no convergence: " << e.what() << "\n";
        return kConvergence;
    } catch (const ConsistencyError& e) {
        std::cerr << "consistency: " << e.what() << "\n";
        return kConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
}
