#include <doctest.h>

#include "hermcurv/conformal.hpp"
#include "hermcurv/errors.hpp"

using namespace hermcurv;

namespace {

std::vector<ChartPoint> samples(const ModelManifold& m, int count, std::uint64_t seed = 3) {
    std::vector<ChartPoint> p;
    for (int k = 0; k < count; ++k) p.push_back(m.sample_point(seed + std::uint64_t(k)));
    return p;
}

// Periodic real factors on the unit torus (x = re z, y = im z).
const char* torus_factors[] = {
    "0.3*cos(2*pi*re(z1))",
    "0.2*sin(2*pi*re(z1))*cos(2*pi*im(z2)) + 0.1",
    "0.25*cos(2*pi*(re(z1)+im(z1)))*sin(2*pi*re(z2))",
    "0.15*sin(2*pi*im(z1)) - 0.1*cos(4*pi*re(z2))",
    "0.1*cos(2*pi*re(z2))*cos(2*pi*im(z2)) + 0.2*sin(2*pi*re(z1))",
};

// Factors for non-compact charts.
const char* chart_factors[] = {
    "0.3*re(z1)",
    "0.2*im(z2) + 0.1*pow(re(z1),2)",
    "0.1*abs2(z1) - 0.2*re(z2)",
    "0.25*sin(re(z1))*cos(im(z2))",
    "0.05*abs2(z2) + 0.1*im(z1)",
};

}  // namespace

TEST_CASE("factor jets and validation") {
    ConformalFactor f(parse_expr("abs2(z1) + re(z2)", 2), 2);
    ConformalFactorJet j = f.jet({cplx(1, 2), cplx(3, -1)});
    CHECK(j.f == doctest::Approx(8.0));
    CHECK(std::abs(j.df[0] - cplx(1, -2)) < 1e-14);
    CHECK(std::abs(j.df[1] - 0.5) < 1e-14);
    CHECK(std::abs(j.ddf(0, 0) - 1.0) < 1e-14);
    CHECK(std::abs(j.ddf(1, 1)) < 1e-14);
    CHECK_THROWS_AS(ConformalFactor(parse_expr("z1", 2), 2), Error);
    CHECK_THROWS_AS(ConformalFactor(parse_expr("a*re(z1)", 2, {"a"}), 2), Error);
    CHECK_NOTHROW(ConformalFactor(parse_expr("a*re(z1)", 2, {"a"}), 2, {{"a", 2.0}}));
}

TEST_CASE("conformal_manifold jets") {
    ModelManifold h = builtin_manifold("hopf", 2);
    ModelManifold same = conformal_manifold(h, Expr());
    for (const ChartPoint& p : samples(h, 10)) {
        MetricJet a = evaluate_metric_jet(h, p), b = evaluate_metric_jet(same, p);
        CHECK((a.h - b.h).cwiseAbs().maxCoeff() == 0.0);
        for (std::size_t k = 0; k < a.ddh_data.size(); ++k) CHECK(a.ddh_data[k] == b.ddh_data[k]);
    }
    // e^{log|z|^2} (4/|z|^2) delta = 4 delta
    ModelManifold flat = conformal_manifold(h, parse_expr("log(abs2(z1)+abs2(z2))", 2));
    for (const ChartPoint& p : samples(h, 20)) {
        for (MetricJet j : {flat.jet_closed_form(p), flat.jet_from_expr(p)}) {
            CHECK((j.h - 4.0 * CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
            for (auto z : j.dh_data) CHECK(std::abs(z) < 1e-11);
            for (auto z : j.ddh_data) CHECK(std::abs(z) < 1e-10);
        }
    }
    // closed-form product rule agrees with symbolic exp(f) h
    ModelManifold t = builtin_manifold("skt-bump");
    ModelManifold tf = conformal_manifold(t, parse_expr(torus_factors[2], 2));
    for (const ChartPoint& p : samples(t, 20)) {
        MetricJet a = tf.jet_closed_form(p), b = tf.jet_from_expr(p);
        double err = (a.h - b.h).cwiseAbs().maxCoeff();
        for (std::size_t k = 0; k < a.dh_data.size(); ++k) err = std::max(err, std::abs(a.dh_data[k] - b.dh_data[k]));
        for (std::size_t k = 0; k < a.ddh_data.size(); ++k) err = std::max(err, std::abs(a.ddh_data[k] - b.ddh_data[k]));
        CHECK(err < 1e-11);
    }
}

TEST_CASE("constant factor scales S2 and leaves Ric3 unchanged") {
    ModelManifold m = builtin_manifold("inoue1");
    ConformalFactor c(Expr::constant(0.7), 2);
    for (const ChartPoint& p : samples(m, 10)) {
        MetricJet j = evaluate_metric_jet(m, p);
        ConformalFactorJet fj = c.jet(p);
        for (double t : {0.0, 0.5, 1.0}) {
            RicciForms r = ricci_and_scalars(gauduchon_curvature(j, t), j);
            CHECK(transformed_s2(j, fj, t) == doctest::Approx(std::exp(-0.7) * r.s2).epsilon(1e-14));
            CHECK((transformed_ric34(j, fj, t).ric3 - r.ric3).cwiseAbs().maxCoeff() < 1e-14);
        }
    }
}

TEST_CASE("t=0 and t=1 specializations agree bit for bit") {
    for (const char* name : {"hopf", "elliptic", "skt-bump", "inoue2"}) {
        ModelManifold m = builtin_manifold(name);
        ConformalFactor f(parse_expr(m.domain().periodic ? torus_factors[1] : chart_factors[2], 2), 2);
        for (const ChartPoint& p : samples(m, 10)) {
            MetricJet j = evaluate_metric_jet(m, p);
            ConformalFactorJet fj = f.jet(p);
            CHECK(transformed_s2(j, fj, 0.0) == transformed_s2_chern(j, fj));
            CHECK(transformed_s2(j, fj, 1.0) == transformed_s2_bismut(j, fj));
        }
    }
}

TEST_CASE("Chern-Ricci shift at t=0 is -i ddbar f") {
    ModelManifold m = builtin_manifold("elliptic");
    ConformalFactor f(parse_expr(chart_factors[3], 2), 2);
    for (const ChartPoint& p : samples(m, 10)) {
        MetricJet j = evaluate_metric_jet(m, p);
        ConformalFactorJet fj = f.jet(p);
        RicciForms r = ricci_and_scalars(chern_curvature(j), j);
        CHECK((transformed_ric34(j, fj, 0.0).ric3 - (r.ric3 - fj.ddf)).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("formula path matches direct recomputation") {
    std::vector<ModelManifold> mans{builtin_manifold("hopf", 2), builtin_manifold("inoue1"),
                                    builtin_manifold("inoue2", 2, {{"m", 1}}), builtin_manifold("skt-bump"),
                                    builtin_manifold("kaehler-bump-scaled")};
    for (const ModelManifold& m : mans)
        for (int k = 0; k < 5; ++k) {
            Expr f = parse_expr(m.domain().periodic ? torus_factors[k] : chart_factors[k], 2);
            for (double t : {0.0, 0.5, 1.0, -1.0}) {
                OracleDefect d = conformal_oracle_check(m, f, t, samples(m, 20, 100 + std::uint64_t(k)));
                CHECK_MESSAGE(d.s2 < 1e-7, m.name() << " f" << k << " t=" << t);
                CHECK_MESSAGE(d.ric < 1e-7, m.name() << " f" << k << " t=" << t);
            }
        }
    ModelManifold h3 = builtin_manifold("hopf", 3);
    CHECK(conformal_oracle_check(h3, parse_expr("0.2*re(z1) + 0.1*abs2(z3)", 3), 1.0, samples(h3, 10)).max() < 1e-7);
    CHECK(conformal_oracle_check(h3, Expr(), 0.4, samples(h3, 5)).max() < 1e-12);
}
