#include <catch2/catch.hpp>
#include <sstream>

#include "wielab/fields.hpp"
#include "wielab/generators.hpp"

using namespace wielab;

namespace {

ChartGrid sphere_grid(int n, double th0 = 0.97, double th1 = 2.17, double ph0 = 0.0, double ph1 = 1.6) {
    ChartGrid g;
    g.chart = Chart::Spherical;
    g.u0 = th0;
    g.u1 = th1;
    g.v0 = ph0;
    g.v1 = ph1;
    g.nu = g.nv = n;
    g.validate();
    return g;
}

ChartGrid plane_grid(int n, double x0 = 0.0, double x1 = 1.0, double y0 = 0.0, double y1 = 1.0) {
    ChartGrid g;
    g.chart = Chart::Cartesian;
    g.u0 = x0;
    g.u1 = x1;
    g.v0 = y0;
    g.v1 = y1;
    g.nu = g.nv = n;
    g.validate();
    return g;
}

}  // namespace

TEST_CASE("grid validation", "[fields]") {
    ChartGrid g = plane_grid(8);
    g.nu = 4;
    CHECK_THROWS_AS(g.validate(), ConfigError);

    ChartGrid s = sphere_grid(8);
    s.u0 = 0.05;
    CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("chart geometry of the sphere grid", "[fields]") {
    const ChartGrid g = sphere_grid(16);
    for (int i : {0, 7, 15})
        for (int j : {0, 5, 15}) {
            const AmbientPoint p = g.point(i, j);
            CHECK(std::abs(p.coords.norm() - 1.0) < 1e-14);
            Vec3 tu, tv;
            g.chart_basis(i, j, tu, tv);
            // Gram matrix of the basis equals the analytic chart metric
            const Mat2 m = g.metric(i, j);
            CHECK(std::abs(tu.squaredNorm() - m(0, 0)) < 1e-14);
            CHECK(std::abs(tu.dot(tv) - m(0, 1)) < 1e-14);
            CHECK(std::abs(tv.squaredNorm() - m(1, 1)) < 1e-14);
            // chart components round-trip through the ambient representation
            const Vec2 c(0.7, -0.3);
            CHECK((chart_components(g, i, j, ambient_vector(g, i, j, c)) - c).norm() < 1e-13);
        }
}

TEST_CASE("field validation catches contract violations", "[fields]") {
    const ChartGrid g = sphere_grid(8);
    TwoTensorField t = TwoTensorField::zeros(g);
    t.values[3](0, 1) = 1.0;  // asymmetric
    CHECK_THROWS_AS(t.validate(), std::domain_error);

    MetricField m = chart_metric_field(g);
    m.values[5] = -m.values[5];
    CHECK_THROWS_AS(m.validate(), std::domain_error);

    VectorField u = VectorField::zeros(g);
    u.values[2] = g.point(0, 2).coords;  // radial, not tangent
    CHECK_THROWS_AS(u.validate(), std::domain_error);

    ConfigurationField f = inclusion_field(g);
    f.values[1] *= 1.5;
    CHECK_THROWS_AS(f.validate(), std::domain_error);
}

TEST_CASE("metric contracted with itself integrates to twice the volume", "[fields]") {
    const ChartGrid g = sphere_grid(24);
    const MetricField s = chart_metric_field(g);
    TwoTensorField st = TwoTensorField::zeros(g);
    st.values = s.values;
    CHECK(l2_inner(st, st, s) == Approx(2.0 * volume(s)).epsilon(1e-14));
}

TEST_CASE("l2_inner is symmetric on seeded fields", "[fields]") {
    const ChartGrid g = sphere_grid(12);
    const MetricField s = chart_metric_field(g);
    HSpec ha, hb;
    ha.seed = 3;
    hb.seed = 9;
    const TwoTensorField a = make_h(ha, s);
    const TwoTensorField b = make_h(hb, s);
    CHECK(l2_inner(a, b, s) == Approx(l2_inner(b, a, s)).epsilon(1e-14));
    CHECK(l2_inner(a, a, s) > 0.0);
}

TEST_CASE("quadrature volume matches the closed-form spherical zone area", "[fields]") {
    const double exact = (std::cos(0.97) - std::cos(2.17)) * 1.6;
    double prev_err = 0.0;
    for (int n : {24, 48}) {
        const MetricField s = chart_metric_field(sphere_grid(n));
        const double err = std::abs(volume(s) - exact);
        if (n == 24) {
            prev_err = err;
            CHECK(err < 1e-3 * exact);
        } else {
            const double order = std::log2(prev_err / err);
            CHECK(order > 1.9);
        }
    }
}

TEST_CASE("quadrature integrates bilinear chart integrands exactly", "[fields]") {
    const ChartGrid g = plane_grid(9, 0.0, 2.0, 0.0, 3.0);
    const MetricField s = chart_metric_field(g);
    TwoTensorField a = TwoTensorField::zeros(g), b = TwoTensorField::zeros(g);
    Mat2 m1, m2;
    m1 << 1.0, 0.25, 0.25, -0.5;
    m2 << 0.75, -1.0, -1.0, 2.0;
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            a.at(i, j) = (0.3 + 0.7 * g.u(i)) * m1;
            b.at(i, j) = (-0.2 + 0.4 * g.v(j)) * m2;
        }
    // integral of (0.3 + 0.7u)(-0.2 + 0.4v) tr(m1 m2) over [0,2]x[0,3]
    const double iu = 0.3 * 2.0 + 0.7 * 2.0;        // int over u
    const double iv = -0.2 * 3.0 + 0.4 * 4.5;       // int over v
    const double exact = iu * iv * (m1 * m2).trace();
    CHECK(l2_inner(a, b, s) == Approx(exact).epsilon(1e-13));
}

TEST_CASE("seeded h generators are symmetric, normalized and keep s + eps h SPD", "[fields]") {
    const ChartGrid g = sphere_grid(16);
    const MetricField s = chart_metric_field(g);
    for (const HGenerator gen : {HGenerator::ConformalTrig, HGenerator::Bump, HGenerator::DefRange,
                                 HGenerator::Trig}) {
        HSpec spec;
        spec.generator = gen;
        spec.amplitude = 0.4;
        spec.seed = 21;
        const TwoTensorField h = make_h(spec, s);
        h.validate();
        CHECK(relative_sup(h, s) == Approx(0.4).epsilon(1e-10));
        const MetricField geps = perturbed_metric(s, h, 0.2);  // validates SPD internally
        CHECK(geps.values.size() == h.values.size());
    }
    HSpec conf;
    conf.generator = HGenerator::ConformalConst;
    conf.amplitude = 2.0;
    const TwoTensorField h2s = make_h(conf, s);
    for (int n = 0; n < g.num_nodes(); ++n) CHECK((h2s.values[n] - 2.0 * s.values[n]).norm() < 1e-14);
}

TEST_CASE("seeded u generator hits the requested amplitude and is tangent", "[fields]") {
    const ChartGrid g = sphere_grid(16);
    USpec spec;
    spec.amplitude = 0.25;
    spec.seed = 4;
    const VectorField u = make_u(spec, g);
    u.validate();
    double sup = 0.0;
    for (const Vec3& w : u.values) sup = std::max(sup, w.norm());
    CHECK(sup == Approx(0.25).epsilon(1e-12));
}

TEST_CASE("killing fields are tangent and the plane basis spans translations+rotation", "[fields]") {
    const ChartGrid g = sphere_grid(12);
    for (const VectorField& k : killing_fields(g)) k.validate();
    const ChartGrid p = plane_grid(8, -1.0, 1.0, -1.0, 1.0);
    const auto kf = killing_fields(p);
    CHECK((kf[0].at(3, 4) - Vec3(1, 0, 0)).norm() == 0.0);
    CHECK((kf[1].at(3, 4) - Vec3(0, 1, 0)).norm() == 0.0);
    const Vec3 q = p.point(3, 4).coords;
    CHECK((kf[2].at(3, 4) - Vec3(-q.y(), q.x(), 0)).norm() == 0.0);
}

TEST_CASE("field serialization format and 17-digit round trip", "[fields]") {
    const ChartGrid g = plane_grid(8);
    ScalarField f = ScalarField::zeros(g);
    f.values[11] = M_PI;
    std::ostringstream os;
    write_field(os, f);
    const std::string text = os.str();
    CHECK(text.find("# wielab field v1 kind=scalar chart=cartesian nu=8 nv=8") == 0);
    CHECK(text.find("# columns: node_index u v value") != std::string::npos);

    std::istringstream is(text);
    std::string line;
    std::getline(is, line);
    std::getline(is, line);
    int rows = 0;
    bool pi_roundtrip = false;
    while (std::getline(is, line)) {
        CHECK(line.back() != '\r');  // LF only
        std::istringstream row(line);
        int idx;
        double u, v, val;
        row >> idx >> u >> v >> val;
        if (idx == 11) pi_roundtrip = (val == M_PI);
        ++rows;
    }
    CHECK(rows == g.num_nodes());
    CHECK(pi_roundtrip);
}

TEST_CASE("grid mismatch is a usage error", "[fields]") {
    const MetricField s = chart_metric_field(sphere_grid(8));
    const TwoTensorField a = TwoTensorField::zeros(sphere_grid(8));
    const TwoTensorField b = TwoTensorField::zeros(sphere_grid(12));
    CHECK_THROWS_AS(l2_inner(a, b, s), std::invalid_argument);
}
