#include <catch2/catch.hpp>

#include "wielab/geometry.hpp"

using namespace wielab;

namespace {

AmbientPoint random_sphere_point(Rng& rng) {
    Vec3 p(rng.normal(), rng.normal(), rng.normal());
    while (p.norm() < 1e-3) p = Vec3(rng.normal(), rng.normal(), rng.normal());
    p.normalize();
    return AmbientPoint::sphere(p);
}

Vec3 random_tangent(Rng& rng, const AmbientPoint& p) {
    const Vec3 raw(rng.normal(), rng.normal(), rng.normal());
    return raw - raw.dot(p.coords) * p.coords;
}

// Geodesic ODE oracle: integrate gamma'' = -|v|^2 gamma with RK4.
Vec3 geodesic_ode(const Vec3& p, const Vec3& v) {
    const double speed2 = v.squaredNorm();
    Eigen::Matrix<double, 6, 1> y;
    y << p, v;
    const auto rhs = [&](const Eigen::Matrix<double, 6, 1>& s) {
        Eigen::Matrix<double, 6, 1> d;
        d.head<3>() = s.tail<3>();
        d.tail<3>() = -speed2 * s.head<3>();
        return d;
    };
    const int steps = 2000;
    const double h = 1.0 / steps;
    for (int k = 0; k < steps; ++k) {
        const auto k1 = rhs(y);
        const auto k2 = rhs(y + 0.5 * h * k1);
        const auto k3 = rhs(y + 0.5 * h * k2);
        const auto k4 = rhs(y + h * k3);
        y += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return y.head<3>();
}

// Spherical polygon area from the angle excess.
double polygon_area(const std::vector<AmbientPoint>& v) {
    const int n = static_cast<int>(v.size());
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const AmbientPoint& a = v[(i + n - 1) % n];
        const AmbientPoint& b = v[i];
        const AmbientPoint& c = v[(i + 1) % n];
        const Vec3 t1 = sphere_log(b, a).vec.normalized();
        const Vec3 t2 = sphere_log(b, c).vec.normalized();
        sum += std::acos(std::clamp(t1.dot(t2), -1.0, 1.0));
    }
    return sum - (n - 2) * M_PI;
}

}  // namespace

TEST_CASE("sphere_exp basic cases", "[geometry]") {
    const AmbientPoint pole = AmbientPoint::sphere(Vec3(0, 0, 1));
    CHECK((sphere_exp(pole, Vec3::Zero()).coords - pole.coords).norm() == 0.0);

    const AmbientPoint q = sphere_exp(pole, Vec3(M_PI / 2, 0, 0));
    CHECK((q.coords - Vec3(1, 0, 0)).norm() < 1e-15);

    const Vec3 v(0.3, 0.4, 0.0);
    const AmbientPoint r = sphere_exp(pole, v);
    const Vec3 expect = std::cos(0.5) * Vec3(0, 0, 1) + std::sin(0.5) * Vec3(0.6, 0.8, 0);
    CHECK((r.coords - expect).norm() < 1e-15);

    CHECK_THROWS_AS(sphere_exp(pole, Vec3(M_PI, 0, 0)), std::domain_error);
}

TEST_CASE("sphere_exp agrees with the geodesic ODE oracle", "[geometry]") {
    Rng rng(101);
    for (int trial = 0; trial < 25; ++trial) {
        const AmbientPoint p = random_sphere_point(rng);
        Vec3 v = random_tangent(rng, p);
        if (v.norm() > 3.0) v *= 3.0 / v.norm();
        const Vec3 ode = geodesic_ode(p.coords, v);
        CHECK((sphere_exp(p, v).coords - ode).norm() < 1e-10);
    }
}

TEST_CASE("sphere_log basic cases and inversion", "[geometry]") {
    const AmbientPoint pole = AmbientPoint::sphere(Vec3(0, 0, 1));
    CHECK(sphere_log(pole, pole).vec.norm() == 0.0);

    const AmbientPoint ex = AmbientPoint::sphere(Vec3(1, 0, 0));
    CHECK((sphere_log(pole, ex).vec - Vec3(M_PI / 2, 0, 0)).norm() < 1e-15);

    CHECK_THROWS_AS(sphere_log(pole, AmbientPoint::sphere(Vec3(0, 0, -1))), std::domain_error);

    Rng rng(55);
    for (int trial = 0; trial < 1000; ++trial) {
        const AmbientPoint p = random_sphere_point(rng);
        Vec3 v = random_tangent(rng, p);
        if (v.norm() > 3.0) v *= 3.0 / v.norm();
        const TangentVec back = sphere_log(p, sphere_exp(p, v));
        CHECK((back.vec - v).norm() <= 1e-12 * std::max(1.0, v.norm()));
    }
}

TEST_CASE("plane exp/log are affine", "[geometry]") {
    const AmbientPoint p = AmbientPoint::plane(0.5, -1.0);
    const AmbientPoint q = sphere_exp(p, Vec3(2, 3, 0));
    CHECK((q.coords - Vec3(2.5, 2.0, 0)).norm() == 0.0);
    CHECK((sphere_log(p, q).vec - Vec3(2, 3, 0)).norm() == 0.0);
}

TEST_CASE("parallel transport closed form", "[geometry]") {
    const AmbientPoint pole = AmbientPoint::sphere(Vec3(0, 0, 1));
    const AmbientPoint ex = AmbientPoint::sphere(Vec3(1, 0, 0));
    CHECK((parallel_transport(pole, ex, Vec3(0, 1, 0)) - Vec3(0, 1, 0)).norm() < 1e-15);
    CHECK((parallel_transport(pole, ex, Vec3(1, 0, 0)) - Vec3(0, 0, -1)).norm() < 1e-15);
}

TEST_CASE("parallel transport is a special-orthogonal map", "[geometry]") {
    Rng rng(77);
    for (int trial = 0; trial < 1000; ++trial) {
        const AmbientPoint p = random_sphere_point(rng);
        const AmbientPoint q = random_sphere_point(rng);
        if (sphere_angle(p, q) >= kAntipodalCutoff) continue;
        const Vec3 v = random_tangent(rng, p);
        const Vec3 w = parallel_transport(p, q, v);
        CHECK(std::abs(w.dot(q.coords)) <= 1e-12 * std::max(1.0, w.norm()));
        CHECK(std::abs(w.norm() - v.norm()) <= 1e-12 * std::max(1.0, v.norm()));
    }
    // frame representation has det +1 and orthogonal columns
    for (int trial = 0; trial < 100; ++trial) {
        const AmbientPoint p = random_sphere_point(rng);
        const AmbientPoint q = random_sphere_point(rng);
        if (sphere_angle(p, q) >= kAntipodalCutoff) continue;
        const Frame fp = orthonormal_frame(p);
        const Frame fq = orthonormal_frame(q);
        const Vec3 a = parallel_transport(p, q, fp.e1);
        const Vec3 b = parallel_transport(p, q, fp.e2);
        Mat2 rep;
        rep << fq.e1.dot(a), fq.e1.dot(b), fq.e2.dot(a), fq.e2.dot(b);
        CHECK((rep.transpose() * rep - Mat2::Identity()).norm() < 1e-12);
        CHECK(rep.determinant() == Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("two-point loop holonomy is the identity", "[geometry]") {
    const std::vector<AmbientPoint> loop = {AmbientPoint::sphere(Vec3(0, 0, 1)),
                                            AmbientPoint::sphere(Vec3(1, 0, 0))};
    const Holonomy h = loop_holonomy(loop);
    CHECK(h.deviation < 1e-14);
}

TEST_CASE("octant triangle holonomy", "[geometry]") {
    const std::vector<AmbientPoint> tri = {AmbientPoint::sphere(Vec3(1, 0, 0)),
                                           AmbientPoint::sphere(Vec3(0, 1, 0)),
                                           AmbientPoint::sphere(Vec3(0, 0, 1))};
    const Holonomy h = loop_holonomy(tri);
    CHECK(std::abs(h.angle) == Approx(M_PI / 2).epsilon(1e-12));
    CHECK(h.deviation == Approx(2.0).epsilon(1e-12));
}

TEST_CASE("holonomy deviation equals 2 sqrt2 |sin(area/2)| on geodesic polygons", "[geometry]") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const AmbientPoint base = random_sphere_point(rng);
        const Frame f = orthonormal_frame(base);
        const int n = 3 + static_cast<int>(rng.uniform() * 3.0);
        const double radius = rng.uniform(0.05, 0.6);
        std::vector<AmbientPoint> poly;
        std::vector<double> angles;
        for (int k = 0; k < n; ++k) angles.push_back(rng.uniform(0.0, 2 * M_PI));
        std::sort(angles.begin(), angles.end());
        bool distinct = true;
        for (int k = 0; k + 1 < n; ++k)
            if (angles[k + 1] - angles[k] < 0.3) distinct = false;
        if (!distinct) continue;  // keep the polygon convex and nondegenerate
        for (int k = 0; k < n; ++k) {
            const Vec3 dir = std::cos(angles[k]) * f.e1 + std::sin(angles[k]) * f.e2;
            poly.push_back(sphere_exp(base, radius * dir));
        }
        const double area = polygon_area(poly);
        const Holonomy h = loop_holonomy(poly);
        CHECK(h.deviation == Approx(2.0 * std::sqrt(2.0) * std::abs(std::sin(area / 2))).margin(1e-10));
    }
}

TEST_CASE("small-triangle holonomy obeys the isoperimetric perimeter bound", "[geometry]") {
    // equilateral triangles maximize deviation/perimeter^2; the constant is
    // close to 1/(8 sqrt 3)
    const AmbientPoint base = AmbientPoint::sphere(Vec3(0, 1, 0));
    const Frame f = orthonormal_frame(base);
    double max_ratio = 0.0;
    for (const double ell : {0.5, 0.25, 0.1, 0.05}) {
        std::vector<AmbientPoint> tri;
        for (int k = 0; k < 3; ++k) {
            const double a = 2.0 * M_PI * k / 3.0;
            // circumradius of an equilateral triangle of side ell/3
            const double rad = (ell / 3.0) / std::sqrt(3.0);
            tri.push_back(sphere_exp(base, rad * (std::cos(a) * f.e1 + std::sin(a) * f.e2)));
        }
        double perim = 0.0;
        for (int k = 0; k < 3; ++k) perim += sphere_angle(tri[k], tri[(k + 1) % 3]);
        const double ratio = loop_holonomy(tri).deviation / (perim * perim);
        max_ratio = std::max(max_ratio, ratio);
        CHECK(ratio == Approx(1.0 / (8.0 * std::sqrt(3.0))).epsilon(0.12));
    }
    CHECK(max_ratio <= 0.075);
}

TEST_CASE("loop_holonomy rejects repeated vertices", "[geometry]") {
    const AmbientPoint a = AmbientPoint::sphere(Vec3(1, 0, 0));
    const AmbientPoint b = AmbientPoint::sphere(Vec3(0, 1, 0));
    CHECK_THROWS_AS(loop_holonomy({a, a, b}), std::domain_error);
}

TEST_CASE("deterministic frame is orthonormal and oriented", "[geometry]") {
    Rng rng(13);
    for (int trial = 0; trial < 500; ++trial) {
        const AmbientPoint p = random_sphere_point(rng);
        const Frame f = orthonormal_frame(p);
        CHECK(std::abs(f.e1.norm() - 1.0) < 1e-14);
        CHECK(std::abs(f.e2.norm() - 1.0) < 1e-14);
        CHECK(std::abs(f.e1.dot(f.e2)) < 1e-14);
        CHECK(std::abs(f.e1.dot(p.coords)) < 1e-14);
        CHECK((f.e1.cross(f.e2) - p.coords).norm() < 1e-13);
    }
}
