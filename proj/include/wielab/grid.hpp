#pragma once

#include <cmath>
#include <string>

#include "wielab/geometry.hpp"
#include "wielab/matrix2.hpp"

namespace wielab {

enum class Chart { Spherical, Cartesian };

// Uniform tensor-product grid in a single chart. Spherical charts use
// (u, v) = (theta, phi) with theta the polar angle; the pole-free band
// constraint keeps the chart metric uniformly nondegenerate. Cartesian charts
// use (u, v) = (x, y) on the Euclidean plane.
struct ChartGrid {
    Chart chart = Chart::Cartesian;
    double u0 = 0.0, u1 = 1.0;
    double v0 = 0.0, v1 = 1.0;
    int nu = 8, nv = 8;

    Ambient ambient() const {
        return chart == Chart::Spherical ? Ambient::UnitSphere : Ambient::EuclideanPlane;
    }
    int num_nodes() const { return nu * nv; }
    int index(int i, int j) const { return i * nv + j; }
    double du() const { return (u1 - u0) / (nu - 1); }
    double dv() const { return (v1 - v0) / (nv - 1); }
    double u(int i) const { return u0 + i * du(); }
    double v(int j) const { return v0 + j * dv(); }
    bool interior(int i, int j) const { return i > 0 && i < nu - 1 && j > 0 && j < nv - 1; }

    void validate() const {
        if (nu < 8 || nv < 8) throw ConfigError("ChartGrid: node counts must be >= 8");
        if (!(u0 < u1 && v0 < v1)) throw ConfigError("ChartGrid: empty coordinate range");
        if (chart == Chart::Spherical && (u0 < 0.2 || u1 > M_PI - 0.2))
            throw ConfigError("ChartGrid: spherical theta-range must lie within [0.2, pi - 0.2]");
    }

    // Embedding kappa of the chart point.
    AmbientPoint point(int i, int j) const {
        if (chart == Chart::Cartesian) return AmbientPoint::plane(u(i), v(j));
        const double t = u(i), p = v(j);
        return AmbientPoint{Ambient::UnitSphere,
                            Vec3(std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t))};
    }

    // Chart coordinate basis vectors d kappa / du, d kappa / dv at a node.
    void chart_basis(int i, int j, Vec3& tu, Vec3& tv) const {
        if (chart == Chart::Cartesian) {
            tu = Vec3(1, 0, 0);
            tv = Vec3(0, 1, 0);
            return;
        }
        const double t = u(i), p = v(j);
        tu = Vec3(std::cos(t) * std::cos(p), std::cos(t) * std::sin(p), -std::sin(t));
        tv = Vec3(-std::sin(t) * std::sin(p), std::sin(t) * std::cos(p), 0.0);
    }

    // Analytic chart metric (the Gram matrix of the chart basis).
    Mat2 metric(int i, int j) const {
        Mat2 m = Mat2::Identity();
        if (chart == Chart::Spherical) {
            const double s = std::sin(u(i));
            m(1, 1) = s * s;
        }
        return m;
    }

    // Closed-form Christoffel symbols of the chart metric: Gamma^upper_{jk}.
    Mat2 christoffel_analytic(int i, int upper) const {
        Mat2 m = Mat2::Zero();
        if (chart == Chart::Spherical) {
            const double t = u(i);
            if (upper == 0)
                m(1, 1) = -std::sin(t) * std::cos(t);
            else
                m(0, 1) = m(1, 0) = std::cos(t) / std::sin(t);
        }
        return m;
    }

    // Trapezoid weight times the chart cell area (metric factor not included).
    double cell_weight(int i, int j) const {
        const double wu = (i == 0 || i == nu - 1) ? 0.5 : 1.0;
        const double wv = (j == 0 || j == nv - 1) ? 0.5 : 1.0;
        return wu * wv * du() * dv();
    }

    bool operator==(const ChartGrid&) const = default;
};

// Ambient tangent-vector -> chart components, via the analytic Gram matrix.
inline Vec2 chart_components(const ChartGrid& g, int i, int j, const Vec3& w) {
    Vec3 tu, tv;
    g.chart_basis(i, j, tu, tv);
    const Vec2 rhs(w.dot(tu), w.dot(tv));
    return g.metric(i, j).inverse() * rhs;
}

inline Vec3 ambient_vector(const ChartGrid& g, int i, int j, const Vec2& c) {
    Vec3 tu, tv;
    g.chart_basis(i, j, tu, tv);
    return c(0) * tu + c(1) * tv;
}

}  // namespace wielab
