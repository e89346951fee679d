#pragma once

#include <array>
#include <string>

#include "wielab/operators.hpp"

namespace wielab {

// Seeded smooth scalar on the chart box: a low-mode trigonometric series with
// 1/(1+m^2+n^2) spectral decay and top frequency max_mode*pi/length. Closed
// form, so differentiable oracles exist.
class TrigScalar {
public:
    TrigScalar(Rng& rng, int max_mode) : max_mode_(max_mode) {
        for (int m = 0; m <= max_mode; ++m)
            for (int n = 0; n <= max_mode; ++n) {
                const double decay = 1.0 / (1.0 + m * m + n * n);
                a_[m][n] = rng.normal() * decay;
                b_[m][n] = (m >= 1 && n >= 1) ? rng.normal() * decay : 0.0;
            }
    }

    double operator()(const ChartGrid& g, double u, double v) const {
        const double x = (u - g.u0) / (g.u1 - g.u0);
        const double y = (v - g.v0) / (g.v1 - g.v0);
        double acc = 0.0;
        for (int m = 0; m <= max_mode_; ++m)
            for (int n = 0; n <= max_mode_; ++n)
                acc += a_[m][n] * std::cos(M_PI * m * x) * std::cos(M_PI * n * y) +
                       b_[m][n] * std::sin(M_PI * m * x) * std::sin(M_PI * n * y);
        return acc;
    }

    // closed-form partials with respect to the physical chart coordinates
    double du(const ChartGrid& g, double u, double v) const {
        const double x = (u - g.u0) / (g.u1 - g.u0);
        const double y = (v - g.v0) / (g.v1 - g.v0);
        double acc = 0.0;
        for (int m = 0; m <= max_mode_; ++m)
            for (int n = 0; n <= max_mode_; ++n)
                acc += M_PI * m *
                       (-a_[m][n] * std::sin(M_PI * m * x) * std::cos(M_PI * n * y) +
                        b_[m][n] * std::cos(M_PI * m * x) * std::sin(M_PI * n * y));
        return acc / (g.u1 - g.u0);
    }
    double dv(const ChartGrid& g, double u, double v) const {
        const double x = (u - g.u0) / (g.u1 - g.u0);
        const double y = (v - g.v0) / (g.v1 - g.v0);
        double acc = 0.0;
        for (int m = 0; m <= max_mode_; ++m)
            for (int n = 0; n <= max_mode_; ++n)
                acc += M_PI * n *
                       (-a_[m][n] * std::cos(M_PI * m * x) * std::sin(M_PI * n * y) +
                        b_[m][n] * std::sin(M_PI * m * x) * std::cos(M_PI * n * y));
        return acc / (g.v1 - g.v0);
    }

private:
    int max_mode_;
    double a_[4][4] = {};
    double b_[4][4] = {};
};

enum class HGenerator { ConformalConst, ConformalTrig, Bump, DefRange, LieAnalytic, Trig };

struct HSpec {
    HGenerator generator = HGenerator::Trig;
    double amplitude = 0.3;  // s-relative sup norm (max spectral radius of s^{-1} h)
    std::uint64_t seed = 1;
    int max_mode = 2;

    bool operator==(const HSpec&) const = default;

    void validate() const {
        if (!(amplitude > 0.0)) throw ConfigError("HSpec: amplitude must be positive");
        if (max_mode < 0 || max_mode > 3) throw ConfigError("HSpec: max_mode must be in [0, 3]");
    }
};

enum class UGenerator { Trig, Killing };

struct USpec {
    UGenerator generator = UGenerator::Trig;
    double amplitude = 0.3;  // pointwise sup of |u|_s
    std::uint64_t seed = 1;
    int max_mode = 2;
    int killing_index = 2;  // which generator, when generator == Killing

    bool operator==(const USpec&) const = default;

    void validate() const {
        if (!(amplitude > 0.0)) throw ConfigError("USpec: amplitude must be positive");
        if (max_mode < 0 || max_mode > 3) throw ConfigError("USpec: max_mode must be in [0, 3]");
        if (killing_index < 0 || killing_index > 2) throw ConfigError("USpec: killing_index must be in [0, 2]");
    }
};

// The exact Killing fields restricted to the patch: ambient rotation
// generators e_k x p on the sphere; two translations and the rotation
// x d_y - y d_x on the plane.
inline VectorField killing_field(const ChartGrid& g, int k) {
    VectorField out = VectorField::zeros(g);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const Vec3 p = g.point(i, j).coords;
            if (g.ambient() == Ambient::UnitSphere) {
                const Vec3 axis = Vec3::Unit(k);
                out.at(i, j) = axis.cross(p);
            } else {
                out.at(i, j) = (k == 0) ? Vec3(1, 0, 0) : (k == 1) ? Vec3(0, 1, 0) : Vec3(-p.y(), p.x(), 0);
            }
        }
    return out;
}

inline std::array<VectorField, 3> killing_fields(const ChartGrid& g) {
    return {killing_field(g, 0), killing_field(g, 1), killing_field(g, 2)};
}

// Removes the L2 projection onto the Killing generators (gauge fixing).
// Returns the removed coefficients.
inline Eigen::Vector3d remove_killing_components(VectorField& u, const MetricField& s) {
    const auto kf = killing_fields(u.grid);
    Eigen::Matrix3d gram;
    Eigen::Vector3d rhs;
    for (int a = 0; a < 3; ++a) {
        rhs(a) = l2_inner(u, kf[a], s);
        for (int b = 0; b < 3; ++b) gram(a, b) = l2_inner(kf[a], kf[b], s);
    }
    const Eigen::Vector3d coeff = gram.ldlt().solve(rhs);
    for (int n = 0; n < u.grid.num_nodes(); ++n)
        for (int a = 0; a < 3; ++a) u.values[n] -= coeff(a) * kf[a].values[n];
    return coeff;
}

// Seeded smooth tangent field with closed-form chart components, normalized to
// the requested pointwise sup of |u|_s on the grid.
struct TrigTangentField {
    TrigScalar c1, c2;
    double scale = 1.0;

    TrigTangentField(std::uint64_t seed, int max_mode, double amplitude, const ChartGrid& g)
        : c1(first_of(seed, max_mode)), c2(second_of(seed, max_mode)) {
        double sup = 0.0;
        for (int i = 0; i < g.nu; ++i)
            for (int j = 0; j < g.nv; ++j)
                sup = std::max(sup, ambient_vector(g, i, j, raw_components(g, g.u(i), g.v(j))).norm());
        if (sup > 0.0) scale = amplitude / sup;
    }

    Vec2 components(const ChartGrid& g, double u, double v) const { return scale * raw_components(g, u, v); }

    VectorField field(const ChartGrid& g) const {
        VectorField out = VectorField::zeros(g);
        for (int i = 0; i < g.nu; ++i)
            for (int j = 0; j < g.nv; ++j)
                out.at(i, j) = ambient_vector(g, i, j, components(g, g.u(i), g.v(j)));
        return out;
    }

    // Closed-form Lie derivative of the chart metric along the field:
    // L_u s = s (nabla u) + (s (nabla u))^T with analytic Christoffels.
    TwoTensorField lie_derivative(const ChartGrid& g) const {
        TwoTensorField out = TwoTensorField::zeros(g);
        for (int i = 0; i < g.nu; ++i)
            for (int j = 0; j < g.nv; ++j) {
                const double u = g.u(i), v = g.v(j);
                const Vec2 c = components(g, u, v);
                Mat2 grad;
                grad << c1.du(g, u, v), c1.dv(g, u, v), c2.du(g, u, v), c2.dv(g, u, v);
                grad *= scale;
                for (int upper = 0; upper < 2; ++upper) {
                    const Mat2 gam = g.christoffel_analytic(i, upper);
                    for (int jj = 0; jj < 2; ++jj)
                        grad(upper, jj) += gam(jj, 0) * c(0) + gam(jj, 1) * c(1);
                }
                const Mat2 flat = g.metric(i, j) * grad;
                out.at(i, j) = flat + flat.transpose();
            }
        return out;
    }

private:
    static TrigScalar first_of(std::uint64_t seed, int max_mode) {
        Rng rng(seed);
        return TrigScalar(rng, max_mode);
    }
    static TrigScalar second_of(std::uint64_t seed, int max_mode) {
        Rng rng(seed);
        TrigScalar skip(rng, max_mode);
        return TrigScalar(rng, max_mode);
    }
    Vec2 raw_components(const ChartGrid& g, double u, double v) const {
        return Vec2(c1(g, u, v), c2(g, u, v));
    }
};

inline VectorField make_u(const USpec& spec, const ChartGrid& g) {
    spec.validate();
    if (spec.generator == UGenerator::Killing) {
        VectorField u = killing_field(g, spec.killing_index);
        double sup = 0.0;
        for (const Vec3& w : u.values) sup = std::max(sup, w.norm());
        if (sup > 0.0)
            for (Vec3& w : u.values) w *= spec.amplitude / sup;
        return u;
    }
    return TrigTangentField(spec.seed, spec.max_mode, spec.amplitude, g).field(g);
}

// Largest |eigenvalue| of s^{-1} h over the grid (h measured in s-units).
inline double relative_sup(const TwoTensorField& h, const MetricField& s) {
    double sup = 0.0;
    for (int n = 0; n < s.grid.num_nodes(); ++n) {
        const Mat2 r = sqrt_spd(s.values[n]).inverse();
        const Vec2 ev = sym_eigenvalues(r * h.values[n] * r);
        sup = std::max(sup, std::max(std::abs(ev(0)), std::abs(ev(1))));
    }
    return sup;
}

inline TwoTensorField make_h(const HSpec& spec, const MetricField& s) {
    spec.validate();
    const ChartGrid& g = s.grid;
    TwoTensorField h = TwoTensorField::zeros(g);
    Rng rng(spec.seed);
    switch (spec.generator) {
        case HGenerator::ConformalConst:
            for (int n = 0; n < g.num_nodes(); ++n) h.values[n] = spec.amplitude * s.values[n];
            return h;  // amplitude is exact here, no renormalization
        case HGenerator::ConformalTrig: {
            const TrigScalar a(rng, spec.max_mode);
            for (int i = 0; i < g.nu; ++i)
                for (int j = 0; j < g.nv; ++j) h.at(i, j) = a(g, g.u(i), g.v(j)) * s.at(i, j);
            break;
        }
        case HGenerator::Bump: {
            // single-component interior bump: h_11 = cos^2 profile supported
            // on the middle half of the chart box
            for (int i = 0; i < g.nu; ++i)
                for (int j = 0; j < g.nv; ++j) {
                    const double x = (g.u(i) - g.u0) / (g.u1 - g.u0);
                    const double y = (g.v(j) - g.v0) / (g.v1 - g.v0);
                    const double rx = std::abs(x - 0.5) * 4.0, ry = std::abs(y - 0.5) * 4.0;
                    double val = 0.0;
                    if (rx < 1.0 && ry < 1.0) {
                        const double cx = 0.5 * (1.0 + std::cos(M_PI * rx));
                        const double cy = 0.5 * (1.0 + std::cos(M_PI * ry));
                        val = cx * cx * cy * cy;
                    }
                    h.at(i, j)(0, 0) = val;
                }
            break;
        }
        case HGenerator::DefRange: {
            // image of the *discrete* deformation operator. The generating
            // field is gauge-fixed (Killing-free) so that the deflated
            // minimization can recover it exactly.
            USpec vs;
            vs.generator = UGenerator::Trig;
            vs.amplitude = 1.0;
            vs.seed = spec.seed;
            vs.max_mode = spec.max_mode;
            VectorField v = make_u(vs, g);
            remove_killing_components(v, s);
            h = deformation_operator(v, s);
            break;
        }
        case HGenerator::LieAnalytic: {
            // closed-form L_v s of a seeded field (continuum deformation range)
            h = TrigTangentField(spec.seed, spec.max_mode, 1.0, g).lie_derivative(g);
            break;
        }
        case HGenerator::Trig: {
            const TrigScalar c11(rng, spec.max_mode), c12(rng, spec.max_mode), c22(rng, spec.max_mode);
            for (int i = 0; i < g.nu; ++i)
                for (int j = 0; j < g.nv; ++j) {
                    Mat2 m;
                    const double u = g.u(i), v = g.v(j);
                    m << c11(g, u, v), c12(g, u, v), c12(g, u, v), c22(g, u, v);
                    h.at(i, j) = m;
                }
            break;
        }
    }
    const double sup = relative_sup(h, s);
    if (sup == 0.0) throw NumericalError("make_h: generated field is identically zero");
    for (Mat2& m : h.values) m *= spec.amplitude / sup;
    return h;
}

inline MetricField perturbed_metric(const MetricField& s, const TwoTensorField& h, double eps) {
    require_matching_grid(s.grid, h.grid, "perturbed_metric");
    MetricField g = s;
    for (int n = 0; n < s.grid.num_nodes(); ++n) g.values[n] += eps * h.values[n];
    g.validate();
    return g;
}

}  // namespace wielab
