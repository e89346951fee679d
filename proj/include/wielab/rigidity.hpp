#pragma once

#include "wielab/energy.hpp"

namespace wielab {

// Ambient isometry acting linearly on embedding coordinates: any element of
// SO(3) on the sphere, a rotation about e_z on the plane (z stays 0).
struct AmbientIsometry {
    Mat3 rot = Mat3::Identity();

    AmbientPoint apply(const AmbientPoint& p) const { return AmbientPoint{p.ambient, rot * p.coords}; }
    Vec3 apply_vec(const Vec3& v) const { return rot * v; }
    Vec3 apply_inv_vec(const Vec3& v) const { return rot.transpose() * v; }

    static AmbientIsometry identity() { return AmbientIsometry{}; }
    static AmbientIsometry random(Rng& rng, Ambient ambient) {
        AmbientIsometry out;
        if (ambient == Ambient::EuclideanPlane) {
            const double a = rng.uniform(0.0, 2.0 * M_PI);
            out.rot << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
            return out;
        }
        // uniform SO(3) via a normalized random quaternion
        Eigen::Vector4d q;
        for (int k = 0; k < 4; ++k) q(k) = rng.normal();
        q.normalize();
        out.rot = Eigen::Quaterniond(q(0), q(1), q(2), q(3)).toRotationMatrix();
        return out;
    }
};

struct IsometryFit {
    Mat3 rotation = Mat3::Identity();
    double l2_residual = 0.0;
    double w12_residual = 0.0;
    double energy_norm = 0.0;  // || dist(df, SO(s, f*s)) ||_{L2}
    double ratio = 0.0;        // w12_residual / max(energy_norm, floor); 0 when below floor
    bool ambiguous = false;    // cross-covariance nearly rank-deficient
    double sv_gap = 0.0;       // sigma_2 + sigma_3 of the cross-covariance
};

constexpr double kEnergyNormFloor = 1e-14;

// Volume-weighted rotation fit (Wahba/Kabsch form): minimizes
// sum w mu |kappa(f(x)) - R kappa(x)|^2 over R in SO(3), by SVD of the
// weighted cross-covariance with the determinant correction. Residuals and the
// energy norm use the same quadrature.
inline IsometryFit best_isometry(const ConfigurationField& f) {
    if (f.grid.ambient() != Ambient::UnitSphere)
        throw std::domain_error("best_isometry: only the sphere ambient is supported");
    const ChartGrid& g = f.grid;
    const MetricField s = chart_metric_field(g);

    Mat3 cov = Mat3::Zero();
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j)
            cov += node_measure(s, i, j) * f.at(i, j) * g.point(i, j).coords.transpose();
    Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 c = Mat3::Identity();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) c(2, 2) = -1.0;

    IsometryFit fit;
    fit.rotation = svd.matrixU() * c * svd.matrixV().transpose();
    fit.sv_gap = svd.singularValues()(1) + svd.singularValues()(2);
    fit.ambiguous = fit.sv_gap <= 1e-10 * std::max(1.0, svd.singularValues()(0));

    const ConfigurationField incl = inclusion_field(g);
    const double l2_sq = quad_sum(g, [&](int i, int j) {
        return node_measure(s, i, j) * (f.at(i, j) - fit.rotation * g.point(i, j).coords).squaredNorm();
    });
    // gradient residual of kappa f - kappa Psi, both maps differentiated by
    // the same stencils so exact isometries have an exactly zero residual
    const double grad_sq = quad_sum(g, [&](int i, int j) {
        const auto jf = config_jacobian(f, i, j);
        const auto ji = config_jacobian(incl, i, j);
        const Vec3 d0 = jf[0] - fit.rotation * ji[0];
        const Vec3 d1 = jf[1] - fit.rotation * ji[1];
        const Mat2 inv = s.at(i, j).inverse();
        const double integrand = inv(0, 0) * d0.squaredNorm() + 2.0 * inv(0, 1) * d0.dot(d1) +
                                 inv(1, 1) * d1.squaredNorm();
        return node_measure(s, i, j) * integrand;
    });
    const double energy_sq = quad_sum(g, [&](int i, int j) {
        const Mat2 F = configuration_differential(f, i, j);
        const double d = dist_to_so(F * sqrt_spd(s.at(i, j)).inverse()).distance;
        return node_measure(s, i, j) * d * d;
    });
    fit.l2_residual = std::sqrt(std::max(0.0, l2_sq));
    fit.w12_residual = std::sqrt(std::max(0.0, l2_sq + grad_sq));
    fit.energy_norm = std::sqrt(std::max(0.0, energy_sq));
    fit.ratio = (fit.energy_norm < kEnergyNormFloor) ? 0.0 : fit.w12_residual / fit.energy_norm;
    return fit;
}

// Recovery configuration f(p) = exp_{Psi p}(eps Psi u(p)); the plane analogue
// is the affine map Psi p + eps Psi u(p).
inline ConfigurationField recovery_sequence(const VectorField& u, const AmbientIsometry& psi, double eps) {
    const ChartGrid& g = u.grid;
    double sup = 0.0;
    for (const Vec3& w : u.values) sup = std::max(sup, w.norm());
    if (g.ambient() == Ambient::UnitSphere && !(eps * sup < M_PI / 2))
        throw std::domain_error("recovery_sequence: eps * max|u| = " + std::to_string(eps * sup) +
                                " exceeds pi/2");
    ConfigurationField f;
    f.grid = g;
    f.values.resize(g.num_nodes());
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const AmbientPoint q = psi.apply(g.point(i, j));
            f.at(i, j) = sphere_exp(q, eps * psi.apply_vec(u.at(i, j))).coords;
        }
    return f;
}

// Rescaled displacement u(p) = (1/eps) Psi^{-1} log_{Psi p} f(p); exact
// inverse of recovery_sequence within the injectivity bounds.
inline VectorField extract_displacement(const ConfigurationField& f, const AmbientIsometry& psi,
                                        double eps) {
    const ChartGrid& g = f.grid;
    if (!(eps > 0.0)) throw std::invalid_argument("extract_displacement: eps must be positive");
    VectorField u = VectorField::zeros(g);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const AmbientPoint base = psi.apply(g.point(i, j));
            if (g.ambient() == Ambient::UnitSphere &&
                sphere_angle(base, f.point(i, j)) >= kAntipodalCutoff)
                throw std::domain_error("extract_displacement: image nearly antipodal at node " +
                                        std::to_string(g.index(i, j)));
            const TangentVec lg = sphere_log(base, f.point(i, j));
            u.at(i, j) = psi.apply_inv_vec(lg.vec) / eps;
        }
    return u;
}

// Transported displacement gradient (d Psi^{-1} o transport o df - Id)/eps in
// the chart basis; converges to the covariant derivative of the displacement
// along recovery sequences.
inline MatrixField transported_gradient(const ConfigurationField& f, const AmbientIsometry& psi,
                                        double eps) {
    const ChartGrid& g = f.grid;
    MatrixField out = MatrixField::zeros(g);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const AmbientPoint image = f.point(i, j);
            const AmbientPoint target = psi.apply(g.point(i, j));
            if (g.ambient() == Ambient::UnitSphere &&
                sphere_angle(image, target) >= kAntipodalCutoff)
                throw std::domain_error("transported_gradient: image nearly antipodal at node " +
                                        std::to_string(g.index(i, j)));
            const auto cols = config_jacobian(f, i, j);
            Mat2 c;
            for (int col = 0; col < 2; ++col) {
                const Vec3 tangent = project_tangent(image, cols[col]);
                const Vec3 moved = psi.apply_inv_vec(parallel_transport(image, target, tangent));
                const Vec2 comp = chart_components(g, i, j, moved);
                c(0, col) = comp(0);
                c(1, col) = comp(1);
            }
            out.at(i, j) = (c - Mat2::Identity()) / eps;
        }
    return out;
}

// One rigidity experiment: f = exp-perturbation of a seeded rotation by a
// seeded smooth tangent field of the given sup-norm amplitude.
inline IsometryFit rigidity_trial(std::uint64_t seed, double amplitude, const ChartGrid& grid) {
    if (!(amplitude >= 0.0 && amplitude <= 0.5))
        throw std::domain_error("rigidity_trial: amplitude must lie in [0, 0.5]");
    grid.validate();
    Rng rng(seed);
    const AmbientIsometry psi = AmbientIsometry::random(rng, grid.ambient());
    ConfigurationField f;
    f.grid = grid;
    f.values.resize(grid.num_nodes());
    if (amplitude == 0.0) {
        for (int i = 0; i < grid.nu; ++i)
            for (int j = 0; j < grid.nv; ++j) f.at(i, j) = psi.apply(grid.point(i, j)).coords;
        return best_isometry(f);
    }
    USpec us;
    us.generator = UGenerator::Trig;
    us.amplitude = amplitude;
    us.seed = seed ^ 0x517cc1b727220a95ull;  // distinct stream from the rotation draw
    const VectorField w = make_u(us, grid);
    for (int i = 0; i < grid.nu; ++i)
        for (int j = 0; j < grid.nv; ++j) {
            const AmbientPoint q = psi.apply(grid.point(i, j));
            f.at(i, j) = sphere_exp(q, psi.apply_vec(w.at(i, j))).coords;
        }
    return best_isometry(f);
}

}  // namespace wielab
