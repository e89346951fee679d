#pragma once

#include <utility>

#include "wielab/generators.hpp"
#include "wielab/operators.hpp"

namespace wielab {

struct NonlinearEnergyInput {
    ConfigurationField f;
    MetricField g_eps;
    MetricField s;
    double eps = 0.1;

    void validate() const {
        require_matching_grid(f.grid, g_eps.grid, "NonlinearEnergyInput");
        require_matching_grid(f.grid, s.grid, "NonlinearEnergyInput");
        if (!(eps > 0.0)) throw std::invalid_argument("NonlinearEnergyInput: eps must be positive");
        f.validate();
        g_eps.validate();
    }
};

struct LimitEnergyInput {
    VectorField u;
    TwoTensorField h;
    MetricField s;

    void validate() const {
        require_matching_grid(u.grid, h.grid, "LimitEnergyInput");
        require_matching_grid(u.grid, s.grid, "LimitEnergyInput");
        h.validate();
    }
};

// Rescaled nonlinear energy
//   E_eps(f) = eps^-2 sum_x dist^2(F(x) g_eps^{-1/2}(x), SO(2)) sqrt(det g_eps) w(x),
// with F the configuration differential in an orthonormal frame at the image
// point. The density is invariant under the frame choice; frame_override
// exists for exactly that property test.
inline double nonlinear_energy(const NonlinearEnergyInput& in,
                               const std::vector<Frame>* frame_override = nullptr) {
    const ChartGrid& g = in.f.grid;
    const double e2 = in.eps * in.eps;
    const double sum = quad_sum(g, [&](int i, int j) {
        const int node = g.index(i, j);
        const Frame frame = frame_override ? (*frame_override)[node] : orthonormal_frame(in.f.point(i, j));
        const Mat2 F = configuration_differential(in.f, i, j, frame);
        const Mat2 A = F * sqrt_spd(in.g_eps.at(i, j)).inverse();
        const double d = dist_to_so(A).distance;
        return d * d * node_measure(in.g_eps, i, j);
    });
    return sum / e2;
}

struct GradientDiagnostics {
    int singular_nodes = 0;  // nodes where the differential was exactly singular
};

namespace detail {
// Adjoint of the frame map p |-> e1(p) at a sphere point: returns the ambient
// vector a* with <z, de1(delta)> = <a*, delta>.
inline Vec3 frame_e1_adjoint(const Vec3& p, const Vec3& axis, const Vec3& e1, double wnorm, const Vec3& z) {
    const Vec3 q = (z - e1.dot(z) * e1) / wnorm;
    return -(q.dot(p)) * axis - axis.dot(p) * q;
}
}  // namespace detail

// Riemannian L2 gradient of the nonlinear energy: the tangent field grad along
// f with d/dt E(exp_f(t delta))|_0 = <grad, delta>_{L2(dVol_g_eps)}. Assembled
// by exact differentiation of the discrete energy through the nearest-rotation
// representation of dist(., SO), the finite-difference stencils, and the
// deterministic frame construction. Returned values are tangent at f(node).
inline VectorField nonlinear_energy_gradient(const NonlinearEnergyInput& in,
                                             GradientDiagnostics* diag = nullptr) {
    const ChartGrid& g = in.f.grid;
    const bool sphere = g.ambient() == Ambient::UnitSphere;
    const double e2 = in.eps * in.eps;
    std::vector<Vec3> acc(g.num_nodes(), Vec3::Zero());
    if (diag) diag->singular_nodes = 0;

    for (int i = 0; i < g.nu; ++i) {
        const auto stu = deriv_stencil(g.nu, i, g.du(), 1, kWidthOrder4);
        for (int j = 0; j < g.nv; ++j) {
            const auto stv = deriv_stencil(g.nv, j, g.dv(), 1, kWidthOrder4);
            const AmbientPoint p = in.f.point(i, j);
            const Frame frame = orthonormal_frame(p);
            Eigen::Matrix<double, 3, 2> eframe;
            eframe.col(0) = frame.e1;
            eframe.col(1) = frame.e2;

            const auto cols = config_jacobian(in.f, i, j);
            Eigen::Matrix<double, 3, 2> jac;
            jac.col(0) = cols[0];
            jac.col(1) = cols[1];

            const Mat2 r = sqrt_spd(in.g_eps.at(i, j)).inverse();
            const Mat2 a = eframe.transpose() * jac * r;
            if (a.determinant() == 0.0 && diag) ++diag->singular_nodes;
            const SoProjection proj = dist_to_so(a);
            const Mat2 m = 2.0 * (a - proj.nearest);
            const double c = node_measure(in.g_eps, i, j) / e2;

            // dist^2 path through the stencil: dA = E^T dJ R.
            const Eigen::Matrix<double, 3, 2> n = eframe * m * r;  // R symmetric
            for (const auto& e : stu) acc[g.index(e.index, j)] += (c * e.coeff) * n.col(0);
            for (const auto& e : stv) acc[g.index(i, e.index)] += (c * e.coeff) * n.col(1);

            // dist^2 path through the frame at the image point: dA = dE^T J R.
            if (sphere) {
                const Vec3 axis = (std::abs(p.coords.z()) > 0.9) ? Vec3(1, 0, 0) : Vec3(0, 0, 1);
                const Vec3 w = axis - axis.dot(p.coords) * p.coords;
                const double wnorm = w.norm();
                const Eigen::Matrix<double, 3, 2> z = jac * r * m.transpose();
                const Vec3 z1 = z.col(0), z2 = z.col(1);
                Vec3 adj = detail::frame_e1_adjoint(p.coords, axis, frame.e1, wnorm, z1);
                adj += frame.e1.cross(z2);
                adj += detail::frame_e1_adjoint(p.coords, axis, frame.e1, wnorm, z2.cross(p.coords));
                acc[g.index(i, j)] += c * adj;
            }
        }
    }

    VectorField out = VectorField::zeros(g);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const int node = g.index(i, j);
            const double mu = node_measure(in.g_eps, i, j);
            out.values[node] = project_tangent(in.f.point(i, j), acc[node]) / mu;
        }
    return out;
}

// Limit energy E_0(u) = 1/4 || L_u s - h ||^2_{L2(dVol_s)}.
inline double limit_energy(const LimitEnergyInput& in) {
    const TwoTensorField d = deformation_operator(in.u, in.s);
    TwoTensorField r = d;
    for (int n = 0; n < d.grid.num_nodes(); ++n) r.values[n] -= in.h.values[n];
    return 0.25 * l2_inner(r, r, in.s);
}

// L2 gradient of the limit energy with respect to u, in the dVol_s pairing.
inline VectorField limit_energy_gradient(const LimitEnergyInput& in) {
    const ChartGrid& g = in.u.grid;
    const TwoTensorField d = deformation_operator(in.u, in.s);
    // weighted residual W r, nodewise W = w mu s^{-1} (.) s^{-1}
    std::vector<Mat2> wr(g.num_nodes());
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const int n = g.index(i, j);
            const Mat2 inv = in.s.at(i, j).inverse();
            wr[n] = node_measure(in.s, i, j) * (inv * (d.values[n] - in.h.values[n]) * inv);
        }
    DynVec wrv(4 * g.num_nodes());
    for (int n = 0; n < g.num_nodes(); ++n) {
        wrv(4 * n + 0) = wr[n](0, 0);
        wrv(4 * n + 1) = wr[n](0, 1);
        wrv(4 * n + 2) = wr[n](1, 0);
        wrv(4 * n + 3) = wr[n](1, 1);
    }
    const SparseMat def = deformation_matrix(in.s);
    const DynVec covec = 0.5 * (def.transpose() * wrv);
    VectorField out = VectorField::zeros(g);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const int n = g.index(i, j);
            const Vec2 gc = in.s.at(i, j).inverse() * Vec2(covec(2 * n), covec(2 * n + 1)) /
                            node_measure(in.s, i, j);
            out.values[n] = ambient_vector(g, i, j, gc);
        }
    return out;
}

// Nodewise isometry section Q_eps = s^{-1/2} g_eps^{1/2} of SO(g_eps, s) and
// its first-order quotient xi = (Q_eps - Id)/eps. Coordinate-dependent by
// construction; no global smoothness is implied.
inline std::pair<MatrixField, MatrixField> build_q_eps(const MetricField& g_eps, const MetricField& s,
                                                       double eps) {
    require_matching_grid(g_eps.grid, s.grid, "build_q_eps");
    if (!(eps > 0.0)) throw std::invalid_argument("build_q_eps: eps must be positive");
    MatrixField q = MatrixField::zeros(s.grid);
    MatrixField xi = MatrixField::zeros(s.grid);
    for (int n = 0; n < s.grid.num_nodes(); ++n) {
        q.values[n] = sqrt_spd(s.values[n]).inverse() * sqrt_spd(g_eps.values[n]);
        xi.values[n] = (q.values[n] - Mat2::Identity()) / eps;
    }
    return {std::move(q), std::move(xi)};
}

// eps -> 0 limit of (Q_eps - Id)/eps for g_eps = s + eps h (Sylvester form;
// satisfies h = s xi + (s xi)^T exactly).
inline MatrixField xi_limit_field(const MetricField& s, const TwoTensorField& h) {
    require_matching_grid(s.grid, h.grid, "xi_limit_field");
    MatrixField out = MatrixField::zeros(s.grid);
    for (int n = 0; n < s.grid.num_nodes(); ++n) out.values[n] = xi_limit(s.values[n], h.values[n]);
    return out;
}

}  // namespace wielab
