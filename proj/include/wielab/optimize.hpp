#pragma once

#include <array>

#include "wielab/energy.hpp"

namespace wielab {

struct DescentOptions {
    int max_iters = 200;
    double step_init = 1.0;
    double armijo_c = 0.5;
    double grad_tol = 1e-8;
    std::uint64_t seed = 1;

    bool operator==(const DescentOptions&) const = default;

    void validate() const {
        if (max_iters <= 0 || !(step_init > 0.0) || !(grad_tol > 0.0))
            throw ConfigError("DescentOptions: max_iters, step_init, grad_tol must be positive");
        if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw ConfigError("DescentOptions: armijo_c must be in (0,1)");
    }
};

struct TraceRow {
    int iter;
    double energy;
    double grad_norm;
    double step;
};

struct DescentResult {
    ConfigurationField f_star;
    double energy = 0.0;
    std::vector<TraceRow> trace;
    bool stalled = false;        // line search hit the halving cap
    bool converged = false;      // grad_norm <= grad_tol
    int iterations = 0;
};

// Riemannian gradient descent with Armijo backtracking; the iterate moves by
// f <- exp_f(-t grad). Trace energies are strictly nonincreasing.
inline DescentResult minimize_nonlinear(const ConfigurationField& f0, const NonlinearEnergyInput& in,
                                        const DescentOptions& opts) {
    opts.validate();
    f0.validate();
    NonlinearEnergyInput cur = in;
    cur.f = f0;
    DescentResult out;
    double energy = nonlinear_energy(cur);
    double step = opts.step_init;
    const ChartGrid& g = f0.grid;

    for (int it = 0; it < opts.max_iters; ++it) {
        const VectorField grad = nonlinear_energy_gradient(cur);
        const double gnorm2 = quad_sum(g, [&](int i, int j) {
            return node_measure(cur.g_eps, i, j) * grad.at(i, j).squaredNorm();
        });
        const double gnorm = std::sqrt(std::max(0.0, gnorm2));
        out.trace.push_back(TraceRow{it, energy, gnorm, step});
        if (gnorm <= opts.grad_tol) {
            out.converged = true;
            break;
        }
        double t = step;
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving) {
            NonlinearEnergyInput trial = cur;
            bool feasible = true;
            for (int i = 0; i < g.nu && feasible; ++i)
                for (int j = 0; j < g.nv; ++j) {
                    const Vec3 v = -t * grad.at(i, j);
                    if (g.ambient() == Ambient::UnitSphere && v.norm() >= M_PI) {
                        feasible = false;
                        break;
                    }
                    trial.f.at(i, j) = sphere_exp(cur.f.point(i, j), v).coords;
                }
            if (feasible) {
                const double trial_energy = nonlinear_energy(trial);
                if (trial_energy <= energy - opts.armijo_c * t * gnorm2) {
                    cur.f = trial.f;
                    energy = trial_energy;
                    step = 2.0 * t;  // allow growth, next iteration backtracks as needed
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        ++out.iterations;
        if (!accepted) {
            out.stalled = true;
            break;
        }
    }
    out.trace.push_back(TraceRow{out.iterations, energy,
                                 out.trace.empty() ? 0.0 : out.trace.back().grad_norm, step});
    out.f_star = cur.f;
    out.energy = energy;
    return out;
}

struct LimitMinimum {
    VectorField u_star;
    double e0_min = 0.0;
    double residual = 0.0;  // final relative CG residual
    int iterations = 0;
};

struct ProjectionResult {
    VectorField u_star;
    TwoTensorField h_par;
    TwoTensorField h_perp;
    Eigen::Vector3d killing_components = Eigen::Vector3d::Zero();
};

namespace detail {

struct LimitSystem {
    SparseMat def;                  // 4N x 2N deformation matrix
    std::vector<Mat2> w_inv;        // nodewise s^{-1}
    DynVec w_measure;               // nodewise quadrature measure (w mu)
    std::vector<Mat2> m_sqrt;       // nodewise (w mu s)^{1/2}
    std::vector<Mat2> m_sqrt_inv;
    std::vector<DynVec> killing_z;  // orthonormal deflation basis in z-space
};

inline DynVec tensor_to_vec(const TwoTensorField& t) {
    DynVec v(4 * t.grid.num_nodes());
    for (int n = 0; n < t.grid.num_nodes(); ++n) {
        v(4 * n + 0) = t.values[n](0, 0);
        v(4 * n + 1) = t.values[n](0, 1);
        v(4 * n + 2) = t.values[n](1, 0);
        v(4 * n + 3) = t.values[n](1, 1);
    }
    return v;
}

// W: tensor-field L2 weight, nodewise a |-> w mu s^{-1} a s^{-1} (a symmetric).
inline DynVec apply_tensor_weight(const LimitSystem& sys, const DynVec& t) {
    DynVec out(t.size());
    const int n_nodes = static_cast<int>(t.size()) / 4;
    for (int n = 0; n < n_nodes; ++n) {
        Mat2 a;
        a << t(4 * n), t(4 * n + 1), t(4 * n + 2), t(4 * n + 3);
        const Mat2 b = sys.w_measure(n) * (sys.w_inv[n] * a * sys.w_inv[n]);
        out(4 * n) = b(0, 0);
        out(4 * n + 1) = b(0, 1);
        out(4 * n + 2) = b(1, 0);
        out(4 * n + 3) = b(1, 1);
    }
    return out;
}

inline DynVec apply_block2(const std::vector<Mat2>& blocks, const DynVec& x) {
    DynVec out(x.size());
    const int n_nodes = static_cast<int>(x.size()) / 2;
    for (int n = 0; n < n_nodes; ++n) {
        const Vec2 y = blocks[n] * Vec2(x(2 * n), x(2 * n + 1));
        out(2 * n) = y(0);
        out(2 * n + 1) = y(1);
    }
    return out;
}

inline DynVec vector_field_chart_vec(const VectorField& u) {
    DynVec out(2 * u.grid.num_nodes());
    for (int i = 0; i < u.grid.nu; ++i)
        for (int j = 0; j < u.grid.nv; ++j) {
            const Vec2 c = chart_components(u.grid, i, j, u.at(i, j));
            const int n = u.grid.index(i, j);
            out(2 * n) = c(0);
            out(2 * n + 1) = c(1);
        }
    return out;
}

inline LimitSystem build_limit_system(const MetricField& s) {
    const ChartGrid& g = s.grid;
    LimitSystem sys;
    sys.def = deformation_matrix(s);
    sys.w_inv.resize(g.num_nodes());
    sys.w_measure.resize(g.num_nodes());
    sys.m_sqrt.resize(g.num_nodes());
    sys.m_sqrt_inv.resize(g.num_nodes());
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const int n = g.index(i, j);
            const double mu = node_measure(s, i, j);
            sys.w_inv[n] = s.at(i, j).inverse();
            sys.w_measure(n) = mu;
            sys.m_sqrt[n] = sqrt_spd(mu * s.at(i, j));
            sys.m_sqrt_inv[n] = sys.m_sqrt[n].inverse();
        }
    // z-space Killing basis, modified Gram-Schmidt
    for (const VectorField& k : killing_fields(g)) {
        const DynVec kc = vector_field_chart_vec(k);
        DynVec z(kc.size());
        for (int n = 0; n < g.num_nodes(); ++n) {
            const Vec2 y = sys.m_sqrt[n] * Vec2(kc(2 * n), kc(2 * n + 1));
            z(2 * n) = y(0);
            z(2 * n + 1) = y(1);
        }
        for (const DynVec& prev : sys.killing_z) z -= prev.dot(z) * prev;
        const double zn = z.norm();
        if (zn > 1e-12) sys.killing_z.push_back(z / zn);
    }
    return sys;
}

}  // namespace detail

// Minimize E_0(u) = 1/4 ||Def u - h||^2 by conjugate gradient on the normal
// equations, in the variables z = M^{1/2} u_chart so that the deflated Killing
// directions are L2-orthogonal and the returned representative has minimal
// L2 norm modulo the discrete Killing fields.
inline LimitMinimum minimize_limit(const LimitEnergyInput& in, double tol = 1e-10) {
    in.validate();
    const ChartGrid& g = in.s.grid;
    const detail::LimitSystem sys = detail::build_limit_system(in.s);

    const auto apply = [&](const DynVec& z) {
        const DynVec u = detail::apply_block2(sys.m_sqrt_inv, z);
        const DynVec t = detail::apply_tensor_weight(sys, sys.def * u);
        return detail::apply_block2(sys.m_sqrt_inv, DynVec(sys.def.transpose() * t));
    };
    const DynVec b = detail::apply_block2(
        sys.m_sqrt_inv, DynVec(sys.def.transpose() * detail::apply_tensor_weight(sys, detail::tensor_to_vec(in.h))));

    const int cap = 10 * g.num_nodes();
    const CgResult sol = cg_solve(apply, b, tol, cap, sys.killing_z);

    const DynVec uc = detail::apply_block2(sys.m_sqrt_inv, sol.x);
    LimitMinimum out;
    out.u_star = VectorField::zeros(g);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const int n = g.index(i, j);
            out.u_star.values[n] = ambient_vector(g, i, j, Vec2(uc(2 * n), uc(2 * n + 1)));
        }
    LimitEnergyInput eval = in;
    eval.u = out.u_star;
    out.e0_min = limit_energy(eval);
    out.residual = sol.rel_residual;
    out.iterations = sol.iterations;
    return out;
}

// Orthogonal split h = h_par + h_perp with h_par = Def(u*) in the discrete
// range of the deformation operator. Killing coefficients of u* are reported
// (they are already deflated to ~0) and then removed to fix the gauge.
inline ProjectionResult project_parallel(const TwoTensorField& h, const MetricField& s,
                                         double tol = 1e-10) {
    h.validate();
    LimitEnergyInput in{VectorField::zeros(h.grid), h, s};
    const LimitMinimum lm = minimize_limit(in, tol);
    ProjectionResult out;
    out.u_star = lm.u_star;
    // report, then remove (deflation already keeps these near zero)
    out.killing_components = remove_killing_components(out.u_star, s);
    out.h_par = deformation_operator(out.u_star, s);
    out.h_perp = h;
    for (int n = 0; n < h.grid.num_nodes(); ++n) out.h_perp.values[n] -= out.h_par.values[n];
    return out;
}

}  // namespace wielab
