#pragma once

#include <functional>
#include <iomanip>
#include <ostream>

#include "wielab/experiment.hpp"

namespace wielab {

struct SelftestOptions {
    bool corrupt_sqrt_spd = false;  // test hook: sabotage one kernel to prove the harness catches it
    int threads = 1;                // accepted for interface parity; evaluation is sequential
};

namespace selftest_detail {

struct Check {
    std::string name;
    std::function<bool(std::string&)> run;
};

inline ChartGrid sgrid(int n) {
    ChartGrid g;
    g.chart = Chart::Spherical;
    g.u0 = 0.97;
    g.u1 = 2.17;
    g.v0 = 0.0;
    g.v1 = 1.6;
    g.nu = g.nv = n;
    return g;
}

inline ChartGrid pgrid(int n) {
    ChartGrid g;
    g.chart = Chart::Cartesian;
    g.nu = g.nv = n;
    return g;
}

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline std::string num_pair(double got, double want) {
    return "got " + fmt17(got) + ", want " + fmt17(want);
}

inline std::vector<Check> build_checks(const SelftestOptions& opts) {
    std::vector<Check> checks;
    const auto add = [&](const std::string& name, std::function<bool(std::string&)> fn) {
        checks.push_back(Check{name, std::move(fn)});
    };

    // --- small-matrix kernels ---
    add("sqrt_spd square identity", [opts](std::string& msg) {
        Rng rng(1001);
        for (int t = 0; t < 100; ++t) {
            Mat2 q;
            const double a = rng.uniform(0.0, 2 * M_PI);
            q << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
            Mat2 d = Mat2::Zero();
            d(0, 0) = std::exp(rng.uniform(-3.0, 3.0));
            d(1, 1) = std::exp(rng.uniform(-3.0, 3.0));
            Mat2 m = q * d * q.transpose();
            m(1, 0) = m(0, 1);
            Mat2 r = sqrt_spd(m);
            if (opts.corrupt_sqrt_spd) r(0, 0) += 1e-3;  // deliberate fault injection
            if ((r * r - m).norm() > 1e-12 * std::max(1.0, m.norm())) {
                msg = "square mismatch " + fmt17((r * r - m).norm());
                return false;
            }
        }
        return true;
    });
    add("sqrt_spd closed-form cases", [](std::string& msg) {
        Mat2 d;
        d << 4, 0, 0, 9;
        Mat2 want;
        want << 2, 0, 0, 3;
        if ((sqrt_spd(Mat2::Identity()) - Mat2::Identity()).norm() > 1e-14 ||
            (sqrt_spd(d) - want).norm() > 1e-13) {
            msg = "identity/diagonal case failed";
            return false;
        }
        return true;
    });
    add("dist_to_so cases and bi-invariance", [](std::string& msg) {
        Mat2 d21, refl;
        d21 << 2, 0, 0, 1;
        refl << 1, 0, 0, -1;
        if (!close(dist_to_so(Mat2::Identity()).distance, 0.0, 1e-13) ||
            !close(dist_to_so(d21).distance, 1.0, 1e-12) ||
            !close(dist_to_so(refl).distance, 2.0, 1e-12)) {
            msg = "basic distances wrong";
            return false;
        }
        Rng rng(1002);
        for (int t = 0; t < 100; ++t) {
            Mat2 a;
            a << rng.normal(), rng.normal(), rng.normal(), rng.normal();
            Mat2 r1, r2;
            const double t1 = rng.uniform(0.0, 2 * M_PI), t2 = rng.uniform(0.0, 2 * M_PI);
            r1 << std::cos(t1), -std::sin(t1), std::sin(t1), std::cos(t1);
            r2 << std::cos(t2), -std::sin(t2), std::sin(t2), std::cos(t2);
            if (!close(dist_to_so(r1 * a * r2).distance, dist_to_so(a).distance, 1e-12)) {
                msg = "bi-invariance violated";
                return false;
            }
        }
        return true;
    });
    add("quadratic model trivial directions", [](std::string& msg) {
        Mat2 anti;
        anti << 0, 1, -1, 0;
        const QuadraticModel qa = quadratic_model_check(Mat2::Identity(), anti, 0.1);
        const QuadraticModel qi = quadratic_model_check(Mat2::Identity(), Mat2::Identity(), 0.01);
        if (qa.w_model != 0.0 || qa.w_exact > 1e-2) {
            msg = "antisymmetric direction: " + num_pair(qa.w_exact, 0.0);
            return false;
        }
        if (!close(qi.w_model, 2e-4, 1e-15)) {
            msg = "identity direction: " + num_pair(qi.w_model, 2e-4);
            return false;
        }
        return true;
    });

    // --- sphere geometry ---
    add("sphere exp/log trivial cases and inversion", [](std::string& msg) {
        const AmbientPoint pole = AmbientPoint::sphere(Vec3(0, 0, 1));
        if ((sphere_exp(pole, Vec3(M_PI / 2, 0, 0)).coords - Vec3(1, 0, 0)).norm() > 1e-14 ||
            (sphere_log(pole, AmbientPoint::sphere(Vec3(1, 0, 0))).vec - Vec3(M_PI / 2, 0, 0)).norm() >
                1e-14) {
            msg = "quarter-circle case failed";
            return false;
        }
        Rng rng(1003);
        for (int t = 0; t < 200; ++t) {
            Vec3 p(rng.normal(), rng.normal(), rng.normal());
            p.normalize();
            Vec3 v(rng.normal(), rng.normal(), rng.normal());
            v -= v.dot(p) * p;
            if (v.norm() > 3.0) v *= 3.0 / v.norm();
            const AmbientPoint base = AmbientPoint::sphere(p);
            if ((sphere_log(base, sphere_exp(base, v)).vec - v).norm() > 1e-12 * std::max(1.0, v.norm())) {
                msg = "log(exp(v)) != v";
                return false;
            }
        }
        return true;
    });
    add("parallel transport is special orthogonal", [](std::string& msg) {
        const AmbientPoint pole = AmbientPoint::sphere(Vec3(0, 0, 1));
        const AmbientPoint ex = AmbientPoint::sphere(Vec3(1, 0, 0));
        if ((parallel_transport(pole, ex, Vec3(0, 1, 0)) - Vec3(0, 1, 0)).norm() > 1e-14 ||
            (parallel_transport(pole, ex, Vec3(1, 0, 0)) - Vec3(0, 0, -1)).norm() > 1e-14) {
            msg = "axis cases failed";
            return false;
        }
        Rng rng(1004);
        for (int t = 0; t < 200; ++t) {
            Vec3 p(rng.normal(), rng.normal(), rng.normal()), q(rng.normal(), rng.normal(), rng.normal());
            p.normalize();
            q.normalize();
            const AmbientPoint a = AmbientPoint::sphere(p), b = AmbientPoint::sphere(q);
            if (sphere_angle(a, b) >= kAntipodalCutoff) continue;
            Vec3 v(rng.normal(), rng.normal(), rng.normal());
            v -= v.dot(p) * p;
            const Vec3 w = parallel_transport(a, b, v);
            if (std::abs(w.norm() - v.norm()) > 1e-12 * std::max(1.0, v.norm())) {
                msg = "norm not preserved";
                return false;
            }
        }
        return true;
    });
    add("holonomy: two-point loop and octant triangle", [](std::string& msg) {
        const Holonomy two = loop_holonomy(
            {AmbientPoint::sphere(Vec3(0, 0, 1)), AmbientPoint::sphere(Vec3(1, 0, 0))});
        const Holonomy oct = loop_holonomy({AmbientPoint::sphere(Vec3(1, 0, 0)),
                                            AmbientPoint::sphere(Vec3(0, 1, 0)),
                                            AmbientPoint::sphere(Vec3(0, 0, 1))});
        if (two.deviation > 1e-13) {
            msg = "two-point loop deviates: " + fmt17(two.deviation);
            return false;
        }
        if (!close(oct.deviation, 2.0, 1e-10)) {
            msg = "octant deviation: " + num_pair(oct.deviation, 2.0);
            return false;
        }
        return true;
    });
    add("Gaussian curvature: flat, round, conformal", [](std::string& msg) {
        for (const double k : gauss_curvature(chart_metric_field(pgrid(12))).values)
            if (std::abs(k) > 1e-12) {
                msg = "flat metric not flat";
                return false;
            }
        const ChartGrid g = sgrid(32);
        const ScalarField k = gauss_curvature(chart_metric_field(g));
        for (int i = 1; i < g.nu - 1; ++i)
            for (int j = 1; j < g.nv - 1; ++j)
                if (!close(k.at(i, j), 1.0, 2e-2)) {
                    msg = "round curvature: " + num_pair(k.at(i, j), 1.0);
                    return false;
                }
        return true;
    });

    // --- fields and operators ---
    add("configuration differential: plane identity, sphere pullback", [](std::string& msg) {
        const ChartGrid pg = pgrid(10);
        const ConfigurationField incl = inclusion_field(pg);
        for (int i = 0; i < pg.nu; ++i)
            for (int j = 0; j < pg.nv; ++j)
                if ((configuration_differential(incl, i, j) - Mat2::Identity()).norm() > 1e-12) {
                    msg = "plane inclusion differential not identity";
                    return false;
                }
        const ChartGrid g = sgrid(48);
        const ConfigurationField si = inclusion_field(g);
        for (int i : {0, 23, 47})
            for (int j : {0, 29, 47}) {
                const Mat2 F = configuration_differential(si, i, j);
                if ((F.transpose() * F - g.metric(i, j)).norm() > 1e-6) {
                    msg = "pullback metric mismatch";
                    return false;
                }
            }
        return true;
    });
    add("covariant derivative: flat constants and round-chart symbol", [](std::string& msg) {
        const ChartGrid pg = pgrid(10);
        VectorField c = VectorField::zeros(pg);
        for (Vec3& w : c.values) w = Vec3(0.4, 0.7, 0);
        for (const Mat2& m : covariant_derivative(c, chart_metric_field(pg)).values)
            if (m.norm() > 1e-12) {
                msg = "flat constant has nonzero derivative";
                return false;
            }
        const ChartGrid g = sgrid(24);
        const ChristoffelField gamma = christoffel_symbols(chart_metric_field(g));
        const int i = g.nu / 2, j = g.nv / 2;
        const double want = -std::sin(g.u(i)) * std::cos(g.u(i));
        if (!close(gamma.at(i, j)[0](1, 1), want, 5e-3)) {
            msg = "Gamma^theta_phiphi: " + num_pair(gamma.at(i, j)[0](1, 1), want);
            return false;
        }
        return true;
    });
    add("deformation operator: zero, Killing, radial scaling", [](std::string& msg) {
        const ChartGrid g = sgrid(24);
        const MetricField s = chart_metric_field(g);
        for (const Mat2& m : deformation_operator(VectorField::zeros(g), s).values)
            if (m.norm() != 0.0) {
                msg = "zero field maps to nonzero tensor";
                return false;
            }
        for (int k = 0; k < 3; ++k)
            if (l2_norm(deformation_operator(killing_field(g, k), s), s) > 5e-3) {
                msg = "Killing generator " + std::to_string(k) + " not annihilated";
                return false;
            }
        ChartGrid pg = pgrid(10);
        pg.u0 = pg.v0 = -1.0;
        const MetricField ps = chart_metric_field(pg);
        VectorField radial = VectorField::zeros(pg);
        for (int i = 0; i < pg.nu; ++i)
            for (int j = 0; j < pg.nv; ++j) radial.at(i, j) = Vec3(pg.u(i), pg.v(j), 0);
        for (const Mat2& m : deformation_operator(radial, ps).values)
            if ((m - 2.0 * Mat2::Identity()).norm() > 1e-12) {
                msg = "radial field strain is not 2 Id";
                return false;
            }
        return true;
    });
    add("quadrature: metric self-pairing and zone area", [](std::string& msg) {
        const ChartGrid g = sgrid(32);
        const MetricField s = chart_metric_field(g);
        TwoTensorField st = TwoTensorField::zeros(g);
        st.values = s.values;
        if (!close(l2_inner(st, st, s), 2.0 * volume(s), 1e-12 * volume(s))) {
            msg = "<s,s> != 2 Vol";
            return false;
        }
        const double exact = (std::cos(0.97) - std::cos(2.17)) * 1.6;
        if (!close(volume(s), exact, 1e-3 * exact)) {
            msg = "zone area: " + num_pair(volume(s), exact);
            return false;
        }
        return true;
    });
    add("neg2 sobolev: zero, constant, contraction", [](std::string& msg) {
        const ChartGrid g = pgrid(12);
        const MetricField s = chart_metric_field(g);
        if (neg2_sobolev_norm(ScalarField::zeros(g), s) != 0.0) {
            msg = "zero input has nonzero norm";
            return false;
        }
        ScalarField c = ScalarField::zeros(g);
        for (double& v : c.values) v = 2.0;
        if (!close(neg2_sobolev_norm(c, s), 2.0, 1e-8)) {
            msg = "constant on unit patch: " + num_pair(neg2_sobolev_norm(c, s), 2.0);
            return false;
        }
        ScalarField b = ScalarField::zeros(g);
        for (int i = 0; i < g.nu; ++i)
            for (int j = 0; j < g.nv; ++j) b.at(i, j) = std::sin(M_PI * g.u(i)) * std::sin(M_PI * g.v(j));
        if (neg2_sobolev_norm(b, s) > l2_norm(b, s)) {
            msg = "not a contraction on the bump";
            return false;
        }
        return true;
    });
    add("curvature variation: zero, conformal oracle, annihilation", [](std::string& msg) {
        ChartGrid pg = pgrid(12);
        pg.u0 = pg.v0 = -1.0;
        const MetricField ps = chart_metric_field(pg);
        TwoTensorField sigma = TwoTensorField::zeros(pg);
        for (int i = 0; i < pg.nu; ++i)
            for (int j = 0; j < pg.nv; ++j) sigma.at(i, j) = 2.0 * pg.u(i) * pg.u(i) * ps.at(i, j);
        for (const double k : curvature_variation(sigma, ps).values)
            if (!close(k, -2.0, 1e-6)) {
                msg = "conformal variation: " + num_pair(k, -2.0);
                return false;
            }
        const ChartGrid g = sgrid(48);
        const MetricField s = chart_metric_field(g);
        HSpec hs;
        hs.generator = HGenerator::LieAnalytic;
        hs.seed = 8;
        hs.max_mode = 1;
        const TwoTensorField lie = make_h(hs, s);
        const double ratio = l2_norm(curvature_variation(lie, s), s) / l2_norm(lie, s);
        if (ratio > 5e-3) {
            msg = "deformation range not annihilated: ratio " + fmt17(ratio);
            return false;
        }
        return true;
    });

    // --- energies ---
    add("nonlinear energy: compatible cases vanish", [](std::string& msg) {
        const ChartGrid pg = pgrid(10);
        const MetricField ps = chart_metric_field(pg);
        if (nonlinear_energy(NonlinearEnergyInput{inclusion_field(pg), ps, ps, 1.0}) > 1e-14) {
            msg = "plane inclusion not zero energy";
            return false;
        }
        const ChartGrid g = sgrid(32);
        const MetricField s = chart_metric_field(g);
        const double e = nonlinear_energy(NonlinearEnergyInput{inclusion_field(g), s, s, 1.0});
        if (e > 1e-10) {
            msg = "sphere inclusion energy " + fmt17(e);
            return false;
        }
        return true;
    });
    add("nonlinear energy: rotation invariance and conformal value", [](std::string& msg) {
        const ChartGrid g = sgrid(48);
        const MetricField s = chart_metric_field(g);
        MetricField geps = s;
        for (Mat2& m : geps.values) m *= 1.21;
        NonlinearEnergyInput in{inclusion_field(g), geps, s, 0.1};
        const double base = nonlinear_energy(in);
        if (!close(base, 2.0 * volume(s), 1e-6 * 2.0 * volume(s))) {
            msg = "conformal energy: " + num_pair(base, 2.0 * volume(s));
            return false;
        }
        Rng rng(1005);
        const AmbientIsometry psi = AmbientIsometry::random(rng, Ambient::UnitSphere);
        for (Vec3& p : in.f.values) p = psi.rot * p;
        if (!close(nonlinear_energy(in), base, 1e-12 * std::max(1.0, base))) {
            msg = "left rotation changes the energy";
            return false;
        }
        return true;
    });
    add("nonlinear gradient: zero at compatible minimum, tangency", [](std::string& msg) {
        const ChartGrid pg = pgrid(10);
        const MetricField ps = chart_metric_field(pg);
        for (const Vec3& w :
             nonlinear_energy_gradient(NonlinearEnergyInput{inclusion_field(pg), ps, ps, 1.0}).values)
            if (w.norm() > 1e-10) {
                msg = "gradient at the plane minimum is " + fmt17(w.norm());
                return false;
            }
        const ChartGrid g = sgrid(12);
        const MetricField s = chart_metric_field(g);
        MetricField geps = s;
        for (Mat2& m : geps.values) m *= 1.21;
        const NonlinearEnergyInput in{inclusion_field(g), geps, s, 0.1};
        const VectorField grad = nonlinear_energy_gradient(in);
        for (int n = 0; n < g.num_nodes(); ++n)
            if (std::abs(grad.values[n].dot(in.f.values[n])) >
                1e-10 * std::max(1.0, grad.values[n].norm())) {
                msg = "gradient not tangent along f";
                return false;
            }
        return true;
    });
    add("limit energy: trivial values and quadratic scaling", [](std::string& msg) {
        const ChartGrid g = sgrid(24);
        const MetricField s = chart_metric_field(g);
        if (limit_energy(LimitEnergyInput{VectorField::zeros(g), TwoTensorField::zeros(g), s}) != 0.0) {
            msg = "E_0(0,0) != 0";
            return false;
        }
        USpec ks;
        ks.generator = UGenerator::Killing;
        ks.killing_index = 1;
        if (limit_energy(LimitEnergyInput{make_u(ks, g), TwoTensorField::zeros(g), s}) > 1e-5) {
            msg = "Killing energy not negligible";
            return false;
        }
        HSpec conf;
        conf.generator = HGenerator::ConformalConst;
        conf.amplitude = 2.0;
        const double anchor = limit_energy(LimitEnergyInput{VectorField::zeros(g), make_h(conf, s), s});
        if (!close(anchor, 2.0 * volume(s), 1e-12 * volume(s))) {
            msg = "anchor: " + num_pair(anchor, 2.0 * volume(s));
            return false;
        }
        HSpec hs;
        hs.seed = 5;
        USpec us;
        us.seed = 6;
        LimitEnergyInput in{make_u(us, g), make_h(hs, s), s};
        const double base = limit_energy(in);
        for (Vec3& w : in.u.values) w *= 2.0;
        for (Mat2& m : in.h.values) m *= 2.0;
        if (!close(limit_energy(in), 4.0 * base, 1e-12 * std::max(1.0, 4.0 * base))) {
            msg = "scaling is not quadratic";
            return false;
        }
        return true;
    });
    add("Q_eps: conformal case, isometry property, flat identity", [](std::string& msg) {
        const ChartGrid g = sgrid(16);
        const MetricField s = chart_metric_field(g);
        MetricField geps = s;
        for (Mat2& m : geps.values) m *= 1.21;
        const auto [q, xi] = build_q_eps(geps, s, 0.1);
        for (int n = 0; n < g.num_nodes(); ++n)
            if ((q.values[n] - 1.1 * Mat2::Identity()).norm() > 1e-12 ||
                (xi.values[n] - Mat2::Identity()).norm() > 1e-11) {
                msg = "conformal Q/xi wrong";
                return false;
            }
        HSpec hs;
        hs.seed = 9;
        hs.amplitude = 0.4;
        const TwoTensorField h = make_h(hs, s);
        const auto [q2, xi2] = build_q_eps(perturbed_metric(s, h, 0.2), s, 0.2);
        for (int n = 0; n < g.num_nodes(); ++n) {
            if ((q2.values[n].transpose() * s.values[n] * q2.values[n] - perturbed_metric(s, h, 0.2).values[n])
                    .norm() > 1e-10 * std::max(1.0, s.values[n].norm())) {
                msg = "Q not an isometry";
                return false;
            }
            const Mat2 flat = s.values[n] * xi_limit(s.values[n], h.values[n]);
            if ((flat + flat.transpose() - h.values[n]).norm() > 1e-12 * std::max(1.0, h.values[n].norm())) {
                msg = "2 sym xi-flat != h";
                return false;
            }
        }
        return true;
    });

    // --- optimization ---
    add("descent: compatible plane minimum and monotone trace", [](std::string& msg) {
        const ChartGrid g = pgrid(10);
        const MetricField s = chart_metric_field(g);
        USpec us;
        us.amplitude = 0.02;
        us.seed = 7;
        const VectorField w = make_u(us, g);
        ConfigurationField f0 = inclusion_field(g);
        for (int n = 0; n < g.num_nodes(); ++n) f0.values[n] += w.values[n];
        DescentOptions opts;
        opts.max_iters = 1500;
        opts.grad_tol = 1e-12;
        const DescentResult res =
            minimize_nonlinear(f0, NonlinearEnergyInput{f0, s, s, 1.0}, opts);
        if (res.energy > 1e-10) {
            msg = "residual energy " + fmt17(res.energy);
            return false;
        }
        for (size_t k = 1; k < res.trace.size(); ++k)
            if (res.trace[k].energy > res.trace[k - 1].energy) {
                msg = "trace increased";
                return false;
            }
        return true;
    });
    add("minimize_limit: zero case and deformation range", [](std::string& msg) {
        const ChartGrid g = sgrid(24);
        const MetricField s = chart_metric_field(g);
        const LimitMinimum zero =
            minimize_limit(LimitEnergyInput{VectorField::zeros(g), TwoTensorField::zeros(g), s});
        if (zero.e0_min != 0.0) {
            msg = "h = 0 has nonzero minimum";
            return false;
        }
        HSpec hs;
        hs.generator = HGenerator::DefRange;
        hs.seed = 19;
        hs.amplitude = 0.4;
        const TwoTensorField h = make_h(hs, s);
        const LimitMinimum lm = minimize_limit(LimitEnergyInput{VectorField::zeros(g), h, s});
        if (lm.e0_min > 1e-8 * l2_inner(h, h, s)) {
            msg = "range case minimum " + fmt17(lm.e0_min);
            return false;
        }
        return true;
    });
    add("projection: orthogonality, Pythagoras, idempotence", [](std::string& msg) {
        const ChartGrid g = sgrid(24);
        const MetricField s = chart_metric_field(g);
        HSpec hs;
        hs.seed = 37;
        hs.amplitude = 0.35;
        const TwoTensorField h = make_h(hs, s);
        const ProjectionResult pr = project_parallel(h, s);
        const double h2 = l2_inner(h, h, s);
        if (std::abs(l2_inner(pr.h_par, pr.h_perp, s)) > 1e-8 * h2) {
            msg = "parallel and perpendicular parts not orthogonal";
            return false;
        }
        const double pyth = l2_inner(pr.h_par, pr.h_par, s) + l2_inner(pr.h_perp, pr.h_perp, s);
        if (!close(pyth, h2, 1e-8 * h2)) {
            msg = "Pythagoras: " + num_pair(pyth, h2);
            return false;
        }
        const ProjectionResult again = project_parallel(pr.h_perp, s);
        if (l2_norm(again.h_par, s) > 1e-5 * l2_norm(pr.h_perp, s)) {
            msg = "projection is not idempotent";
            return false;
        }
        return true;
    });

    // --- rigidity and displacement ---
    add("best isometry: exact rotation recovery and equivariance", [](std::string& msg) {
        const ChartGrid g = sgrid(12);
        Rng rng(1006);
        const AmbientIsometry psi = AmbientIsometry::random(rng, Ambient::UnitSphere);
        ConfigurationField f = inclusion_field(g);
        for (Vec3& p : f.values) p = psi.rot * p;
        const IsometryFit fit = best_isometry(f);
        if ((fit.rotation - psi.rot).norm() > 1e-12 || fit.l2_residual > 1e-12 ||
            fit.w12_residual > 1e-10 || fit.ratio > 1e-6) {
            msg = "exact isometry not recovered";
            return false;
        }
        return true;
    });
    add("recovery/extract displacement inversion", [](std::string& msg) {
        const ChartGrid g = sgrid(12);
        Rng rng(1007);
        const AmbientIsometry psi = AmbientIsometry::random(rng, Ambient::UnitSphere);
        USpec us;
        us.seed = 23;
        us.amplitude = 0.4;
        const VectorField u = make_u(us, g);
        const ConfigurationField f = recovery_sequence(u, psi, 0.1);
        const VectorField back = extract_displacement(f, psi, 0.1);
        for (int n = 0; n < g.num_nodes(); ++n)
            if ((back.values[n] - u.values[n]).norm() > 1e-12 * std::max(1.0, u.values[n].norm())) {
                msg = "extract(recovery) != u";
                return false;
            }
        const ConfigurationField fid = recovery_sequence(VectorField::zeros(g), psi, 0.1);
        for (const Vec3& w : extract_displacement(fid, psi, 0.1).values)
            if (w.norm() != 0.0) {
                msg = "pure isometry has nonzero displacement";
                return false;
            }
        return true;
    });
    add("transported gradient: trivial case and rigidity ratio guard", [](std::string& msg) {
        const ChartGrid g = sgrid(16);
        Rng rng(1008);
        const AmbientIsometry psi = AmbientIsometry::random(rng, Ambient::UnitSphere);
        const MatrixField tg =
            transported_gradient(recovery_sequence(VectorField::zeros(g), psi, 0.1), psi, 0.1);
        for (const Mat2& m : tg.values)
            if (m.norm() > 1e-3) {
                msg = "transported gradient of an isometry " + fmt17(m.norm());
                return false;
            }
        const IsometryFit fit = rigidity_trial(41, 0.0, sgrid(12));
        if (fit.ratio > 1e-6) {
            msg = "zero-amplitude ratio " + fmt17(fit.ratio);
            return false;
        }
        return true;
    });

    // --- lab plumbing ---
    add("config round-trip and strict key rejection", [](std::string& msg) {
        ExperimentConfig cfg;
        cfg.ambient = Ambient::UnitSphere;
        cfg.grid = sgrid(16);
        cfg.h_spec.seed = 11;
        cfg.h_spec.amplitude = 0.25;
        if (!(parse_config(serialize_config(cfg)) == cfg)) {
            msg = "parse(serialize(cfg)) != cfg";
            return false;
        }
        json j = serialize_config(cfg);
        j["unexpected"] = 1;
        try {
            parse_config(j);
            msg = "unknown key accepted";
            return false;
        } catch (const ConfigError&) {
        }
        return true;
    });
    add("gamma sweep determinism (byte-identical reports)", [](std::string& msg) {
        ExperimentConfig cfg;
        cfg.ambient = Ambient::UnitSphere;
        cfg.grid = sgrid(12);
        cfg.h_spec.seed = 3;
        cfg.h_spec.amplitude = 0.25;
        cfg.eps_list = {0.2, 0.1};
        const GammaReport a = run_gamma_sweep(cfg);
        const GammaReport b = run_gamma_sweep(cfg);
        if (gamma_csv(a) != gamma_csv(b) || gamma_json(a) != gamma_json(b)) {
            msg = "repeated runs differ";
            return false;
        }
        if (!a.ok()) {
            msg = "sweep rows reported errors";
            return false;
        }
        return true;
    });

    return checks;
}

}  // namespace selftest_detail

// Runs every quick contract check at small grids and prints one line per
// check. Returns 0 iff everything passed. Output contains no timing and is
// byte-identical across repeated runs and thread settings.
inline int run_selftest(std::ostream& os, const SelftestOptions& opts = {}) {
    const auto checks = selftest_detail::build_checks(opts);
    int failures = 0;
    os << "wielab selftest (" << checks.size() << " checks)\n";
    for (const auto& check : checks) {
        std::string msg;
        bool pass = false;
        try {
            pass = check.run(msg);
        } catch (const std::exception& e) {
            msg = std::string("exception: ") + e.what();
        }
        if (!pass) ++failures;
        os << (pass ? "[PASS] " : "[FAIL] ") << check.name;
        if (!pass && !msg.empty()) os << "  (" << msg << ")";
        os << "\n";
    }
    os << (failures == 0 ? "selftest: all checks passed\n"
                         : "selftest: " + std::to_string(failures) + " check(s) failed\n");
    return failures == 0 ? 0 : 1;
}

}  // namespace wielab
