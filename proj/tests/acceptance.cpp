// Acceptance suite: runs the project-level checks end to end and prints one
// PASS/FAIL line per criterion. Exit code is the number of failures.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <vector>

#include "wielab/selftest.hpp"

using namespace wielab;

namespace {

using Clock = std::chrono::steady_clock;

struct Criterion {
    std::string name;
    std::function<bool(std::string&)> run;
};

ChartGrid sphere_grid(int n) {
    ChartGrid g;
    g.chart = Chart::Spherical;
    g.u0 = 0.97;
    g.u1 = 2.17;
    g.v0 = 0.0;
    g.v1 = 1.6;
    g.nu = g.nv = n;
    return g;
}

Mat2 rotation2(double a) {
    Mat2 r;
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return r;
}

double least_squares_slope_log2(const std::vector<double>& eps, const std::vector<double>& err) {
    // slope of log(err) against log(eps)
    const int n = static_cast<int>(eps.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = std::log(eps[i]), y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// shared sweep results, produced by criterion 4 and consumed by criterion 5
std::vector<GammaReport> g_sweeps;

bool criterion1_hessian_identity(std::string& msg) {
    Rng rng(101);
    const double t = 1e-4;
    double worst_rel = 0.0, worst_first = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const Mat2 q = rotation2(rng.uniform(0.0, 2.0 * M_PI));
        Mat2 b;
        b << rng.normal(), rng.normal(), rng.normal(), rng.normal();
        b /= b.norm();
        const auto w = [&](double tt) {
            const double d = dist_to_so(q + tt * b).distance;
            return d * d;
        };
        const double w0 = w(0.0), wp = w(t), wm = w(-t);
        const double fd2 = (wp - 2.0 * w0 + wm) / (t * t);
        const double fd1 = (wp - wm) / (2.0 * t);
        const Mat2 sym_bqt = 0.5 * (b * q.transpose() + q * b.transpose());
        const double model = 2.0 * sym_bqt.squaredNorm();
        worst_rel = std::max(worst_rel, std::abs(fd2 - model) / std::max(1e-12, model));
        worst_first = std::max(worst_first, std::abs(fd1));
    }
    msg = "max relative Hessian error " + fmt17(worst_rel) + ", max first derivative " + fmt17(worst_first);
    return worst_rel <= 1e-5 && worst_first <= 1e-7;
}

bool criterion2_qeps_expansion(std::string& msg) {
    const ChartGrid g = sphere_grid(64);
    const MetricField s = chart_metric_field(g);
    const std::vector<double> eps_list = {0.2, 0.1, 0.05, 0.025};
    double worst_slope = 10.0, worst_flat = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        HSpec hs;
        hs.seed = seed;
        hs.amplitude = 0.4;
        const TwoTensorField h = make_h(hs, s);
        const MatrixField xi_ref = xi_limit_field(s, h);
        // identity h = 2 sym(xi^flat) for the limit object
        TwoTensorField recon = TwoTensorField::zeros(g);
        for (int n = 0; n < g.num_nodes(); ++n) {
            const Mat2 flat = s.values[n] * xi_ref.values[n];
            recon.values[n] = flat + flat.transpose() - h.values[n];
        }
        worst_flat = std::max(worst_flat, l2_norm(recon, s) / l2_norm(h, s));

        std::vector<double> errs;
        for (const double eps : eps_list) {
            const auto [q, xi] = build_q_eps(perturbed_metric(s, h, eps), s, eps);
            MatrixField diff = xi;
            for (int n = 0; n < g.num_nodes(); ++n) diff.values[n] -= xi_ref.values[n];
            errs.push_back(l2_norm(diff, s));
        }
        worst_slope = std::min(worst_slope, least_squares_slope_log2(eps_list, errs));
    }
    msg = "observed order " + fmt17(worst_slope) + ", flat identity residual " + fmt17(worst_flat);
    return worst_slope >= 0.9 && worst_flat <= 1e-8;
}

bool criterion3_conformal_anchor(std::string& msg) {
    const ChartGrid g = sphere_grid(64);
    const MetricField s = chart_metric_field(g);
    HSpec conf;
    conf.generator = HGenerator::ConformalConst;
    conf.amplitude = 2.0;
    const TwoTensorField h = make_h(conf, s);
    const double e0 = limit_energy(LimitEnergyInput{VectorField::zeros(g), h, s});
    const ConfigurationField incl = inclusion_field(g);
    double worst = 0.0;
    for (const double eps : {0.2, 0.1, 0.05, 0.025}) {
        MetricField geps = s;
        for (Mat2& m : geps.values) m *= (1.0 + eps) * (1.0 + eps);
        const double e = nonlinear_energy(NonlinearEnergyInput{incl, geps, s, eps});
        worst = std::max(worst, std::abs(e - e0) / e0);
    }
    msg = "max relative mismatch " + fmt17(worst) + " (E_0(0) = " + fmt17(e0) + ")";
    return worst <= 1e-6;
}

bool criterion4_gamma_consistency(std::string& msg) {
    g_sweeps.clear();
    bool ok = true;
    std::ostringstream detail;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        ExperimentConfig cfg;
        cfg.grid = sphere_grid(96);
        cfg.h_spec.seed = 10 + seed;
        cfg.h_spec.amplitude = 0.3;
        cfg.u_mode = SweepDisplacement::Seeded;
        cfg.u_spec.seed = 20 + seed;
        cfg.u_spec.amplitude = 0.3;
        cfg.eps_list = {0.2, 0.1, 0.05, 0.025};
        const GammaReport rep = run_gamma_sweep(cfg);
        g_sweeps.push_back(rep);
        if (!rep.ok()) {
            msg = "sweep " + std::to_string(seed) + " aborted";
            return false;
        }
        double prev = std::numeric_limits<double>::max();
        for (const GammaRow& r : rep.rows) {
            if (!(std::abs(r.gap) < prev)) ok = false;
            prev = std::abs(r.gap);
        }
        const double final_rel = std::abs(rep.rows.back().gap) / rep.e0_limit;
        if (!(final_rel <= 0.05)) ok = false;
        detail << " seed" << seed << ": final |gap|/E_0 = " << fmt17(final_rel);
    }
    msg = detail.str();
    return ok;
}

bool criterion5_lower_bound(std::string& msg) {
    // one minimize-mode sweep joins the recovery sweeps of criterion 4
    ExperimentConfig cfg;
    cfg.grid = sphere_grid(32);
    cfg.h_spec.seed = 31;
    cfg.h_spec.amplitude = 0.3;
    cfg.mode = SweepMode::Minimize;
    cfg.eps_list = {0.2, 0.1, 0.05, 0.025};
    cfg.optimizer.max_iters = 60;
    cfg.optimizer.grad_tol = 1e-10;
    const GammaReport min_rep = run_gamma_sweep(cfg);
    if (!min_rep.ok()) {
        msg = "minimize sweep aborted";
        return false;
    }
    std::vector<const GammaReport*> reports;
    for (const GammaReport& r : g_sweeps) reports.push_back(&r);
    reports.push_back(&min_rep);

    double worst_margin = std::numeric_limits<double>::max();
    int rows_checked = 0;
    for (const GammaReport* rep : reports)
        for (const GammaRow& r : rep->rows) {
            if (r.eps > 0.05) continue;
            ++rows_checked;
            worst_margin = std::min(worst_margin, r.e_eps - (0.95 * rep->e0_min - 1e-8));
        }
    msg = std::to_string(rows_checked) + " rows, worst margin " + fmt17(worst_margin);
    return rows_checked >= 8 && worst_margin >= 0.0;
}

bool criterion6_minimum_formula(std::string& msg) {
    const ChartGrid g = sphere_grid(64);
    const MetricField s = chart_metric_field(g);
    double worst_rel = 0.0, worst_ortho = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        HSpec hs;
        hs.seed = 40 + seed;
        hs.amplitude = 0.35;
        const TwoTensorField h = make_h(hs, s);
        const ProjectionResult pr = project_parallel(h, s);
        const double h2 = l2_inner(h, h, s);
        const double m_opt = limit_energy(LimitEnergyInput{pr.u_star, h, s});
        const double m_proj = 0.25 * (h2 - l2_inner(pr.h_par, pr.h_par, s));
        worst_rel = std::max(worst_rel, std::abs(m_opt - m_proj) / std::max(1e-300, m_opt));
        worst_ortho = std::max(worst_ortho, std::abs(l2_inner(pr.h_par, pr.h_perp, s)) / h2);
    }
    msg = "max route disagreement " + fmt17(worst_rel) + ", max orthogonality defect " + fmt17(worst_ortho);
    return worst_rel <= 1e-6 && worst_ortho <= 1e-8;
}

bool criterion7_killing_kernel(std::string& msg) {
    double r64 = 0.0, r128 = 0.0;
    for (const int n : {64, 128}) {
        const ChartGrid g = sphere_grid(n);
        const MetricField s = chart_metric_field(g);
        double worst = 0.0;
        for (int k = 0; k < 3; ++k) {
            const VectorField u = killing_field(g, k);
            const double def = l2_norm(deformation_operator(u, s), s);
            const double w12 = std::sqrt(std::pow(l2_norm(u, s), 2) +
                                         std::pow(l2_norm(covariant_derivative(u, s), s), 2));
            worst = std::max(worst, def / w12);
        }
        (n == 64 ? r64 : r128) = worst;
    }
    const double order = std::log2(r64 / r128);
    msg = "ratio " + fmt17(r64) + " at 64^2, observed order " + fmt17(order);
    return r64 <= 1e-3 && order >= 1.8;
}

bool criterion8_curvature_annihilation(std::string& msg) {
    double r96 = 0.0, r128 = 0.0;
    for (const int n : {96, 128}) {
        const ChartGrid g = sphere_grid(n);
        const MetricField s = chart_metric_field(g);
        double worst = 0.0;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            HSpec hs;
            hs.generator = HGenerator::LieAnalytic;
            hs.seed = seed;
            hs.max_mode = 1;
            hs.amplitude = 0.4;
            const TwoTensorField lie = make_h(hs, s);
            worst = std::max(worst, l2_norm(curvature_variation(lie, s), s) / l2_norm(lie, s));
        }
        (n == 96 ? r96 : r128) = worst;
    }
    msg = "ratio " + fmt17(r96) + " at 96^2, " + fmt17(r128) + " at 128^2";
    return r96 <= 5e-3 && r128 < r96;
}

bool criterion9_rigidity_study(std::string& msg) {
    ExperimentConfig cfg;
    cfg.grid = sphere_grid(48);
    cfg.h_spec.seed = 1;
    cfg.rigidity_trials = 20;
    cfg.rigidity_amplitudes = {0.05, 0.1, 0.2};
    const RigidityReport rep = run_rigidity_study(cfg);
    msg = "max/median " + fmt17(rep.max_over_median) + ", amplitude spread " + fmt17(rep.amplitude_spread);
    return rep.max_over_median <= 10.0 && rep.amplitude_spread <= 3.0;
}

bool criterion10_energy_curvature(std::string& msg) {
    ExperimentConfig cfg;
    cfg.grid = sphere_grid(48);
    cfg.h_spec.seed = 1;
    cfg.h_spec.amplitude = 0.3;
    cfg.curvature_samples = 12;
    const CurvatureReport rep = run_energy_curvature(cfg);
    for (const CurvatureRow& r : rep.rows)
        if (!(r.c_curvature > 0.0)) {
            msg = "degenerate curvature norm in sample " + std::to_string(r.sample);
            return false;
        }
    // exact lambda^2 homogeneity on the first family member
    ExperimentConfig one = cfg;
    one.curvature_samples = 1;
    ExperimentConfig two = one;
    two.h_spec.amplitude *= 2.0;
    const CurvatureRow r1 = run_energy_curvature(one).rows[0];
    const CurvatureRow r2 = run_energy_curvature(two).rows[0];
    const double m_hom = std::abs(r2.m_optimizer - 4.0 * r1.m_optimizer) / (4.0 * r1.m_optimizer);
    const double c_hom = std::abs(r2.c_curvature - 4.0 * r1.c_curvature) / (4.0 * r1.c_curvature);
    msg = "spread " + fmt17(rep.spread) + ", homogeneity defect m " + fmt17(m_hom) + ", c " + fmt17(c_hom);
    return rep.spread <= 100.0 && m_hom <= 1e-6 && c_hom <= 1e-6;
}

bool criterion11_holonomy(std::string& msg) {
    const Holonomy oct = loop_holonomy({AmbientPoint::sphere(Vec3(1, 0, 0)),
                                        AmbientPoint::sphere(Vec3(0, 1, 0)),
                                        AmbientPoint::sphere(Vec3(0, 0, 1))});
    const double oct_err = std::abs(oct.deviation - 2.0);

    Rng rng(77);
    double max_ratio = 0.0;
    for (int trial = 0; trial < 60; ++trial) {
        // seeded triangle with perimeter spanning [0.01, 0.5]
        const double target = 0.01 * std::pow(50.0, trial / 59.0);
        Vec3 c(rng.normal(), rng.normal(), rng.normal());
        c.normalize();
        const AmbientPoint base = AmbientPoint::sphere(c);
        const Frame f = orthonormal_frame(base);
        std::vector<double> ang = {rng.uniform(0.0, 2.0), rng.uniform(2.2, 4.2), rng.uniform(4.4, 6.2)};
        std::vector<AmbientPoint> tri;
        for (const double a : ang)
            tri.push_back(sphere_exp(base, (target / 3.0) * (std::cos(a) * f.e1 + std::sin(a) * f.e2)));
        double perim = 0.0;
        for (int k = 0; k < 3; ++k) perim += sphere_angle(tri[k], tri[(k + 1) % 3]);
        if (perim < 1e-3) continue;
        max_ratio = std::max(max_ratio, loop_holonomy(tri).deviation / (perim * perim));
    }
    msg = "octant deviation error " + fmt17(oct_err) + ", max deviation/perimeter^2 " + fmt17(max_ratio);
    return oct_err <= 1e-10 && max_ratio <= 0.075;
}

bool criterion12_selftest(std::string& msg) {
    const auto t0 = Clock::now();
    std::ostringstream a, b, c;
    const int code = run_selftest(a);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    run_selftest(b);
    SelftestOptions threaded;
    threaded.threads = 4;
    run_selftest(c, threaded);
    const bool identical = a.str() == b.str() && a.str() == c.str();
    msg = "exit " + std::to_string(code) + ", " + fmt17(secs) + " s, byte-identical " +
          (identical ? "yes" : "no");
    return code == 0 && secs <= 120.0 && identical;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"1 Hessian identity of dist^2(., SO(2))", criterion1_hessian_identity},
        {"2 Q_eps first-order expansion and flat identity", criterion2_qeps_expansion},
        {"3 conformal anchor E_eps(iota) = E_0(0) = 2 Vol", criterion3_conformal_anchor},
        {"4 Gamma-limit consistency along recovery sweeps", criterion4_gamma_consistency},
        {"5 lower-bound inequality on sweep rows", criterion5_lower_bound},
        {"6 minimum formula: optimizer vs projector", criterion6_minimum_formula},
        {"7 Killing kernel of the deformation operator", criterion7_killing_kernel},
        {"8 curvature variation annihilates the deformation range", criterion8_curvature_annihilation},
        {"9 empirical rigidity-constant study", criterion9_rigidity_study},
        {"10 energy-curvature equivalence band", criterion10_energy_curvature},
        {"11 holonomy: octant value and quadratic smallness", criterion11_holonomy},
        {"12 selftest: clean exit, runtime, determinism", criterion12_selftest},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = Clock::now();
        std::string msg;
        bool pass = false;
        try {
            pass = c.run(msg);
        } catch (const std::exception& e) {
            msg = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        if (!pass) ++failures;
        std::printf("[%s] criterion %s  (%.2f s)%s%s\n", pass ? "PASS" : "FAIL", c.name.c_str(), secs,
                    msg.empty() ? "" : " -- ", msg.c_str());
        std::fflush(stdout);
    }
    std::printf(failures == 0 ? "acceptance: all 12 criteria passed\n"
                              : "acceptance: %d criterion(s) failed\n",
                failures);
    return failures;
}
