#pragma once

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "wielab/optimize.hpp"
#include "wielab/rigidity.hpp"

namespace wielab {

using nlohmann::json;

enum class SweepMode { Recovery, Minimize };

// Which displacement the sweep recovers: the E_0 minimizer, the zero field, or
// a seeded smooth field. The Gamma-limit statement holds along recovery
// sequences of any displacement; the minimizer is the default.
enum class SweepDisplacement { Minimizer, Zero, Seeded };

// Declarative experiment description. Parsed from a single JSON file with
// strict unknown-key rejection so archived experiments stay diffable.
struct ExperimentConfig {
    Ambient ambient = Ambient::UnitSphere;
    ChartGrid grid;
    HSpec h_spec;
    std::vector<double> eps_list = {0.2, 0.1, 0.05, 0.025};
    SweepMode mode = SweepMode::Recovery;
    SweepDisplacement u_mode = SweepDisplacement::Minimizer;
    USpec u_spec;
    DescentOptions optimizer;
    int rigidity_trials = 20;
    std::vector<double> rigidity_amplitudes = {0.05, 0.1, 0.2};
    int curvature_samples = 12;
    std::string output_prefix = "report";

    bool operator==(const ExperimentConfig&) const = default;

    void validate() const {
        grid.validate();
        h_spec.validate();
        u_spec.validate();
        optimizer.validate();
        if ((ambient == Ambient::UnitSphere) != (grid.chart == Chart::Spherical))
            throw ConfigError("config: ambient and chart disagree");
        if (eps_list.empty()) throw ConfigError("config: eps_list must not be empty");
        for (size_t k = 0; k < eps_list.size(); ++k) {
            if (!(eps_list[k] > 0.0 && eps_list[k] <= 0.5))
                throw ConfigError("config: eps values must lie in (0, 0.5]");
            if (k > 0 && !(eps_list[k] < eps_list[k - 1]))
                throw ConfigError("config: eps_list must be strictly decreasing");
        }
        if (rigidity_trials < 1) throw ConfigError("config: rigidity trials must be >= 1");
        for (const double a : rigidity_amplitudes)
            if (!(a >= 0.0 && a <= 0.5)) throw ConfigError("config: rigidity amplitudes must lie in [0, 0.5]");
        if (curvature_samples < 1) throw ConfigError("config: curvature samples must be >= 1");
    }
};

namespace detail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* ctx) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* key : allowed)
            if (item.key() == key) ok = true;
        if (!ok) throw ConfigError(std::string("config: unknown key '") + item.key() + "' in " + ctx);
    }
}

inline HGenerator h_generator_from_string(const std::string& s) {
    if (s == "conformal_const") return HGenerator::ConformalConst;
    if (s == "conformal_trig") return HGenerator::ConformalTrig;
    if (s == "bump") return HGenerator::Bump;
    if (s == "def_range") return HGenerator::DefRange;
    if (s == "lie_analytic") return HGenerator::LieAnalytic;
    if (s == "trig") return HGenerator::Trig;
    throw ConfigError("config: unknown h generator '" + s + "'");
}

inline std::string to_string(HGenerator g) {
    switch (g) {
        case HGenerator::ConformalConst: return "conformal_const";
        case HGenerator::ConformalTrig: return "conformal_trig";
        case HGenerator::Bump: return "bump";
        case HGenerator::DefRange: return "def_range";
        case HGenerator::LieAnalytic: return "lie_analytic";
        case HGenerator::Trig: return "trig";
    }
    return "?";
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& j) {
    ExperimentConfig cfg;
    detail::check_keys(j, {"ambient", "grid", "h", "eps_list", "mode", "u_mode", "u", "optimizer",
                           "rigidity", "curvature", "output_prefix"},
                       "top level");
    if (!j.contains("ambient") || !j.contains("grid"))
        throw ConfigError("config: 'ambient' and 'grid' are required");

    const std::string ambient = j.at("ambient").get<std::string>();
    if (ambient == "sphere") {
        cfg.ambient = Ambient::UnitSphere;
        cfg.grid.chart = Chart::Spherical;
    } else if (ambient == "plane") {
        cfg.ambient = Ambient::EuclideanPlane;
        cfg.grid.chart = Chart::Cartesian;
    } else {
        throw ConfigError("config: ambient must be 'sphere' or 'plane'");
    }

    const json& jg = j.at("grid");
    detail::check_keys(jg, {"u_range", "v_range", "nu", "nv"}, "grid");
    const auto ur = jg.at("u_range").get<std::vector<double>>();
    const auto vr = jg.at("v_range").get<std::vector<double>>();
    if (ur.size() != 2 || vr.size() != 2) throw ConfigError("config: grid ranges must have two entries");
    cfg.grid.u0 = ur[0];
    cfg.grid.u1 = ur[1];
    cfg.grid.v0 = vr[0];
    cfg.grid.v1 = vr[1];
    cfg.grid.nu = jg.at("nu").get<int>();
    cfg.grid.nv = jg.at("nv").get<int>();

    if (j.contains("h")) {
        const json& jh = j.at("h");
        detail::check_keys(jh, {"generator", "amplitude", "seed", "max_mode"}, "h");
        if (jh.contains("generator"))
            cfg.h_spec.generator = detail::h_generator_from_string(jh.at("generator").get<std::string>());
        if (jh.contains("amplitude")) cfg.h_spec.amplitude = jh.at("amplitude").get<double>();
        if (jh.contains("seed")) cfg.h_spec.seed = jh.at("seed").get<std::uint64_t>();
        if (jh.contains("max_mode")) cfg.h_spec.max_mode = jh.at("max_mode").get<int>();
    }
    if (j.contains("eps_list")) cfg.eps_list = j.at("eps_list").get<std::vector<double>>();
    if (j.contains("mode")) {
        const std::string m = j.at("mode").get<std::string>();
        if (m == "recovery")
            cfg.mode = SweepMode::Recovery;
        else if (m == "minimize")
            cfg.mode = SweepMode::Minimize;
        else
            throw ConfigError("config: mode must be 'recovery' or 'minimize'");
    }
    if (j.contains("u_mode")) {
        const std::string m = j.at("u_mode").get<std::string>();
        if (m == "minimizer")
            cfg.u_mode = SweepDisplacement::Minimizer;
        else if (m == "zero")
            cfg.u_mode = SweepDisplacement::Zero;
        else if (m == "seeded")
            cfg.u_mode = SweepDisplacement::Seeded;
        else
            throw ConfigError("config: u_mode must be 'minimizer', 'zero' or 'seeded'");
    }
    if (j.contains("u")) {
        const json& ju = j.at("u");
        detail::check_keys(ju, {"amplitude", "seed", "max_mode"}, "u");
        if (ju.contains("amplitude")) cfg.u_spec.amplitude = ju.at("amplitude").get<double>();
        if (ju.contains("seed")) cfg.u_spec.seed = ju.at("seed").get<std::uint64_t>();
        if (ju.contains("max_mode")) cfg.u_spec.max_mode = ju.at("max_mode").get<int>();
    }
    if (j.contains("optimizer")) {
        const json& jo = j.at("optimizer");
        detail::check_keys(jo, {"max_iters", "step_init", "armijo_c", "grad_tol", "seed"}, "optimizer");
        if (jo.contains("max_iters")) cfg.optimizer.max_iters = jo.at("max_iters").get<int>();
        if (jo.contains("step_init")) cfg.optimizer.step_init = jo.at("step_init").get<double>();
        if (jo.contains("armijo_c")) cfg.optimizer.armijo_c = jo.at("armijo_c").get<double>();
        if (jo.contains("grad_tol")) cfg.optimizer.grad_tol = jo.at("grad_tol").get<double>();
        if (jo.contains("seed")) cfg.optimizer.seed = jo.at("seed").get<std::uint64_t>();
    }
    if (j.contains("rigidity")) {
        const json& jr = j.at("rigidity");
        detail::check_keys(jr, {"trials", "amplitudes"}, "rigidity");
        if (jr.contains("trials")) cfg.rigidity_trials = jr.at("trials").get<int>();
        if (jr.contains("amplitudes")) cfg.rigidity_amplitudes = jr.at("amplitudes").get<std::vector<double>>();
    }
    if (j.contains("curvature")) {
        const json& jc = j.at("curvature");
        detail::check_keys(jc, {"samples"}, "curvature");
        if (jc.contains("samples")) cfg.curvature_samples = jc.at("samples").get<int>();
    }
    if (j.contains("output_prefix")) cfg.output_prefix = j.at("output_prefix").get<std::string>();
    cfg.validate();
    return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
    }
    return parse_config(j);
}

inline json serialize_config(const ExperimentConfig& cfg) {
    json j;
    j["ambient"] = cfg.ambient == Ambient::UnitSphere ? "sphere" : "plane";
    j["grid"] = {{"u_range", {cfg.grid.u0, cfg.grid.u1}},
                 {"v_range", {cfg.grid.v0, cfg.grid.v1}},
                 {"nu", cfg.grid.nu},
                 {"nv", cfg.grid.nv}};
    j["h"] = {{"generator", detail::to_string(cfg.h_spec.generator)},
              {"amplitude", cfg.h_spec.amplitude},
              {"seed", cfg.h_spec.seed},
              {"max_mode", cfg.h_spec.max_mode}};
    j["eps_list"] = cfg.eps_list;
    j["mode"] = cfg.mode == SweepMode::Recovery ? "recovery" : "minimize";
    j["u_mode"] = cfg.u_mode == SweepDisplacement::Minimizer
                      ? "minimizer"
                      : (cfg.u_mode == SweepDisplacement::Zero ? "zero" : "seeded");
    j["u"] = {{"amplitude", cfg.u_spec.amplitude},
              {"seed", cfg.u_spec.seed},
              {"max_mode", cfg.u_spec.max_mode}};
    j["optimizer"] = {{"max_iters", cfg.optimizer.max_iters},
                      {"step_init", cfg.optimizer.step_init},
                      {"armijo_c", cfg.optimizer.armijo_c},
                      {"grad_tol", cfg.optimizer.grad_tol},
                      {"seed", cfg.optimizer.seed}};
    j["rigidity"] = {{"trials", cfg.rigidity_trials}, {"amplitudes", cfg.rigidity_amplitudes}};
    j["curvature"] = {{"samples", cfg.curvature_samples}};
    j["output_prefix"] = cfg.output_prefix;
    return j;
}

// --- deterministic report writers --------------------------------------------
// Hand-written JSON so numbers carry exactly 17 significant digits and the
// byte stream is reproducible.

class JsonWriter {
public:
    JsonWriter& begin() { return raw("{"); }
    JsonWriter& end() {
        trim_comma();
        return raw("}");
    }
    JsonWriter& key(const std::string& k) { return raw("\"" + k + "\":"); }
    JsonWriter& str(const std::string& k, const std::string& v) {
        return key(k).raw("\"" + v + "\",");
    }
    JsonWriter& num(const std::string& k, double v) { return key(k).raw(fmt17(v) + ","); }
    JsonWriter& integer(const std::string& k, long long v) {
        return key(k).raw(std::to_string(v) + ",");
    }
    JsonWriter& raw(const std::string& s) {
        out_ += s;
        return *this;
    }
    JsonWriter& trim_comma() {
        if (!out_.empty() && out_.back() == ',') out_.pop_back();
        return *this;
    }
    const std::string& text() const { return out_; }

private:
    std::string out_;
};

inline std::string grid_label(const ChartGrid& g) {
    return std::to_string(g.nu) + "x" + std::to_string(g.nv);
}

inline void append_config_metadata(JsonWriter& w, const ExperimentConfig& cfg) {
    w.str("ambient", cfg.ambient == Ambient::UnitSphere ? "sphere" : "plane");
    w.key("grid").begin();
    w.num("u0", cfg.grid.u0).num("u1", cfg.grid.u1).num("v0", cfg.grid.v0).num("v1", cfg.grid.v1);
    w.integer("nu", cfg.grid.nu).integer("nv", cfg.grid.nv);
    w.end().raw(",");
    w.key("h").begin();
    w.str("generator", detail::to_string(cfg.h_spec.generator));
    w.num("amplitude", cfg.h_spec.amplitude);
    w.integer("seed", static_cast<long long>(cfg.h_spec.seed));
    w.integer("max_mode", cfg.h_spec.max_mode);
    w.end().raw(",");
}

// --- gamma sweep ---------------------------------------------------------------

struct GammaRow {
    double eps = 0.0;
    double e_eps = 0.0;
    double e0_limit = 0.0;  // E_0 of the swept displacement (equals e0_min by default)
    double gap = 0.0;       // e_eps - e0_limit
    double displacement_l2_err = 0.0;
    std::string error;  // nonempty when the row aborted
};

struct GammaReport {
    ExperimentConfig cfg;
    std::vector<GammaRow> rows;
    double e0_limit = 0.0;          // Gamma-limit value of the swept displacement
    double e0_min = 0.0;            // minimum of E_0, from the deflated solve
    double e0_min_projector = 0.0;  // 1/4 (|h|^2 - |h_par|^2), the independent route
    double wall_seconds = 0.0;      // console diagnostics only, never serialized
    std::vector<std::vector<TraceRow>> traces;  // one per row in minimize mode

    bool ok() const {
        return std::all_of(rows.begin(), rows.end(), [](const GammaRow& r) { return r.error.empty(); });
    }
};

inline GammaReport run_gamma_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    GammaReport rep;
    rep.cfg = cfg;
    const MetricField s = chart_metric_field(cfg.grid);
    const TwoTensorField h = make_h(cfg.h_spec, s);
    const ProjectionResult pr = project_parallel(h, s);
    rep.e0_min = limit_energy(LimitEnergyInput{pr.u_star, h, s});
    rep.e0_min_projector = 0.25 * (l2_inner(h, h, s) - l2_inner(pr.h_par, pr.h_par, s));

    VectorField u = pr.u_star;
    if (cfg.u_mode == SweepDisplacement::Zero)
        u = VectorField::zeros(cfg.grid);
    else if (cfg.u_mode == SweepDisplacement::Seeded)
        u = make_u(cfg.u_spec, cfg.grid);
    rep.e0_limit = limit_energy(LimitEnergyInput{u, h, s});
    const AmbientIsometry psi = AmbientIsometry::identity();

    for (const double eps : cfg.eps_list) {
        GammaRow row;
        row.eps = eps;
        row.e0_limit = rep.e0_limit;
        try {
            const MetricField geps = perturbed_metric(s, h, eps);
            ConfigurationField f = recovery_sequence(u, psi, eps);
            if (cfg.mode == SweepMode::Minimize) {
                const DescentResult res =
                    minimize_nonlinear(f, NonlinearEnergyInput{f, geps, s, eps}, cfg.optimizer);
                f = res.f_star;
                rep.traces.push_back(res.trace);
            }
            row.e_eps = nonlinear_energy(NonlinearEnergyInput{f, geps, s, eps});
            row.gap = row.e_eps - rep.e0_limit;
            VectorField diff = extract_displacement(f, psi, eps);
            for (int n = 0; n < cfg.grid.num_nodes(); ++n) diff.values[n] -= u.values[n];
            row.displacement_l2_err = l2_norm(diff, s);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rep.rows.push_back(row);
    }
    return rep;
}

inline std::string gamma_csv(const GammaReport& rep) {
    std::string out = "eps,e_eps,e0_limit,gap,displacement_l2_err,error\n";
    for (const GammaRow& r : rep.rows)
        out += fmt17(r.eps) + "," + fmt17(r.e_eps) + "," + fmt17(r.e0_limit) + "," + fmt17(r.gap) +
               "," + fmt17(r.displacement_l2_err) + "," + r.error + "\n";
    return out;
}

inline std::string gamma_json(const GammaReport& rep) {
    JsonWriter w;
    w.begin();
    w.str("experiment", "gamma");
    append_config_metadata(w, rep.cfg);
    w.str("mode", rep.cfg.mode == SweepMode::Recovery ? "recovery" : "minimize");
    w.str("u_mode", rep.cfg.u_mode == SweepDisplacement::Minimizer
                        ? "minimizer"
                        : (rep.cfg.u_mode == SweepDisplacement::Zero ? "zero" : "seeded"));
    w.num("e0_limit", rep.e0_limit);
    w.num("e0_min", rep.e0_min);
    w.num("e0_min_projector", rep.e0_min_projector);
    w.key("rows").raw("[");
    for (const GammaRow& r : rep.rows) {
        w.begin();
        w.num("eps", r.eps).num("e_eps", r.e_eps).num("e0_limit", r.e0_limit).num("gap", r.gap);
        w.num("displacement_l2_err", r.displacement_l2_err);
        w.str("error", r.error);
        w.end().raw(",");
    }
    w.trim_comma().raw("],");
    w.end();
    return w.text() + "\n";
}

// --- projection ------------------------------------------------------------------

struct ProjectionReport {
    ExperimentConfig cfg;
    ProjectionResult result;
    double h_norm2 = 0.0, h_par_norm2 = 0.0, h_perp_norm2 = 0.0;
    double cross_inner = 0.0;
    double e0_min_optimizer = 0.0;
    double e0_min_projector = 0.0;
};

inline ProjectionReport run_projection(const ExperimentConfig& cfg) {
    cfg.validate();
    ProjectionReport rep;
    rep.cfg = cfg;
    const MetricField s = chart_metric_field(cfg.grid);
    const TwoTensorField h = make_h(cfg.h_spec, s);
    rep.result = project_parallel(h, s);
    rep.h_norm2 = l2_inner(h, h, s);
    rep.h_par_norm2 = l2_inner(rep.result.h_par, rep.result.h_par, s);
    rep.h_perp_norm2 = l2_inner(rep.result.h_perp, rep.result.h_perp, s);
    rep.cross_inner = l2_inner(rep.result.h_par, rep.result.h_perp, s);
    rep.e0_min_optimizer = limit_energy(LimitEnergyInput{rep.result.u_star, h, s});
    rep.e0_min_projector = 0.25 * (rep.h_norm2 - rep.h_par_norm2);
    return rep;
}

inline std::string projection_json(const ProjectionReport& rep) {
    JsonWriter w;
    w.begin();
    w.str("experiment", "project");
    append_config_metadata(w, rep.cfg);
    w.num("h_norm2", rep.h_norm2);
    w.num("h_par_norm2", rep.h_par_norm2);
    w.num("h_perp_norm2", rep.h_perp_norm2);
    w.num("cross_inner", rep.cross_inner);
    w.num("e0_min_optimizer", rep.e0_min_optimizer);
    w.num("e0_min_projector", rep.e0_min_projector);
    w.key("killing_components").raw("[" + fmt17(rep.result.killing_components(0)) + "," +
                                    fmt17(rep.result.killing_components(1)) + "," +
                                    fmt17(rep.result.killing_components(2)) + "],");
    w.end();
    return w.text() + "\n";
}

// --- rigidity study -----------------------------------------------------------------

struct RigidityRow {
    std::uint64_t seed = 0;
    double amplitude = 0.0;
    std::string grid;
    IsometryFit fit;
};

struct RigidityReport {
    ExperimentConfig cfg;
    std::vector<RigidityRow> rows;
    double max_over_median = 0.0;      // of the ratio, over all trials with amplitude > 0
    double amplitude_spread = 0.0;     // max/min of per-amplitude medians
};

inline RigidityReport run_rigidity_study(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.ambient != Ambient::UnitSphere)
        throw ConfigError("rigidity: the study requires the sphere ambient");
    RigidityReport rep;
    rep.cfg = cfg;
    std::vector<double> all;
    std::vector<double> medians;
    for (const double amp : cfg.rigidity_amplitudes) {
        std::vector<double> ratios;
        for (int t = 0; t < cfg.rigidity_trials; ++t) {
            RigidityRow row;
            row.seed = cfg.h_spec.seed + static_cast<std::uint64_t>(t);
            row.amplitude = amp;
            row.grid = grid_label(cfg.grid);
            row.fit = rigidity_trial(row.seed, amp, cfg.grid);
            ratios.push_back(row.fit.ratio);
            if (amp > 0.0) all.push_back(row.fit.ratio);
            rep.rows.push_back(row);
        }
        if (amp > 0.0) {
            std::sort(ratios.begin(), ratios.end());
            medians.push_back(ratios[ratios.size() / 2]);
        }
    }
    if (!all.empty()) {
        std::vector<double> sorted = all;
        std::sort(sorted.begin(), sorted.end());
        const double median = sorted[sorted.size() / 2];
        rep.max_over_median = median > 0.0 ? sorted.back() / median : 0.0;
    }
    if (!medians.empty()) {
        const auto [lo, hi] = std::minmax_element(medians.begin(), medians.end());
        rep.amplitude_spread = (*lo > 0.0) ? (*hi / *lo) : 0.0;
    }
    return rep;
}

inline std::string rigidity_csv(const RigidityReport& rep) {
    std::string out = "seed,amplitude,grid,l2_residual,w12_residual,energy_norm,ratio\n";
    for (const RigidityRow& r : rep.rows)
        out += std::to_string(r.seed) + "," + fmt17(r.amplitude) + "," + r.grid + "," +
               fmt17(r.fit.l2_residual) + "," + fmt17(r.fit.w12_residual) + "," +
               fmt17(r.fit.energy_norm) + "," + fmt17(r.fit.ratio) + "\n";
    return out;
}

inline std::string rigidity_json(const RigidityReport& rep) {
    JsonWriter w;
    w.begin();
    w.str("experiment", "rigidity");
    append_config_metadata(w, rep.cfg);
    w.integer("trials", rep.cfg.rigidity_trials);
    w.num("max_over_median", rep.max_over_median);
    w.num("amplitude_spread", rep.amplitude_spread);
    w.key("rows").raw("[");
    for (const RigidityRow& r : rep.rows) {
        w.begin();
        w.integer("seed", static_cast<long long>(r.seed));
        w.num("amplitude", r.amplitude);
        w.str("grid", r.grid);
        w.num("l2_residual", r.fit.l2_residual);
        w.num("w12_residual", r.fit.w12_residual);
        w.num("energy_norm", r.fit.energy_norm);
        w.num("ratio", r.fit.ratio);
        w.end().raw(",");
    }
    w.trim_comma().raw("],");
    w.end();
    return w.text() + "\n";
}

// --- energy / curvature equivalence ---------------------------------------------------

struct CurvatureRow {
    int sample = 0;
    std::uint64_t seed = 0;
    double m_optimizer = 0.0;   // min E_0 via the deflated normal equations
    double m_projector = 0.0;   // 1/4 (|h|^2 - |h_par|^2)
    double c_curvature = 0.0;   // squared discrete W^{-2,2} norm of Rdot h_perp
    double ratio = 0.0;         // m_optimizer / c_curvature
};

struct CurvatureReport {
    ExperimentConfig cfg;
    std::vector<CurvatureRow> rows;
    double spread = 0.0;  // max ratio / min ratio over the family
};

inline CurvatureReport run_energy_curvature(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.ambient != Ambient::UnitSphere)
        throw ConfigError("curvature: constant-curvature ambient required (sphere)");
    CurvatureReport rep;
    rep.cfg = cfg;
    const MetricField s = chart_metric_field(cfg.grid);
    for (int k = 0; k < cfg.curvature_samples; ++k) {
        CurvatureRow row;
        row.sample = k;
        row.seed = cfg.h_spec.seed + static_cast<std::uint64_t>(k);
        HSpec hs = cfg.h_spec;
        hs.seed = row.seed;
        const TwoTensorField h = make_h(hs, s);
        const ProjectionResult pr = project_parallel(h, s);
        row.m_optimizer = limit_energy(LimitEnergyInput{pr.u_star, h, s});
        row.m_projector = 0.25 * (l2_inner(h, h, s) - l2_inner(pr.h_par, pr.h_par, s));
        const double c = neg2_sobolev_norm(curvature_variation(pr.h_perp, s), s);
        row.c_curvature = c * c;
        row.ratio = row.c_curvature > 0.0 ? row.m_optimizer / row.c_curvature : 0.0;
        rep.rows.push_back(row);
    }
    double lo = std::numeric_limits<double>::max(), hi = 0.0;
    for (const CurvatureRow& r : rep.rows) {
        lo = std::min(lo, r.ratio);
        hi = std::max(hi, r.ratio);
    }
    rep.spread = lo > 0.0 ? hi / lo : 0.0;
    return rep;
}

inline std::string curvature_csv(const CurvatureReport& rep) {
    std::string out = "sample,seed,m_optimizer,m_projector,c_curvature,ratio\n";
    for (const CurvatureRow& r : rep.rows)
        out += std::to_string(r.sample) + "," + std::to_string(r.seed) + "," + fmt17(r.m_optimizer) +
               "," + fmt17(r.m_projector) + "," + fmt17(r.c_curvature) + "," + fmt17(r.ratio) + "\n";
    return out;
}

inline std::string curvature_json(const CurvatureReport& rep) {
    JsonWriter w;
    w.begin();
    w.str("experiment", "curvature");
    append_config_metadata(w, rep.cfg);
    w.integer("samples", rep.cfg.curvature_samples);
    w.num("spread", rep.spread);
    w.key("rows").raw("[");
    for (const CurvatureRow& r : rep.rows) {
        w.begin();
        w.integer("sample", r.sample);
        w.integer("seed", static_cast<long long>(r.seed));
        w.num("m_optimizer", r.m_optimizer);
        w.num("m_projector", r.m_projector);
        w.num("c_curvature", r.c_curvature);
        w.num("ratio", r.ratio);
        w.end().raw(",");
    }
    w.trim_comma().raw("],");
    w.end();
    return w.text() + "\n";
}

// --- one-shot energy evaluation -----------------------------------------------------

struct EnergyRow {
    double eps = 0.0;
    double e_eps_inclusion = 0.0;
    double e_eps_recovery = 0.0;
};

struct EnergyReport {
    ExperimentConfig cfg;
    std::vector<EnergyRow> rows;
    double volume_s = 0.0;
    double e0_at_zero = 0.0;  // E_0(0) = 1/4 |h|^2
    double e0_min = 0.0;
};

inline EnergyReport run_energy_eval(const ExperimentConfig& cfg) {
    cfg.validate();
    EnergyReport rep;
    rep.cfg = cfg;
    const MetricField s = chart_metric_field(cfg.grid);
    const TwoTensorField h = make_h(cfg.h_spec, s);
    rep.volume_s = volume(s);
    rep.e0_at_zero = 0.25 * l2_inner(h, h, s);
    const ProjectionResult pr = project_parallel(h, s);
    rep.e0_min = limit_energy(LimitEnergyInput{pr.u_star, h, s});
    const AmbientIsometry psi = AmbientIsometry::identity();
    const ConfigurationField incl = inclusion_field(cfg.grid);
    for (const double eps : cfg.eps_list) {
        EnergyRow row;
        row.eps = eps;
        const MetricField geps = perturbed_metric(s, h, eps);
        row.e_eps_inclusion = nonlinear_energy(NonlinearEnergyInput{incl, geps, s, eps});
        row.e_eps_recovery =
            nonlinear_energy(NonlinearEnergyInput{recovery_sequence(pr.u_star, psi, eps), geps, s, eps});
        rep.rows.push_back(row);
    }
    return rep;
}

inline std::string energy_csv(const EnergyReport& rep) {
    std::string out = "eps,e_eps_inclusion,e_eps_recovery\n";
    for (const EnergyRow& r : rep.rows)
        out += fmt17(r.eps) + "," + fmt17(r.e_eps_inclusion) + "," + fmt17(r.e_eps_recovery) + "\n";
    return out;
}

inline std::string energy_json(const EnergyReport& rep) {
    JsonWriter w;
    w.begin();
    w.str("experiment", "energy");
    append_config_metadata(w, rep.cfg);
    w.num("volume_s", rep.volume_s);
    w.num("e0_at_zero", rep.e0_at_zero);
    w.num("e0_min", rep.e0_min);
    w.key("rows").raw("[");
    for (const EnergyRow& r : rep.rows) {
        w.begin();
        w.num("eps", r.eps).num("e_eps_inclusion", r.e_eps_inclusion).num("e_eps_recovery", r.e_eps_recovery);
        w.end().raw(",");
    }
    w.trim_comma().raw("],");
    w.end();
    return w.text() + "\n";
}

inline std::string trace_csv(const std::vector<TraceRow>& trace) {
    std::string out = "iter,energy,grad_norm,step\n";
    for (const TraceRow& t : trace)
        out += std::to_string(t.iter) + "," + fmt17(t.energy) + "," + fmt17(t.grad_norm) + "," +
               fmt17(t.step) + "\n";
    return out;
}

}  // namespace wielab
