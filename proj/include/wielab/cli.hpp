#pragma once

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "wielab/selftest.hpp"

namespace wielab {

namespace cli_detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericalError("cannot write output file: " + path.string());
    out << text;
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::int64_t seed_override = -1;
    int threads = 1;
};

inline void add_common(CLI::App* sub, CommonArgs& args, bool config_required) {
    auto* pos = sub->add_option("config", args.config_path, "experiment config file (JSON)");
    if (config_required) pos->required()->check(CLI::ExistingFile);
    sub->add_option("--out", args.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", args.seed_override, "override the config seed");
    sub->add_option("--threads", args.threads, "worker threads (results are independent of this)")
        ->check(CLI::PositiveNumber);
}

inline ExperimentConfig load_config(const CommonArgs& args) {
    ExperimentConfig cfg = parse_config_text(read_file(args.config_path));
    if (args.seed_override >= 0) cfg.h_spec.seed = static_cast<std::uint64_t>(args.seed_override);
    return cfg;
}

}  // namespace cli_detail

inline int cli_main(int argc, char** argv) {
    using namespace cli_detail;
    CLI::App app{"wielab: a numerical laboratory for weakly-incompatible elasticity on the sphere and plane"};
    app.require_subcommand(1);

    CommonArgs selftest_args, gamma_args, project_args, rigidity_args, curvature_args, energy_args;
    bool hook_corrupt_sqrt = false;

    auto* selftest_cmd = app.add_subcommand("selftest", "run the built-in contract checks");
    selftest_cmd->add_option("--out", selftest_args.out_dir, "write selftest.txt here as well");
    selftest_cmd->add_option("--threads", selftest_args.threads, "worker threads (results independent)")
        ->check(CLI::PositiveNumber);
    selftest_cmd->add_flag("--hook-corrupt-sqrt-spd", hook_corrupt_sqrt)->group("");  // test hook, hidden

    auto* gamma_cmd = app.add_subcommand("gamma", "Gamma-convergence sweep over eps");
    add_common(gamma_cmd, gamma_args, true);
    auto* project_cmd = app.add_subcommand("project", "orthogonal split of h against the deformation range");
    add_common(project_cmd, project_args, true);
    auto* rigidity_cmd = app.add_subcommand("rigidity", "empirical rigidity-constant study");
    add_common(rigidity_cmd, rigidity_args, true);
    auto* curvature_cmd = app.add_subcommand("curvature", "energy / curvature-variation equivalence study");
    add_common(curvature_cmd, curvature_args, true);
    auto* energy_cmd = app.add_subcommand("energy", "one-shot energy evaluations for the configured family");
    add_common(energy_cmd, energy_args, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (selftest_cmd->parsed()) {
            SelftestOptions opts;
            opts.corrupt_sqrt_spd = hook_corrupt_sqrt;
            opts.threads = selftest_args.threads;
            std::ostringstream table;
            const int code = run_selftest(table, opts);
            std::cout << table.str();
            if (selftest_cmd->count("--out") > 0)
                write_file(std::filesystem::path(selftest_args.out_dir) / "selftest.txt", table.str());
            return code;
        }

        const auto t0 = std::chrono::steady_clock::now();
        if (gamma_cmd->parsed()) {
            ExperimentConfig cfg = load_config(gamma_args);
            GammaReport rep = run_gamma_sweep(cfg);
            rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const std::filesystem::path dir(gamma_args.out_dir);
            write_file(dir / (cfg.output_prefix + "_gamma.csv"), gamma_csv(rep));
            write_file(dir / (cfg.output_prefix + "_gamma.json"), gamma_json(rep));
            for (size_t k = 0; k < rep.traces.size(); ++k)
                write_file(dir / (cfg.output_prefix + "_trace_" + std::to_string(k) + ".csv"),
                           trace_csv(rep.traces[k]));
            std::cout << "gamma: " << rep.rows.size() << " rows, e0_min " << fmt17(rep.e0_min)
                      << ", wall " << rep.wall_seconds << " s\n";
            return rep.ok() ? 0 : 3;
        }
        if (project_cmd->parsed()) {
            ExperimentConfig cfg = load_config(project_args);
            const ProjectionReport rep = run_projection(cfg);
            const std::filesystem::path dir(project_args.out_dir);
            write_file(dir / (cfg.output_prefix + "_project.json"), projection_json(rep));
            std::ostringstream u_txt, par_txt, perp_txt;
            write_field(u_txt, rep.result.u_star);
            write_field(par_txt, rep.result.h_par);
            write_field(perp_txt, rep.result.h_perp);
            write_file(dir / (cfg.output_prefix + "_u_star.txt"), u_txt.str());
            write_file(dir / (cfg.output_prefix + "_h_par.txt"), par_txt.str());
            write_file(dir / (cfg.output_prefix + "_h_perp.txt"), perp_txt.str());
            std::cout << "project: e0_min " << fmt17(rep.e0_min_optimizer) << "\n";
            return 0;
        }
        if (rigidity_cmd->parsed()) {
            ExperimentConfig cfg = load_config(rigidity_args);
            const RigidityReport rep = run_rigidity_study(cfg);
            const std::filesystem::path dir(rigidity_args.out_dir);
            write_file(dir / (cfg.output_prefix + "_rigidity.csv"), rigidity_csv(rep));
            write_file(dir / (cfg.output_prefix + "_rigidity.json"), rigidity_json(rep));
            std::cout << "rigidity: " << rep.rows.size() << " trials, max/median "
                      << fmt17(rep.max_over_median) << "\n";
            return 0;
        }
        if (curvature_cmd->parsed()) {
            ExperimentConfig cfg = load_config(curvature_args);
            const CurvatureReport rep = run_energy_curvature(cfg);
            const std::filesystem::path dir(curvature_args.out_dir);
            write_file(dir / (cfg.output_prefix + "_curvature.csv"), curvature_csv(rep));
            write_file(dir / (cfg.output_prefix + "_curvature.json"), curvature_json(rep));
            std::cout << "curvature: " << rep.rows.size() << " samples, ratio spread " << fmt17(rep.spread)
                      << "\n";
            return 0;
        }
        if (energy_cmd->parsed()) {
            ExperimentConfig cfg = load_config(energy_args);
            const EnergyReport rep = run_energy_eval(cfg);
            const std::filesystem::path dir(energy_args.out_dir);
            write_file(dir / (cfg.output_prefix + "_energy.csv"), energy_csv(rep));
            write_file(dir / (cfg.output_prefix + "_energy.json"), energy_json(rep));
            std::cout << "energy: " << rep.rows.size() << " rows, e0_min " << fmt17(rep.e0_min) << "\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}

}  // namespace wielab
