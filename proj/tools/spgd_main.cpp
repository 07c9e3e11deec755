// Command-line driver: run experiments, validate schedules/noise, re-run
// diagnostics on stored trajectories, and compare two experiments.
//
// Exit codes: 0 success, 2 validation failure, 3 numerical blowup, 4 I/O.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "spgd/spgd.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitBlowup = 3;
constexpr int kExitIo = 4;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw spgd::IoError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cmd_run(const std::string& config_path, std::size_t seeds, bool override_flag,
            const std::string& out_dir) {
    spgd::RunConfig cfg = spgd::parse_config(slurp(config_path));
    if (override_flag) cfg.override_validation = true;
    auto man = spgd::run_experiment(cfg, seeds, out_dir);
    std::cout << "wrote " << man.files.size() + 1 << " files to "
              << (out_dir.empty() ? cfg.output_dir : out_dir) << " (config "
              << man.config_hash << ", " << man.wall_clock_s << " s)\n";
    if (man.any_blowup) {
        std::cerr << "numerical blowup in at least one seed; see manifest\n";
        return kExitBlowup;
    }
    return kExitOk;
}

int cmd_validate(const std::string& config_path) {
    spgd::RunConfig cfg = spgd::parse_config(slurp(config_path));
    auto schedule = cfg.schedule.build();
    auto noise = cfg.noise.build();
    auto problem = cfg.problem.build();

    auto sv = spgd::validate_schedule(schedule, noise.q());
    spgd::json out;
    out["schedule"] = spgd::detail::schedule_validation_json(sv);
    auto nv = spgd::validate_noise(noise, problem.dim);
    out["noise"]["mean_ok"] = nv.mean_ok;
    out["noise"]["moment_ok"] = nv.moment_ok;
    out["noise"]["detail"] = nv.detail;
    std::cout << out.dump(2) << '\n';
    return sv.ok() && nv.ok() ? kExitOk : kExitValidation;
}

int cmd_diagnose(const std::string& config_path, const std::string& traj_path,
                 const std::string& sidecar_path, const std::string& out_dir) {
    spgd::RunConfig cfg = spgd::parse_config(slurp(config_path));
    std::string side = sidecar_path;
    if (side.empty()) {
        side = traj_path;
        auto pos = side.rfind(".csv");
        if (pos == std::string::npos)
            throw spgd::IoError("cannot infer sidecar path from " + traj_path);
        side.replace(pos, 4, ".meta.json");
    }
    spgd::Trajectory traj = spgd::read_trajectory_csv(traj_path, side);
    auto problem = cfg.problem.build();

    std::filesystem::path dir = out_dir.empty() ? "." : out_dir;
    std::filesystem::create_directories(dir);
    std::vector<std::string> files;
    spgd::json rep = spgd::detail::run_diagnostics(cfg, traj, problem, dir,
                                                   "rediag_seed" + std::to_string(traj.seed),
                                                   files);
    std::cout << rep.dump(2) << '\n';
    return kExitOk;
}

int cmd_compare(const std::string& manifest_a, const std::string& manifest_b) {
    spgd::json rep = spgd::compare_runs(manifest_a, manifest_b);
    std::cout << rep.dump(2) << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic proximal subgradient descent experiment harness"};
    app.require_subcommand(1);

    std::string config_path, out_dir, traj_path, sidecar_path;
    std::string manifest_a, manifest_b;
    std::size_t seeds = 1;
    bool override_flag = false;

    auto* run = app.add_subcommand("run", "run an experiment from a config");
    run->add_option("--config", config_path, "JSON run configuration")->required();
    run->add_option("--seeds", seeds, "number of seeds (seed, seed+1, ...)");
    run->add_flag("--override", override_flag, "run even if schedule validation fails");
    run->add_option("--out", out_dir, "output directory (overrides config)");

    auto* validate = app.add_subcommand("validate", "validate schedule and noise assumptions");
    validate->add_option("--config", config_path, "JSON run configuration")->required();

    auto* diagnose = app.add_subcommand("diagnose", "re-run diagnostics on a stored trajectory");
    diagnose->add_option("--config", config_path, "JSON run configuration")->required();
    diagnose->add_option("--trajectory", traj_path, "trajectory CSV")->required();
    diagnose->add_option("--sidecar", sidecar_path, "sidecar JSON (default: <trajectory>.meta.json)");
    diagnose->add_option("--out", out_dir, "directory for diagnostic CSV series");

    auto* compare = app.add_subcommand("compare", "compare two experiment manifests");
    compare->add_option("a", manifest_a, "first manifest.json")->required();
    compare->add_option("b", manifest_b, "second manifest.json")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, seeds, override_flag, out_dir);
        if (validate->parsed()) return cmd_validate(config_path);
        if (diagnose->parsed()) return cmd_diagnose(config_path, traj_path, sidecar_path, out_dir);
        if (compare->parsed()) return cmd_compare(manifest_a, manifest_b);
    } catch (const spgd::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const spgd::ConfigError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const spgd::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitBlowup;
    } catch (const spgd::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitOk;
}
