#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <string>
#include <vector>

#include "spgd/config.hpp"
#include "spgd/trajectory_io.hpp"
#include "spgd/version.hpp"

namespace spgd {

namespace fs = std::filesystem;

struct ExperimentManifest {
    std::string config_hash;
    json config;
    std::vector<std::string> files;  // relative to out_dir
    std::string version;
    double wall_clock_s = 0.0;
    json schedule_validation;
    json per_seed;  // array of {seed, trajectory, sidecar, diagnostics, error?}
    bool any_blowup = false;

    json to_json() const {
        json j;
        j["config_hash"] = config_hash;
        j["config"] = config;
        j["files"] = files;
        j["version"] = version;
        j["wall_clock_s"] = wall_clock_s;
        j["schedule_validation"] = schedule_validation;
        j["per_seed"] = per_seed;
        j["any_blowup"] = any_blowup;
        return j;
    }
};

namespace detail {

inline json schedule_validation_json(const ScheduleValidation& v) {
    json j;
    j["divergence"] = verdict_name(v.divergence);
    j["summability"] = verdict_name(v.summability);
    j["analytic"] = v.analytic;
    j["q"] = v.q;
    j["partial_sum"] = v.partial_sum;
    j["partial_sum_pow"] = v.partial_sum_pow;
    j["horizon"] = v.horizon;
    j["detail"] = v.detail;
    j["ok"] = v.ok();
    return j;
}

inline json trend_json(const TrendSummary& t) {
    json j;
    j["count"] = t.count;
    j["insufficient"] = t.insufficient;
    if (!t.insufficient) {
        j["spearman"] = t.spearman;
        j["quartile_ratio"] = t.quartile_ratio;
    }
    return j;
}

inline void write_series_csv(const fs::path& path, const std::string& col,
                             const std::vector<double>& values, std::size_t max_rows = 10000) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "index," << col << '\n';
    const std::size_t stride = values.size() > max_rows ? values.size() / max_rows + 1 : 1;
    for (std::size_t i = 0; i < values.size(); i += stride)
        out << i << ',' << fmt17(values[i]) << '\n';
}

// Runs every requested diagnostics block on one trajectory; returns the
// report and writes companion CSV series next to it.
inline json run_diagnostics(const RunConfig& cfg, const Trajectory& traj,
                            const ProblemSpec& problem, const fs::path& out_dir,
                            const std::string& tag, std::vector<std::string>& files) {
    json rep = json::array();
    int idx = 0;
    for (const auto& req : cfg.diagnostics) {
        json block;
        block["kind"] = req.kind_name();
        try {
            switch (req.kind) {
                case DiagnosticsRequest::Kind::Intervals: {
                    NeighborhoodPair nb(*req.U, *req.V);
                    auto scan = find_maximal_intervals(traj, nb);
                    block["U"] = region_to_json(*req.U);
                    block["V"] = region_to_json(*req.V);
                    block["non_touching_excursions"] = scan.non_touching_excursions;
                    json ivs = json::array();
                    for (const auto& iv : scan.intervals) {
                        json ij;
                        ij["n1"] = iv.n1;
                        ij["n2"] = iv.n2;
                        ij["duration"] = iv.duration;
                        ij["truncated"] = iv.truncated();
                        ivs.push_back(ij);
                    }
                    block["intervals"] = ivs;
                    auto series = long_interval_series(scan.intervals);
                    block["durations"] = series.durations;
                    block["censored_final"] = series.censored_final;
                    block["duration_trend"] = trend_json(series.trend);
                    if (!scan.intervals.empty()) {
                        std::size_t upto = req.oscillation_upto == 0
                                               ? scan.intervals.size()
                                               : std::min(req.oscillation_upto,
                                                          scan.intervals.size());
                        auto osc = oscillation_ratio(traj, scan.intervals, upto, req.U);
                        block["u_norm"] = osc.u_norm;
                        block["u_final"] = osc.u.back();
                        block["denominator"] = osc.denominator;
                        block["plain_u_norm"] = osc.plain_u_norm;
                        block["plain_u_note"] =
                            "ratio with indicator x_i in U only; may not vanish, "
                            "no threshold attached";
                        if (req.subdivision_T) {
                            json ks = json::array();
                            for (const auto& iv : scan.intervals)
                                ks.push_back(
                                    interval_subdivision(iv, traj, *req.subdivision_T).chunks);
                            block["subdivision_counts"] = ks;
                        }
                        std::string f = tag + "_intervals" + std::to_string(idx) + "_u_norm.csv";
                        write_series_csv(out_dir / f, "u_norm", osc.u_norm);
                        files.push_back(f);
                        f = tag + "_intervals" + std::to_string(idx) + "_durations.csv";
                        write_series_csv(out_dir / f, "duration", series.durations);
                        files.push_back(f);
                    }
                    break;
                }
                case DiagnosticsRequest::Kind::TravelTimes: {
                    auto tt = travel_times(traj, *req.ball_x, *req.ball_y);
                    block["times"] = tt.times;
                    block["trend"] = trend_json(tt.trend);
                    block["empty"] = tt.empty_flagged;
                    std::string f = tag + "_travel" + std::to_string(idx) + ".csv";
                    write_series_csv(out_dir / f, "travel_time", tt.times);
                    files.push_back(f);
                    break;
                }
                case DiagnosticsRequest::Kind::WindowedSups: {
                    json rows = json::array();
                    for (auto n : req.at) {
                        json row;
                        row["n"] = n;
                        row["T"] = req.T;
                        row["drift_sup"] = windowed_drift_sup(traj, req.T, n);
                        row["noise_sup"] = windowed_noise_sup(traj, req.T, n);
                        rows.push_back(row);
                    }
                    block["sups"] = rows;
                    break;
                }
                case DiagnosticsRequest::Kind::Lyapunov: {
                    auto ls = lyapunov_series(traj);
                    block["tail_mean"] = ls.tail_mean;
                    block["tail_stddev"] = ls.tail_stddev;
                    block["tail_start"] = ls.tail_start;
                    std::string f = tag + "_lyapunov" + std::to_string(idx) + ".csv";
                    write_series_csv(out_dir / f, "fg", ls.values);
                    files.push_back(f);
                    break;
                }
                case DiagnosticsRequest::Kind::Accumulation: {
                    auto centers = accumulation_estimate(traj, req.tail_fraction, req.eps);
                    json cs = json::array();
                    for (const auto& c : centers) {
                        json cj;
                        cj["point"] = c.point;
                        cj["mass"] = c.mass;
                        cj["stationarity_residual"] =
                            stationarity_residual(problem, c.point);
                        cs.push_back(cj);
                    }
                    block["centers"] = cs;
                    break;
                }
            }
        } catch (const Error& e) {
            block["error"] = e.what();
        }
        rep.push_back(block);
        ++idx;
    }
    return rep;
}

}  // namespace detail

// Runs the configured experiment for n_seeds replicas (seed, seed+1, ...),
// writes one trajectory CSV + sidecar + diagnostics JSON per seed, and a
// manifest last. Throws ConfigError before running anything if the schedule
// fails validation and override is not set.
inline ExperimentManifest run_experiment(const RunConfig& cfg, std::size_t n_seeds,
                                         const std::string& out_override = "") {
    const auto t_start = std::chrono::steady_clock::now();
    if (n_seeds < 1) throw InputError("run_experiment: n_seeds must be >= 1");

    const fs::path out_dir = out_override.empty() ? cfg.output_dir : out_override;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output dir " + out_dir.string() + ": " + ec.message());

    const ProblemSpec problem = cfg.problem.build();
    const Schedule schedule = cfg.schedule.build();
    const NoiseModel noise = cfg.noise.build();

    auto validation = validate_schedule(schedule, noise.q());
    if (!validation.ok() && !cfg.override_validation)
        throw ConfigError("schedule validation failed (divergence " +
                          verdict_name(validation.divergence) + ", summability " +
                          verdict_name(validation.summability) +
                          "); use override to run anyway");

    ExperimentManifest man;
    man.config_hash = config_hash(cfg);
    man.config = canonical_config_json(cfg);
    man.version = SPGD_VERSION;
    man.schedule_validation = detail::schedule_validation_json(validation);
    man.per_seed = json::array();

    RunOptions opts;
    opts.bound = cfg.bound;
    opts.validate_schedule = false;  // validated once above
    opts.thinning_stride = cfg.thinning;
    for (const auto& d : cfg.diagnostics) {
        if (d.V) opts.keep_regions.push_back(*d.V);
        if (d.ball_x) opts.keep_regions.push_back(*d.ball_x);
        if (d.ball_y) opts.keep_regions.push_back(*d.ball_y);
    }

    // seed-level parallelism; each task owns its trajectory and output files
    struct SeedResult {
        std::uint64_t seed;
        json entry;
        std::vector<std::string> files;
        bool blowup = false;
    };
    auto run_one = [&](std::uint64_t seed) -> SeedResult {
        SeedResult r;
        r.seed = seed;
        Trajectory traj = run_spgd(problem, schedule, noise, seed, cfg.x0,
                                   cfg.n_iters, opts);
        const std::string tag = "seed" + std::to_string(seed);
        const std::string traj_file = tag + "_trajectory.csv";
        const std::string side_file = tag + "_trajectory.meta.json";
        const std::string diag_file = tag + "_diagnostics.json";
        write_trajectory_csv(traj, (out_dir / traj_file).string());
        write_trajectory_sidecar(traj, (out_dir / side_file).string());
        r.files = {traj_file, side_file};

        json diag = detail::run_diagnostics(cfg, traj, problem, out_dir, tag, r.files);
        {
            std::ofstream out(out_dir / diag_file, std::ios::binary);
            if (!out) throw IoError("cannot open for writing: " + (out_dir / diag_file).string());
            out << diag.dump(2) << '\n';
        }
        r.files.push_back(diag_file);

        r.entry["seed"] = seed;
        r.entry["trajectory"] = traj_file;
        r.entry["sidecar"] = side_file;
        r.entry["diagnostics"] = diag_file;
        r.entry["bound_violated"] = traj.bound_violated;
        r.entry["total_steps"] = traj.total_steps;
        if (traj.error) {
            r.entry["error"] = traj.error->message;
            r.blowup = true;
        }
        return r;
    };

    std::vector<std::future<SeedResult>> futs;
    futs.reserve(n_seeds);
    for (std::size_t i = 0; i < n_seeds; ++i)
        futs.push_back(std::async(std::launch::async, run_one, cfg.seed + i));
    for (auto& f : futs) {
        SeedResult r = f.get();
        man.per_seed.push_back(r.entry);
        for (auto& file : r.files) man.files.push_back(file);
        man.any_blowup = man.any_blowup || r.blowup;
    }

    man.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    {
        std::ofstream out(out_dir / "manifest.json", std::ios::binary);
        if (!out) throw IoError("cannot write manifest in " + out_dir.string());
        out << man.to_json().dump(2) << '\n';
    }
    return man;
}

// A/B comparison of two stored experiments: tabulates the trend statistics
// side by side and flags failed schedule validations in the header.
inline json compare_runs(const std::string& manifest_a, const std::string& manifest_b) {
    auto load = [](const std::string& p) {
        std::ifstream in(p);
        if (!in) throw IoError("cannot open manifest: " + p);
        return json::parse(in);
    };
    json a = load(manifest_a);
    json b = load(manifest_b);

    auto dim_of = [](const json& m) {
        return m.at("config").at("x0").size();
    };
    if (dim_of(a) != dim_of(b))
        throw ComparisonError("experiments have different dimensions");

    auto header_flag = [](const json& m) {
        const json& v = m.at("schedule_validation");
        std::string s = "schedule: divergence " + v.at("divergence").get<std::string>() +
                        ", summability " + v.at("summability").get<std::string>();
        if (!v.at("ok").get<bool>()) s = "schedule FAIL 2(ii): " + s;
        return s;
    };

    auto collect = [&](const json& man, const std::string& dir) {
        json side = json::object();
        side["config_hash"] = man.at("config_hash");
        side["header"] = header_flag(man);
        json stats = json::array();
        for (const auto& entry : man.at("per_seed")) {
            fs::path diag_path = fs::path(dir) / entry.at("diagnostics").get<std::string>();
            std::ifstream in(diag_path);
            if (!in) throw IoError("missing diagnostics file " + diag_path.string());
            json diag = json::parse(in);
            json s;
            s["seed"] = entry.at("seed");
            for (const auto& block : diag) {
                const std::string kind = block.at("kind");
                if (block.contains("error")) continue;
                if (kind == "intervals" && block.contains("u_norm") &&
                    !block.at("u_norm").empty()) {
                    s["final_u_norm"] = block.at("u_norm").back();
                    s["duration_trend"] = block.at("duration_trend");
                } else if (kind == "travel_times") {
                    s["travel_trend"] = block.at("trend");
                } else if (kind == "lyapunov") {
                    s["lyapunov_tail_stddev"] = block.at("tail_stddev");
                    s["lyapunov_tail_mean"] = block.at("tail_mean");
                } else if (kind == "windowed_sups") {
                    s["windowed_sups"] = block.at("sups");
                }
            }
            stats.push_back(s);
        }
        side["per_seed"] = stats;
        return side;
    };

    json rep;
    rep["a"] = collect(a, fs::path(manifest_a).parent_path().string());
    rep["b"] = collect(b, fs::path(manifest_b).parent_path().string());
    rep["identical_config"] = a.at("config_hash") == b.at("config_hash");
    return rep;
}

}  // namespace spgd
