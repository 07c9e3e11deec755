#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spgd/engine.hpp"
#include "spgd/interpolation.hpp"

namespace spgd {

using nlohmann::json;

namespace detail {

// 17 significant digits reproduce a double exactly on read-back.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// strtod-based parse; unlike std::stod it does not throw on subnormals
inline double parse_double(const std::string& s) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw IoError("not a number: '" + s + "'");
    return v;
}

inline void append_cols(std::string& header, const char* base, std::size_t d) {
    for (std::size_t k = 0; k < d; ++k) {
        header += ',';
        header += base;
        header += std::to_string(k);
    }
}

}  // namespace detail

// One row per step: n, tau, gamma, x[0..d), v[0..d), eta[0..d), w[0..d), fg.
inline void write_trajectory_csv(const Trajectory& t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);

    std::string header = "n,tau,gamma";
    detail::append_cols(header, "x", t.dim);
    detail::append_cols(header, "v", t.dim);
    detail::append_cols(header, "eta", t.dim);
    detail::append_cols(header, "w", t.dim);
    header += ",fg\n";
    out << header;

    std::string line;
    for (std::size_t i = 0; i < t.size(); ++i) {
        line.clear();
        line += std::to_string(t.step_index(i));
        line += ',';
        line += detail::fmt17(t.tau(i));
        line += ',';
        line += detail::fmt17(t.gamma(i));
        for (auto col : {t.x(i), t.v(i), t.eta(i), t.w(i)})
            for (double val : col) {
                line += ',';
                line += detail::fmt17(val);
            }
        line += ',';
        line += detail::fmt17(t.fg(i));
        line += '\n';
        out << line;
    }
    if (!out) throw IoError("write failed: " + path);
}

inline json trajectory_sidecar(const Trajectory& t) {
    json j;
    j["dim"] = t.dim;
    j["problem"] = t.problem_id;
    j["schedule"] = t.schedule_desc;
    j["noise"] = t.noise_desc;
    j["seed"] = t.seed;
    j["x0"] = t.x0;
    j["bound"] = t.bound;
    j["bound_violated"] = t.bound_violated;
    j["thinning"] = t.thinning_stride;
    j["total_steps"] = t.total_steps;
    j["stored_records"] = t.size();
    j["final_x"] = t.final_x();
    if (t.error) {
        j["error"] = t.error->message;
        j["error_step"] = t.error->step;
    }
    return j;
}

inline void write_trajectory_sidecar(const Trajectory& t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << trajectory_sidecar(t).dump(2) << '\n';
}

// Rebuilds a Trajectory from a CSV plus its sidecar. x_next of row i comes
// from row i+1 (or final_x from the sidecar for the last row).
inline Trajectory read_trajectory_csv(const std::string& csv_path,
                                      const std::string& sidecar_path) {
    std::ifstream side(sidecar_path);
    if (!side) throw IoError("cannot open: " + sidecar_path);
    json meta = json::parse(side);

    Trajectory t;
    t.dim = meta.at("dim").get<std::size_t>();
    t.problem_id = meta.at("problem").get<std::string>();
    t.schedule_desc = meta.at("schedule").get<std::string>();
    t.noise_desc = meta.at("noise").get<std::string>();
    t.seed = meta.at("seed").get<std::uint64_t>();
    t.x0 = meta.at("x0").get<Vec>();
    t.bound = meta.at("bound").get<double>();
    t.bound_violated = meta.at("bound_violated").get<bool>();
    t.thinning_stride = meta.at("thinning").get<std::uint64_t>();
    t.total_steps = meta.at("total_steps").get<std::uint64_t>();
    if (meta.contains("error"))
        t.error = TrajectoryError{meta["error"].get<std::string>(),
                                  meta["error_step"].get<std::uint64_t>()};
    const Vec final_x = meta.at("final_x").get<Vec>();

    std::ifstream in(csv_path);
    if (!in) throw IoError("cannot open: " + csv_path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty trajectory csv: " + csv_path);

    const std::size_t d = t.dim;
    std::vector<StepRecord> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        auto next = [&]() -> std::string {
            if (!std::getline(ss, cell, ',')) throw IoError("short row in " + csv_path);
            return cell;
        };
        StepRecord r;
        r.n = std::stoull(next());
        r.tau = detail::parse_double(next());
        r.gamma = detail::parse_double(next());
        auto read_vec = [&]() {
            Vec v(d);
            for (std::size_t k = 0; k < d; ++k) v[k] = detail::parse_double(next());
            return v;
        };
        r.x = read_vec();
        r.v = read_vec();
        r.eta = read_vec();
        r.w = read_vec();
        r.fg = detail::parse_double(next());
        rows.push_back(std::move(r));
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        // reconstruct x_next from the chain; exact because consecutive rows
        // share the iterate
        if (i + 1 < rows.size() && rows[i + 1].n == rows[i].n + 1)
            rows[i].x_next = rows[i + 1].x;
        else if (i + 1 == rows.size())
            rows[i].x_next = final_x;
        else
            // thinned gap: recover from the update identity
            rows[i].x_next = axpy(axpy(rows[i].x, -rows[i].gamma, rows[i].w),
                                  rows[i].gamma, rows[i].eta);
        rows[i].x_half = axpy(axpy(rows[i].x, -rows[i].gamma, rows[i].v),
                              rows[i].gamma, rows[i].eta);
        t.push_back(rows[i]);
    }
    return t;
}

// Flow solutions share the trajectory CSV layout idea: t, x[0..d).
inline void write_flow_csv(const FlowSolution& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    std::size_t d = f.points.empty() ? 0 : f.points.front().size();
    std::string header = "t";
    detail::append_cols(header, "x", d);
    out << header << '\n';
    for (std::size_t i = 0; i < f.points.size(); ++i) {
        out << detail::fmt17(f.times[i]);
        for (double v : f.points[i]) out << ',' << detail::fmt17(v);
        out << '\n';
    }
}

}  // namespace spgd
