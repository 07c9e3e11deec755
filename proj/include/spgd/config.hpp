#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "spgd/builtins.hpp"
#include "spgd/diagnostics.hpp"
#include "spgd/noise.hpp"
#include "spgd/schedule.hpp"

namespace spgd {

using nlohmann::json;

// ---------------------------------------------------------------------------
// strict-mode helpers

namespace cfgdetail {

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                                const std::string& pointer) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key at " + pointer + "/" + it.key());
}

template <typename T>
T require(const json& obj, const std::string& key, const std::string& pointer) {
    if (!obj.contains(key)) throw ConfigError("missing key " + pointer + "/" + key);
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("bad value at " + pointer + "/" + key + ": " + e.what());
    }
}

template <typename T>
T get_or(const json& obj, const std::string& key, const std::string& pointer, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("bad value at " + pointer + "/" + key + ": " + e.what());
    }
}

}  // namespace cfgdetail

// ---------------------------------------------------------------------------
// typed config blocks

struct ProblemConfig {
    std::string name;
    json params = json::object();

    BuiltinParams builtin_params() const {
        BuiltinParams bp;
        for (auto it = params.begin(); it != params.end(); ++it) {
            const json& v = it.value();
            if (v.is_number()) {
                bp.scalars[it.key()] = v.get<double>();
            } else if (v.is_array() && (v.empty() || v.front().is_number())) {
                bp.vectors[it.key()] = v.get<Vec>();
            } else if (v.is_array()) {
                auto rows = v.get<std::vector<Vec>>();
                Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    if (rows[i].size() != m.cols)
                        throw ConfigError("ragged matrix in problem param " + it.key());
                    for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
                }
                bp.matrices[it.key()] = std::move(m);
            } else {
                throw ConfigError("unsupported problem param type at /problem/params/" + it.key());
            }
        }
        return bp;
    }

    ProblemSpec build() const { return builtin_problem(name, builtin_params()); }
};

struct ScheduleConfig {
    std::string kind;  // "power" | "constant"
    double c = 1.0;
    double alpha = 1.0;

    Schedule build() const {
        if (kind == "power") return Schedule::power(c, alpha);
        if (kind == "constant") return Schedule::constant(c);
        throw ConfigError("unknown schedule kind '" + kind + "' (power, constant)");
    }
};

struct NoiseConfig {
    std::string kind = "zero";  // "zero" | "gaussian" | "bounded_uniform"
    double sigma = 0.0;         // gaussian
    double a = 0.0;             // bounded_uniform
    double q = 2.0;

    NoiseModel build() const {
        if (kind == "zero") return NoiseModel::zero();
        if (kind == "gaussian") return NoiseModel::gaussian(sigma, q);
        if (kind == "bounded_uniform") return NoiseModel::bounded_uniform(a, q);
        throw ConfigError("unknown noise kind '" + kind +
                          "' (zero, gaussian, bounded_uniform)");
    }
};

struct DiagnosticsRequest {
    enum class Kind { Intervals, TravelTimes, WindowedSups, Lyapunov, Accumulation };
    Kind kind = Kind::Lyapunov;

    // Intervals
    std::optional<Region> U, V;
    std::optional<double> subdivision_T;
    std::size_t oscillation_upto = 0;  // 0 = all intervals

    // TravelTimes
    std::optional<Region> ball_x, ball_y;

    // WindowedSups
    double T = 1.0;
    std::vector<std::uint64_t> at;

    // Accumulation
    double tail_fraction = 0.1;
    double eps = 1e-2;

    std::string kind_name() const {
        switch (kind) {
            case Kind::Intervals: return "intervals";
            case Kind::TravelTimes: return "travel_times";
            case Kind::WindowedSups: return "windowed_sups";
            case Kind::Lyapunov: return "lyapunov";
            case Kind::Accumulation: return "accumulation";
        }
        return "?";
    }
};

struct RunConfig {
    ProblemConfig problem;
    ScheduleConfig schedule;
    NoiseConfig noise;
    Vec x0;
    std::uint64_t n_iters = 0;
    std::uint64_t seed = 0;
    double bound = 1e6;
    std::uint64_t thinning = 1;
    bool override_validation = false;
    std::string output_dir = "out";
    std::vector<DiagnosticsRequest> diagnostics;
};

// ---------------------------------------------------------------------------
// region (de)serialization

inline Region parse_region(const json& j, const std::string& pointer) {
    if (!j.is_object()) throw ConfigError("expected object at " + pointer);
    auto kind = cfgdetail::require<std::string>(j, "kind", pointer);
    if (kind == "ball") {
        cfgdetail::reject_unknown_keys(j, {"kind", "center", "radius"}, pointer);
        auto c = cfgdetail::require<Vec>(j, "center", pointer);
        auto r = cfgdetail::require<double>(j, "radius", pointer);
        if (!(r > 0.0)) throw ConfigError("radius must be > 0 at " + pointer);
        return Region::ball(std::move(c), r);
    }
    if (kind == "box") {
        cfgdetail::reject_unknown_keys(j, {"kind", "lower", "upper"}, pointer);
        auto lo = cfgdetail::require<Vec>(j, "lower", pointer);
        auto hi = cfgdetail::require<Vec>(j, "upper", pointer);
        if (lo.size() != hi.size())
            throw ConfigError("lower/upper dimension mismatch at " + pointer);
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (!(lo[i] < hi[i]))
                throw ConfigError("need lower < upper at " + pointer);
        return Region::box(std::move(lo), std::move(hi));
    }
    throw ConfigError("unknown region kind '" + kind + "' at " + pointer);
}

inline json region_to_json(const Region& g) {
    json j;
    if (g.kind == Region::Kind::Ball) {
        j["kind"] = "ball";
        j["center"] = g.center;
        j["radius"] = g.radius;
    } else {
        j["kind"] = "box";
        j["lower"] = g.lower;
        j["upper"] = g.upper;
    }
    return j;
}

// ---------------------------------------------------------------------------
// parse_config: strict schema, documented in configs/ and the README

inline RunConfig parse_config_json(const json& root) {
    using namespace cfgdetail;
    if (!root.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown_keys(root,
                        {"version", "problem", "schedule", "noise", "x0", "n_iters",
                         "seed", "bound", "thinning", "override_validation",
                         "output_dir", "diagnostics"},
                        "");
    const int version = get_or<int>(root, "version", "", 1);
    if (version != 1) throw ConfigError("unsupported config version " + std::to_string(version));

    RunConfig cfg;

    {
        const json& p = root.contains("problem") ? root.at("problem") : json();
        if (!p.is_object()) throw ConfigError("missing or invalid /problem");
        reject_unknown_keys(p, {"name", "params"}, "/problem");
        cfg.problem.name = require<std::string>(p, "name", "/problem");
        cfg.problem.params = p.contains("params") ? p.at("params") : json::object();
        if (!cfg.problem.params.is_object())
            throw ConfigError("/problem/params must be an object");
        static const std::map<std::string, std::set<std::string>> allowed_params = {
            {"abs1d", {}},
            {"norm_nd", {"dim"}},
            {"lasso", {"A", "b", "lambda", "dim"}},
            {"box_linear", {"c", "lower", "upper", "dim"}},
            {"circle_oscillator", {"eps"}},
        };
        auto it = allowed_params.find(cfg.problem.name);
        if (it == allowed_params.end()) {
            std::string valid;
            for (const auto& n : builtin_problem_names())
                valid += (valid.empty() ? "" : ", ") + n;
            throw ConfigError("unknown problem '" + cfg.problem.name +
                              "'; valid names: " + valid);
        }
        reject_unknown_keys(cfg.problem.params, it->second, "/problem/params");
    }

    {
        const json& s = root.contains("schedule") ? root.at("schedule") : json();
        if (!s.is_object()) throw ConfigError("missing or invalid /schedule");
        reject_unknown_keys(s, {"kind", "c", "alpha"}, "/schedule");
        cfg.schedule.kind = require<std::string>(s, "kind", "/schedule");
        cfg.schedule.c = get_or<double>(s, "c", "/schedule", 1.0);
        cfg.schedule.alpha = get_or<double>(s, "alpha", "/schedule", 1.0);
        if (cfg.schedule.kind == "constant" && s.contains("alpha"))
            throw ConfigError("unknown key at /schedule/alpha (constant schedule)");
    }

    {
        const json& n = root.contains("noise") ? root.at("noise") : json();
        if (!n.is_object()) throw ConfigError("missing or invalid /noise");
        reject_unknown_keys(n, {"kind", "sigma", "a", "q"}, "/noise");
        cfg.noise.kind = require<std::string>(n, "kind", "/noise");
        cfg.noise.sigma = get_or<double>(n, "sigma", "/noise", 0.0);
        cfg.noise.a = get_or<double>(n, "a", "/noise", 0.0);
        cfg.noise.q = get_or<double>(n, "q", "/noise", 2.0);
        if (!(cfg.noise.q >= 2.0)) throw ConfigError("q must be >= 2 at /noise/q");
    }

    cfg.x0 = require<Vec>(root, "x0", "");
    cfg.n_iters = require<std::uint64_t>(root, "n_iters", "");
    if (cfg.n_iters < 1) throw ConfigError("/n_iters must be >= 1");
    cfg.seed = require<std::uint64_t>(root, "seed", "");
    cfg.bound = get_or<double>(root, "bound", "", 1e6);
    if (!(cfg.bound > 0.0)) throw ConfigError("/bound must be > 0");
    cfg.thinning = get_or<std::uint64_t>(root, "thinning", "", 1);
    if (cfg.thinning < 1) throw ConfigError("/thinning must be >= 1");
    cfg.override_validation = get_or<bool>(root, "override_validation", "", false);
    cfg.output_dir = get_or<std::string>(root, "output_dir", "", "out");

    if (root.contains("diagnostics")) {
        const json& ds = root.at("diagnostics");
        if (!ds.is_array()) throw ConfigError("/diagnostics must be an array");
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const std::string ptr = "/diagnostics/" + std::to_string(i);
            const json& d = ds[i];
            if (!d.is_object()) throw ConfigError("expected object at " + ptr);
            auto kind = require<std::string>(d, "kind", ptr);
            DiagnosticsRequest req;
            if (kind == "intervals") {
                reject_unknown_keys(d, {"kind", "U", "V", "subdivision_T", "oscillation_upto"}, ptr);
                req.kind = DiagnosticsRequest::Kind::Intervals;
                req.U = parse_region(d.at("U"), ptr + "/U");
                req.V = parse_region(d.at("V"), ptr + "/V");
                (void)NeighborhoodPair(*req.U, *req.V);  // throws if closure(U) not in V
                if (d.contains("subdivision_T"))
                    req.subdivision_T = require<double>(d, "subdivision_T", ptr);
                req.oscillation_upto = get_or<std::uint64_t>(d, "oscillation_upto", ptr, 0);
            } else if (kind == "travel_times") {
                reject_unknown_keys(d, {"kind", "ball_x", "ball_y"}, ptr);
                req.kind = DiagnosticsRequest::Kind::TravelTimes;
                req.ball_x = parse_region(d.at("ball_x"), ptr + "/ball_x");
                req.ball_y = parse_region(d.at("ball_y"), ptr + "/ball_y");
            } else if (kind == "windowed_sups") {
                reject_unknown_keys(d, {"kind", "T", "at"}, ptr);
                req.kind = DiagnosticsRequest::Kind::WindowedSups;
                req.T = require<double>(d, "T", ptr);
                if (!(req.T > 0.0)) throw ConfigError("T must be > 0 at " + ptr);
                req.at = require<std::vector<std::uint64_t>>(d, "at", ptr);
            } else if (kind == "lyapunov") {
                reject_unknown_keys(d, {"kind"}, ptr);
                req.kind = DiagnosticsRequest::Kind::Lyapunov;
            } else if (kind == "accumulation") {
                reject_unknown_keys(d, {"kind", "tail_fraction", "eps"}, ptr);
                req.kind = DiagnosticsRequest::Kind::Accumulation;
                req.tail_fraction = get_or<double>(d, "tail_fraction", ptr, 0.1);
                req.eps = get_or<double>(d, "eps", ptr, 1e-2);
                if (!(req.tail_fraction > 0.0 && req.tail_fraction <= 1.0))
                    throw ConfigError("tail_fraction must be in (0,1] at " + ptr);
                if (!(req.eps > 0.0)) throw ConfigError("eps must be > 0 at " + ptr);
            } else {
                throw ConfigError("unknown diagnostics kind '" + kind + "' at " + ptr);
            }
            cfg.diagnostics.push_back(std::move(req));
        }
    }

    // semantic validation through the builders
    ProblemSpec prob = cfg.problem.build();
    cfg.schedule.build();
    cfg.noise.build();
    require_dim(cfg.x0, prob.dim, "config x0");
    for (const auto& d : cfg.diagnostics) {
        if (d.kind == DiagnosticsRequest::Kind::TravelTimes &&
            !detail::regions_disjoint(*d.ball_x, *d.ball_y))
            throw ConfigError("travel_times regions must be disjoint");
    }
    return cfg;
}

inline RunConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    return parse_config_json(root);
}

// Canonical re-serialization: keys sorted, defaults materialized. Any config
// accepted by parse_config maps to exactly one canonical form.
inline json canonical_config_json(const RunConfig& cfg) {
    json j;
    j["version"] = 1;
    j["problem"]["name"] = cfg.problem.name;
    j["problem"]["params"] = cfg.problem.params;
    j["schedule"]["kind"] = cfg.schedule.kind;
    j["schedule"]["c"] = cfg.schedule.c;
    if (cfg.schedule.kind == "power") j["schedule"]["alpha"] = cfg.schedule.alpha;
    j["noise"]["kind"] = cfg.noise.kind;
    if (cfg.noise.kind == "gaussian") j["noise"]["sigma"] = cfg.noise.sigma;
    if (cfg.noise.kind == "bounded_uniform") j["noise"]["a"] = cfg.noise.a;
    j["noise"]["q"] = cfg.noise.q;
    j["x0"] = cfg.x0;
    j["n_iters"] = cfg.n_iters;
    j["seed"] = cfg.seed;
    j["bound"] = cfg.bound;
    j["thinning"] = cfg.thinning;
    j["override_validation"] = cfg.override_validation;
    j["output_dir"] = cfg.output_dir;
    j["diagnostics"] = json::array();
    for (const auto& d : cfg.diagnostics) {
        json b;
        b["kind"] = d.kind_name();
        switch (d.kind) {
            case DiagnosticsRequest::Kind::Intervals:
                b["U"] = region_to_json(*d.U);
                b["V"] = region_to_json(*d.V);
                if (d.subdivision_T) b["subdivision_T"] = *d.subdivision_T;
                b["oscillation_upto"] = d.oscillation_upto;
                break;
            case DiagnosticsRequest::Kind::TravelTimes:
                b["ball_x"] = region_to_json(*d.ball_x);
                b["ball_y"] = region_to_json(*d.ball_y);
                break;
            case DiagnosticsRequest::Kind::WindowedSups:
                b["T"] = d.T;
                b["at"] = d.at;
                break;
            case DiagnosticsRequest::Kind::Lyapunov:
                break;
            case DiagnosticsRequest::Kind::Accumulation:
                b["tail_fraction"] = d.tail_fraction;
                b["eps"] = d.eps;
                break;
        }
        j["diagnostics"].push_back(b);
    }
    return j;
}

// FNV-1a over the canonical dump; stable under key reordering of the input.
inline std::string config_hash(const RunConfig& cfg) {
    const std::string s = canonical_config_json(cfg).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace spgd
