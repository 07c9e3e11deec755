#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "spgd/builtins.hpp"
#include "spgd/config.hpp"
#include "spgd/trajectory_io.hpp"

using namespace spgd;
namespace fs = std::filesystem;

namespace {

const char* kMinimalConfig = R"({
  "problem": {"name": "abs1d"},
  "schedule": {"kind": "power", "c": 1.0, "alpha": 0.7},
  "noise": {"kind": "zero"},
  "x0": [0.95],
  "n_iters": 10000,
  "seed": 1
})";

fs::path temp_dir() {
    auto d = fs::temp_directory_path() / "spgd_test_io";
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("minimal config parses with defaults") {
    auto cfg = parse_config(kMinimalConfig);
    REQUIRE(cfg.problem.name == "abs1d");
    REQUIRE(cfg.schedule.kind == "power");
    REQUIRE(cfg.noise.kind == "zero");
    REQUIRE(cfg.n_iters == 10000);
    REQUIRE(cfg.bound == 1e6);
    REQUIRE(cfg.thinning == 1);
    REQUIRE(cfg.diagnostics.empty());
}

TEST_CASE("config rejections carry a JSON-pointer style path") {
    SECTION("q below 2") {
        std::string bad = R"({
          "problem": {"name": "abs1d"},
          "schedule": {"kind": "power", "c": 1.0, "alpha": 0.7},
          "noise": {"kind": "gaussian", "sigma": 0.1, "q": 1.5},
          "x0": [0.0], "n_iters": 10, "seed": 1
        })";
        REQUIRE_THROWS_WITH(parse_config(bad),
                            Catch::Matchers::ContainsSubstring("q must be >= 2"));
    }
    SECTION("neighborhood closure violation") {
        std::string bad = R"({
          "problem": {"name": "abs1d"},
          "schedule": {"kind": "power", "c": 1.0, "alpha": 0.7},
          "noise": {"kind": "zero"},
          "x0": [0.0], "n_iters": 10, "seed": 1,
          "diagnostics": [{"kind": "intervals",
                           "U": {"kind": "ball", "center": [0.0], "radius": 0.5},
                           "V": {"kind": "ball", "center": [0.0], "radius": 0.5}}]
        })";
        REQUIRE_THROWS_WITH(parse_config(bad),
                            Catch::Matchers::ContainsSubstring("closure"));
    }
    SECTION("unknown key is rejected with its path") {
        std::string bad = R"({
          "problem": {"name": "abs1d"},
          "schedule": {"kind": "power", "c": 1.0, "alpha": 0.7},
          "noise": {"kind": "zero", "sigmaa": 0.1},
          "x0": [0.0], "n_iters": 10, "seed": 1
        })";
        REQUIRE_THROWS_WITH(parse_config(bad),
                            Catch::Matchers::ContainsSubstring("/noise/sigmaa"));
    }
    SECTION("unknown problem lists valid names") {
        std::string bad = R"({
          "problem": {"name": "rosenbrock"},
          "schedule": {"kind": "power", "c": 1.0, "alpha": 0.7},
          "noise": {"kind": "zero"},
          "x0": [0.0], "n_iters": 10, "seed": 1
        })";
        REQUIRE_THROWS_WITH(parse_config(bad),
                            Catch::Matchers::ContainsSubstring("circle_oscillator"));
    }
    SECTION("x0 dimension mismatch") {
        std::string bad = R"({
          "problem": {"name": "circle_oscillator"},
          "schedule": {"kind": "power", "c": 1.0, "alpha": 0.7},
          "noise": {"kind": "zero"},
          "x0": [0.0], "n_iters": 10, "seed": 1
        })";
        REQUIRE_THROWS_AS(parse_config(bad), Error);
    }
    SECTION("invalid JSON") {
        REQUIRE_THROWS_AS(parse_config("{nope"), ConfigError);
    }
}

TEST_CASE("canonical round trip is idempotent and order-insensitive") {
    std::string full = R"({
      "seed": 3,
      "n_iters": 500,
      "x0": [1.0, 1.0],
      "noise": {"q": 4.0, "kind": "gaussian", "sigma": 0.1},
      "schedule": {"alpha": 0.7, "kind": "power", "c": 0.5},
      "problem": {"params": {"lambda": 1.0, "dim": 2}, "name": "lasso"},
      "bound": 100.0,
      "diagnostics": [
        {"kind": "intervals",
         "U": {"kind": "ball", "center": [0.0, 0.0], "radius": 0.1},
         "V": {"kind": "ball", "center": [0.0, 0.0], "radius": 0.5},
         "subdivision_T": 1.0},
        {"kind": "travel_times",
         "ball_x": {"kind": "ball", "center": [1.0, 0.0], "radius": 0.1},
         "ball_y": {"kind": "ball", "center": [0.0, 1.0], "radius": 0.1}},
        {"kind": "windowed_sups", "T": 1.0, "at": [10, 100]},
        {"kind": "lyapunov"},
        {"kind": "accumulation", "tail_fraction": 0.2, "eps": 0.05}
      ]
    })";
    auto cfg = parse_config(full);
    auto canon1 = canonical_config_json(cfg).dump(2);
    auto cfg2 = parse_config(canon1);
    auto canon2 = canonical_config_json(cfg2).dump(2);
    REQUIRE(canon1 == canon2);
    REQUIRE(config_hash(cfg) == config_hash(cfg2));

    // reordering keys does not change the hash (JSON objects are unordered,
    // canonicalization sorts them)
    auto reordered = parse_config(canon1);
    REQUIRE(config_hash(reordered) == config_hash(cfg));
}

TEST_CASE("17-digit float formatting is read back exactly") {
    for (double v : {1.0 / 3.0, 0.1, 1e300, 5e-324, -2.718281828459045,
                     123456789.123456789}) {
        std::string s = detail::fmt17(v);
        REQUIRE(detail::parse_double(s) == v);
    }
    REQUIRE_THROWS_AS(detail::parse_double("bogus"), IoError);
}

TEST_CASE("trajectory CSV round trip is bit exact") {
    BuiltinParams lp;
    lp.matrices["A"] = Matrix::diagonal({1.0, 2.0});
    lp.vectors["b"] = {3.0, -1.0};
    lp.scalars["lambda"] = 1.0;
    auto p = builtin_problem("lasso", lp);
    auto t = run_spgd(p, Schedule::power(1.0, 0.7), NoiseModel::gaussian(0.25), 17,
                      {1.5, -0.5}, 200);

    auto dir = temp_dir();
    auto csv = (dir / "t.csv").string();
    auto side = (dir / "t.meta.json").string();
    write_trajectory_csv(t, csv);
    write_trajectory_sidecar(t, side);

    auto r = read_trajectory_csv(csv, side);
    REQUIRE(r.size() == t.size());
    REQUIRE(r.dim == t.dim);
    REQUIRE(r.seed == t.seed);
    REQUIRE(r.problem_id == t.problem_id);
    for (std::size_t i = 0; i < t.size(); ++i) {
        REQUIRE(r.tau(i) == t.tau(i));
        REQUIRE(r.gamma(i) == t.gamma(i));
        REQUIRE(r.fg(i) == t.fg(i));
        for (std::size_t k = 0; k < t.dim; ++k) {
            REQUIRE(r.x(i)[k] == t.x(i)[k]);
            REQUIRE(r.v(i)[k] == t.v(i)[k]);
            REQUIRE(r.eta(i)[k] == t.eta(i)[k]);
            REQUIRE(r.w(i)[k] == t.w(i)[k]);
            REQUIRE(r.x_next(i)[k] == t.x_next(i)[k]);
        }
    }
    REQUIRE(r.final_x() == t.final_x());
}

TEST_CASE("flow csv smoke") {
    auto abs1 = builtin_problem("abs1d");
    auto flow = integrate_flow(abs1, {2.0}, 1.0, 0.1);
    auto path = (temp_dir() / "flow.csv").string();
    write_flow_csv(flow, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    REQUIRE(header == "t,x0");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    REQUIRE(rows == flow.points.size());
}
