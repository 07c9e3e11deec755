#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "spgd/builtins.hpp"
#include "spgd/diagnostics.hpp"
#include "test_helpers.hpp"

using namespace spgd;
using spgd_test::make_traj;
using spgd_test::make_traj_1d;

namespace {

Region interval_U(double r) { return Region::box({-r}, {r}); }

NeighborhoodPair nb1d(double rU, double rV) {
    return NeighborhoodPair(interval_U(rU), interval_U(rV));
}

}  // namespace

TEST_CASE("spearman utility") {
    REQUIRE(spearman_vs_index({1.0, 2.0, 3.0, 4.0}) == Catch::Approx(1.0));
    REQUIRE(spearman_vs_index({4.0, 3.0, 2.0, 1.0}) == Catch::Approx(-1.0));
    REQUIRE(std::isnan(spearman_vs_index({2.0, 2.0, 2.0, 2.0})));
    // ties: ranks averaged
    double s = spearman_vs_index({1.0, 1.0, 2.0, 3.0});
    REQUIRE(s > 0.8);
    REQUIRE(s < 1.0);
}

TEST_CASE("neighborhood pair requires closure(U) strictly inside V") {
    REQUIRE_NOTHROW(nb1d(0.1, 0.5));
    REQUIRE_THROWS_AS(nb1d(0.5, 0.5), ConfigError);
    REQUIRE_THROWS_AS(NeighborhoodPair(Region::ball({0.0, 0.0}, 0.5),
                                       Region::ball({0.4, 0.0}, 0.6)),
                      ConfigError);
    REQUIRE_NOTHROW(NeighborhoodPair(Region::ball({0.0, 0.0}, 0.5),
                                     Region::ball({0.1, 0.0}, 0.7)));
}

TEST_CASE("maximal interval scan on the hand-traced sequence") {
    // V-blocks touching U; x_5 = 0.2 sits inside U = (-0.25, 0.25)
    auto t = make_traj_1d({5.0, 0.3, 0.1, 0.4, 5.0, 0.2, 5.0, 5.0},
                          Schedule::constant(1.0));
    auto scan = find_maximal_intervals(t, nb1d(0.25, 1.0));
    REQUIRE(scan.intervals.size() == 2);
    REQUIRE(scan.intervals[0].n1 == 1);
    REQUIRE(scan.intervals[0].n2 == 3);
    REQUIRE(scan.intervals[0].duration == Catch::Approx(2.0));
    REQUIRE_FALSE(scan.intervals[0].truncated());
    REQUIRE(scan.intervals[1].n1 == 5);
    REQUIRE(scan.intervals[1].n2 == 5);
    REQUIRE(scan.intervals[1].duration == 0.0);
    REQUIRE(scan.non_touching_excursions == 0);

    // open-set semantics: a boundary point does not count as touching U
    auto t2 = make_traj_1d({5.0, 0.25, 5.0, 5.0}, Schedule::constant(1.0));
    auto scan2 = find_maximal_intervals(t2, nb1d(0.25, 1.0));
    REQUIRE(scan2.intervals.empty());
    REQUIRE(scan2.non_touching_excursions == 1);
}

TEST_CASE("interval scan degenerate cases") {
    SECTION("whole trajectory inside U: one truncated interval") {
        auto t = make_traj_1d(std::vector<double>(50, 0.01), Schedule::constant(1.0));
        auto scan = find_maximal_intervals(t, nb1d(0.1, 0.5));
        REQUIRE(scan.intervals.size() == 1);
        REQUIRE(scan.intervals[0].n1 == 0);
        REQUIRE(scan.intervals[0].n2 == 48);  // records 0..48 hold x_0..x_48
        REQUIRE(scan.intervals[0].truncated());
    }
    SECTION("never entering V: empty") {
        auto t = make_traj_1d({5.0, 6.0, 7.0, 8.0}, Schedule::constant(1.0));
        auto scan = find_maximal_intervals(t, nb1d(0.1, 0.5));
        REQUIRE(scan.intervals.empty());
    }
}

TEST_CASE("long interval series and trend") {
    auto t = make_traj_1d({5.0, 0.3, 0.1, 0.4, 5.0, 0.2, 5.0, 5.0},
                          Schedule::constant(1.0));
    auto scan = find_maximal_intervals(t, nb1d(0.25, 1.0));
    auto series = long_interval_series(scan.intervals);
    REQUIRE(series.durations == std::vector<double>{2.0, 0.0});
    REQUIRE(series.trend.insufficient);  // fewer than 4 completed intervals
    REQUIRE_FALSE(series.censored_final);

    // censoring: truncated final interval is reported but not in the series
    auto t2 = make_traj_1d({5.0, 0.1, 5.0, 0.1, 0.1, 0.1}, Schedule::constant(1.0));
    auto scan2 = find_maximal_intervals(t2, nb1d(0.25, 1.0));
    REQUIRE(scan2.intervals.size() == 2);
    REQUIRE(scan2.intervals[1].truncated());
    auto series2 = long_interval_series(scan2.intervals);
    REQUIRE(series2.durations.size() == 1);
    REQUIRE(series2.censored_final);
}

TEST_CASE("maximal intervals are disjoint and ordered on a real run") {
    auto p = builtin_problem("abs1d");
    auto t = run_spgd(p, Schedule::power(1.0, 0.7), NoiseModel::gaussian(0.05), 4,
                      {0.95}, 20000);
    auto scan = find_maximal_intervals(
        t, NeighborhoodPair(interval_U(0.01), interval_U(0.05)));
    for (std::size_t i = 1; i < scan.intervals.size(); ++i)
        REQUIRE(scan.intervals[i].n1 > scan.intervals[i - 1].n2 + 1);
    for (const auto& iv : scan.intervals) REQUIRE(iv.n2 >= iv.n1);
}

TEST_CASE("oscillation ratio examples") {
    SECTION("two equal steps with opposite drift cancel") {
        auto t = make_traj_1d({0.0, -1.0, 0.0}, Schedule::constant(1.0));
        // w = [ (0-(-1))/1, (-1-0)/1 ] = [1, -1]
        std::vector<MaximalInterval> ivs{{0, 1, 1.0, true}};
        auto rep = oscillation_ratio(t, ivs, 1);
        REQUIRE(rep.u_norm.size() == 1);
        REQUIRE(rep.u_norm[0] == Catch::Approx(0.0).margin(1e-15));
        REQUIRE(rep.denominator[0] == Catch::Approx(2.0));
    }
    SECTION("single step ratio is the drift itself") {
        auto t = make_traj_1d({1.0, 0.0}, Schedule::constant(0.5));
        // w = (1-0)/0.5 = 2
        std::vector<MaximalInterval> ivs{{0, 0, 0.0, true}};
        auto rep = oscillation_ratio(t, ivs, 1);
        REQUIRE(rep.u[0][0] == Catch::Approx(2.0));
        REQUIRE(rep.denominator[0] == Catch::Approx(0.5));
    }
    SECTION("denominators are monotone in N") {
        auto t = make_traj_1d({5.0, 0.3, 0.1, 0.4, 5.0, 0.2, 5.0, 5.0},
                              Schedule::constant(1.0));
        auto scan = find_maximal_intervals(t, nb1d(0.25, 1.0));
        auto rep = oscillation_ratio(t, scan.intervals, scan.intervals.size(),
                                     interval_U(0.25));
        REQUIRE(rep.denominator.size() == 2);
        REQUIRE(rep.denominator[1] >= rep.denominator[0]);
        REQUIRE(rep.plain_u_norm.size() == 2);
    }
    SECTION("errors") {
        auto t = make_traj_1d({1.0, 0.0}, Schedule::constant(0.5));
        REQUIRE_THROWS_AS(oscillation_ratio(t, {}, 1), InputError);
        std::vector<MaximalInterval> ivs{{0, 0, 0.0, true}};
        REQUIRE_THROWS_AS(oscillation_ratio(t, ivs, 2), InputError);
    }
}

TEST_CASE("windowed drift sup examples") {
    SECTION("zero drift in a constant trajectory") {
        auto t = make_traj_1d(std::vector<double>(10, 1.0), Schedule::constant(1.0));
        REQUIRE(windowed_drift_sup(t, 2.0, 0) == 0.0);
    }
    SECTION("hand-computed prefix maxima") {
        // w = [1, -1, 1] from x = [0, -1, 0, -1]
        auto t = make_traj_1d({0.0, -1.0, 0.0, -1.0}, Schedule::constant(1.0));
        REQUIRE(windowed_drift_sup(t, 2.0, 0) == Catch::Approx(1.0));
    }
    SECTION("window exceeding the trajectory raises") {
        auto t = make_traj_1d({0.0, 1.0, 2.0}, Schedule::constant(1.0));
        REQUIRE_THROWS_AS(windowed_drift_sup(t, 10.0, 0), RangeError);
        REQUIRE_THROWS_AS(windowed_drift_sup(t, 1.0, 99), RangeError);
    }
    SECTION("monotone in T") {
        auto p = builtin_problem("abs1d");
        auto t = run_spgd(p, Schedule::power(1.0, 0.7), NoiseModel::gaussian(0.1), 5,
                          {0.95}, 5000);
        for (std::uint64_t n : {10ull, 100ull, 1000ull})
            REQUIRE(windowed_drift_sup(t, 0.5, n) <=
                    windowed_drift_sup(t, 2.0, n) + 1e-15);
    }
}

TEST_CASE("windowed noise sup examples") {
    SECTION("zero noise gives zero") {
        auto p = builtin_problem("abs1d");
        auto t = run_spgd(p, Schedule::power(1.0, 0.7), NoiseModel::zero(), 0, {0.95},
                          1000);
        REQUIRE(windowed_noise_sup(t, 1.0, 10) == 0.0);
        REQUIRE(windowed_noise_sup(t, 1.0, 500) == 0.0);
    }
    SECTION("single-step window norm") {
        auto t = make_traj({{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}},
                           Schedule::constant(0.1),
                           {{3.0, 4.0}, {0.0, 0.0}});
        // T = 0.05 <= gamma, so N(T,0) = 1 and the sup is ||0.1*(3,4)|| = 0.5
        REQUIRE(windowed_noise_sup(t, 0.05, 0) == Catch::Approx(0.5));
    }
}

TEST_CASE("drift sums agree with the update-identity route") {
    BuiltinParams lp;
    lp.matrices["A"] = Matrix::diagonal({1.0, 2.0});
    lp.vectors["b"] = {3.0, -1.0};
    lp.scalars["lambda"] = 1.0;
    auto p = builtin_problem("lasso", lp);
    auto t = run_spgd(p, Schedule::power(1.0, 0.7), NoiseModel::gaussian(0.3), 6,
                      {2.0, 2.0}, 10000);
    REQUIRE(drift_sum_consistency_max(t) <= 1e-10);
}

TEST_CASE("travel times") {
    SECTION("alternating visits give unit times") {
        std::vector<double> xs;
        for (int i = 0; i < 20; ++i) xs.push_back(i % 2 == 0 ? 0.0 : 1.0);
        auto t = make_traj_1d(xs, Schedule::constant(1.0));
        auto rep = travel_times(t, Region::ball({0.0}, 0.1), Region::ball({1.0}, 0.1));
        REQUIRE_FALSE(rep.empty_flagged);
        REQUIRE(rep.times.size() == 9);
        for (double v : rep.times) REQUIRE(v == Catch::Approx(1.0));
    }
    SECTION("no visits to the target: empty and flagged") {
        auto t = make_traj_1d({0.0, 0.0, 0.0, 0.0}, Schedule::constant(1.0));
        auto rep = travel_times(t, Region::ball({0.0}, 0.1), Region::ball({1.0}, 0.1));
        REQUIRE(rep.empty_flagged);
        REQUIRE(rep.times.empty());
    }
    SECTION("disjointness precondition") {
        auto t = make_traj_1d({0.0, 1.0}, Schedule::constant(1.0));
        REQUIRE_THROWS_AS(
            travel_times(t, Region::ball({0.0}, 0.6), Region::ball({1.0}, 0.6)),
            InputError);
    }
    SECTION("greedy matching consumes the trajectory forward") {
        // x visits at 0 and 2; y visit at 4 only: exactly one transition
        auto t = make_traj_1d({0.0, 0.5, 0.0, 0.5, 1.0, 1.0}, Schedule::constant(1.0));
        auto rep = travel_times(t, Region::ball({0.0}, 0.1), Region::ball({1.0}, 0.1));
        REQUIRE(rep.times.size() == 1);
        REQUIRE(rep.times[0] == Catch::Approx(4.0));
    }
}

TEST_CASE("lyapunov series") {
    SECTION("constant trajectory: flat series") {
        auto p = builtin_problem("abs1d");
        auto t = run_spgd(p, Schedule::power(1.0, 0.7), NoiseModel::zero(), 0, {0.0},
                          200);
        auto s = lyapunov_series(t);
        REQUIRE(s.values.size() == 200);
        REQUIRE(s.tail_mean == 0.0);
        REQUIRE(s.tail_stddev == 0.0);
    }
    SECTION("abs1d oscillation tail stays within one step size") {
        auto p = builtin_problem("abs1d");
        RunOptions opts;
        opts.validate_schedule = false;
        auto t = run_spgd(p, Schedule::constant(0.4), NoiseModel::zero(), 0, {1.0},
                          400, opts);
        auto s = lyapunov_series(t);
        REQUIRE(s.values[0] == 1.0);
        REQUIRE(s.values[1] == Catch::Approx(0.6));
        for (std::size_t i = s.tail_start; i < s.values.size(); ++i)
            REQUIRE(s.values[i] <= 0.4 + 1e-12);
    }
}

TEST_CASE("accumulation estimate") {
    SECTION("constant tail: one center with full mass") {
        auto p = builtin_problem("abs1d");
        auto t = run_spgd(p, Schedule::power(1.0, 0.7), NoiseModel::zero(), 0, {0.0},
                          500);
        auto centers = accumulation_estimate(t, 0.2, 1e-3);
        REQUIRE(centers.size() == 1);
        REQUIRE(centers[0].point == Vec{0.0});
        REQUIRE(centers[0].mass == 100);
    }
    SECTION("two-point alternation: two centers") {
        std::vector<double> xs;
        for (int i = 0; i < 200; ++i) xs.push_back(i % 2 == 0 ? 0.0 : 1.0);
        auto t = make_traj_1d(xs, Schedule::constant(1.0));
        auto centers = accumulation_estimate(t, 0.5, 0.2);
        REQUIRE(centers.size() == 2);
        REQUIRE(centers[0].mass + centers[1].mass == 100);
    }
    SECTION("eps-net properties on random data") {
        std::mt19937 gen(31);
        std::uniform_real_distribution<double> u(-1, 1);
        std::vector<Vec> xs;
        for (int i = 0; i < 400; ++i) xs.push_back({u(gen), u(gen)});
        auto t = make_traj(xs, Schedule::constant(1.0));
        const double eps = 0.3;
        auto centers = accumulation_estimate(t, 1.0, eps);
        // centers pairwise separated by more than eps
        for (std::size_t a = 0; a < centers.size(); ++a)
            for (std::size_t b = a + 1; b < centers.size(); ++b)
                REQUIRE(dist(centers[a].point, centers[b].point) > eps);
        // every tail point within eps of some center
        for (std::size_t i = 0; i < t.size(); ++i) {
            double best = 1e300;
            for (const auto& c : centers) best = std::min(best, dist(c.point, t.x_vec(i)));
            REQUIRE(best <= eps);
        }
        std::uint64_t total = 0;
        for (const auto& c : centers) total += c.mass;
        REQUIRE(total == t.size());
    }
    SECTION("preconditions") {
        auto t = make_traj_1d({0.0, 1.0}, Schedule::constant(1.0));
        REQUIRE_THROWS_AS(accumulation_estimate(t, 0.5, 0.1), InputError);
    }
}

TEST_CASE("interval subdivision") {
    SECTION("constant schedule arithmetic") {
        auto t = make_traj_1d(std::vector<double>(20, 0.0), Schedule::constant(1.0));
        MaximalInterval iv{0, 10, 10.0, true};
        auto sub = interval_subdivision(iv, t, 3.0);
        REQUIRE(sub.breakpoints == std::vector<std::uint64_t>{0, 3, 6, 9, 10});
        REQUIRE(sub.chunks == 4);
    }
    SECTION("zero-duration interval: one chunk") {
        auto t = make_traj_1d(std::vector<double>(5, 0.0), Schedule::constant(1.0));
        MaximalInterval iv{2, 2, 0.0, true};
        auto sub = interval_subdivision(iv, t, 1.0);
        REQUIRE(sub.chunks == 1);
        REQUIRE(sub.breakpoints == std::vector<std::uint64_t>{2, 2});
    }
    SECTION("harmonic steps: window scan against partial sums") {
        auto t = make_traj_1d(std::vector<double>(8, 0.0), Schedule::power(1.0, 1.0));
        MaximalInterval iv{1, 5, 0.0, true};
        auto sub = interval_subdivision(iv, t, 1.0);
        // steps 1/2+1/3 < 1, +1/4 >= 1 -> first breakpoint at 4, then capped at 5
        REQUIRE(sub.breakpoints == std::vector<std::uint64_t>{1, 4, 5});
        REQUIRE(sub.chunks == 2);
    }
}

TEST_CASE("thinned trajectories: covered regions fine, uncovered refused") {
    auto p = builtin_problem("abs1d");
    auto full = run_spgd(p, Schedule::power(1.0, 0.7), NoiseModel::zero(), 0, {5.0},
                         3000);
    RunOptions opts;
    opts.thinning_stride = 37;
    opts.keep_regions = {Region::box({-0.2}, {0.2})};
    auto thin = run_spgd(p, Schedule::power(1.0, 0.7), NoiseModel::zero(), 0, {5.0},
                         3000, opts);

    auto nb = NeighborhoodPair(interval_U(0.05), interval_U(0.2));
    auto a = find_maximal_intervals(full, nb);
    auto b = find_maximal_intervals(thin, nb);
    REQUIRE(a.intervals.size() == b.intervals.size());
    for (std::size_t i = 0; i < a.intervals.size(); ++i) {
        REQUIRE(a.intervals[i].n1 == b.intervals[i].n1);
        REQUIRE(a.intervals[i].n2 == b.intervals[i].n2);
    }

    auto wide = NeighborhoodPair(interval_U(0.05), interval_U(0.3));
    REQUIRE_THROWS_AS(find_maximal_intervals(thin, wide), DataCompletenessError);
}
