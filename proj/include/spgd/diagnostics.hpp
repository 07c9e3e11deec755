#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "spgd/engine.hpp"
#include "spgd/region.hpp"

namespace spgd {

// ---------------------------------------------------------------------------
// trend utilities

// Spearman rank correlation with tie-averaged ranks.
inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    if (n != b.size() || n < 2) return std::nan("");
    auto ranks = [](const std::vector<double>& v) {
        std::size_t n = v.size();
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](auto i, auto j) { return v[i] < v[j]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
            double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    auto ra = ranks(a), rb = ranks(b);
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double num = 0, va = 0, vb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va <= 0.0 || vb <= 0.0) return std::nan("");
    return num / std::sqrt(va * vb);
}

inline double spearman_vs_index(const std::vector<double>& v) {
    std::vector<double> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0.0);
    return spearman(idx, v);
}

// Growth summary of a series: rank correlation against occurrence order and
// the ratio of last-quartile mean to first-quartile mean. Asymptotic claims
// are probed through these finite-run trends.
struct TrendSummary {
    std::size_t count = 0;
    bool insufficient = true;  // fewer than 4 data points
    double spearman = std::nan("");
    double quartile_ratio = std::nan("");  // mean(last quarter) / mean(first quarter)
};

inline TrendSummary trend_summary(const std::vector<double>& values) {
    TrendSummary t;
    t.count = values.size();
    if (values.size() < 4) return t;
    t.insufficient = false;
    t.spearman = spearman_vs_index(values);
    std::size_t q = values.size() / 4;
    double first = std::accumulate(values.begin(), values.begin() + q, 0.0) /
                   static_cast<double>(q);
    double last = std::accumulate(values.end() - q, values.end(), 0.0) /
                  static_cast<double>(q);
    t.quartile_ratio = first != 0.0
                           ? last / first
                           : (last > 0.0 ? std::numeric_limits<double>::infinity()
                                         : std::nan(""));
    return t;
}

// ---------------------------------------------------------------------------
// maximal intervals

// Two open neighborhoods with closure(U) contained in V.
struct NeighborhoodPair {
    Region U, V;

    NeighborhoodPair(Region u, Region v) : U(std::move(u)), V(std::move(v)) {
        if (!U.closure_inside(V))
            throw ConfigError("NeighborhoodPair: closure(U) must be contained in V (U=" +
                              U.describe() + ", V=" + V.describe() + ")");
    }
};

// A maximal block [n1, n2] of consecutive iterates staying in V and touching
// U. The final block of a finite run that never exits V is reported with
// truncated=true; its duration is censored.
struct MaximalInterval {
    std::uint64_t n1 = 0, n2 = 0;  // inclusive step indices
    double duration = 0.0;         // tau(n2) - tau(n1)
    bool touched_U = true;
    enum class Boundary { EnteredFromOutside, ExitsAfter, TruncatedAtTrajectoryEnd };
    Boundary boundary = Boundary::ExitsAfter;

    bool truncated() const { return boundary == Boundary::TruncatedAtTrajectoryEnd; }
};

struct IntervalScan {
    std::vector<MaximalInterval> intervals;  // U-touching, in index order
    std::uint64_t non_touching_excursions = 0;  // V-blocks that never touched U
};

namespace detail {

inline void require_region_coverage(const Trajectory& traj, const Region& needed,
                                    const char* who) {
    if (traj.contiguous()) return;
    for (const auto& g : traj.keep_regions)
        if (needed.subset_of(g)) return;
    throw DataCompletenessError(std::string(who) +
                                ": trajectory is thinned and no keep-region covers " +
                                needed.describe());
}

}  // namespace detail

inline IntervalScan find_maximal_intervals(const Trajectory& traj,
                                           const NeighborhoodPair& nb) {
    if (traj.empty()) return {};
    if (nb.V.dim() != traj.dim)
        throw InputError("find_maximal_intervals: region dimension mismatch");
    detail::require_region_coverage(traj, nb.V, "find_maximal_intervals");

    IntervalScan out;
    const std::size_t M = traj.size();
    std::size_t i = 0;
    while (i < M) {
        if (!nb.V.contains(traj.x(i))) {
            ++i;
            continue;
        }
        // extend the block while records are consecutive and inside V
        std::size_t j = i;
        bool touched = nb.U.contains(traj.x(i));
        while (j + 1 < M && traj.step_index(j + 1) == traj.step_index(j) + 1 &&
               nb.V.contains(traj.x(j + 1))) {
            ++j;
            touched = touched || nb.U.contains(traj.x(j));
        }
        const bool at_end = (j + 1 == M);
        if (touched) {
            MaximalInterval iv;
            iv.n1 = traj.step_index(i);
            iv.n2 = traj.step_index(j);
            iv.duration = traj.tau(j) - traj.tau(i);
            iv.touched_U = true;
            iv.boundary = at_end ? MaximalInterval::Boundary::TruncatedAtTrajectoryEnd
                        : iv.n1 > traj.step_index(0)
                            ? MaximalInterval::Boundary::EnteredFromOutside
                            : MaximalInterval::Boundary::ExitsAfter;
            out.intervals.push_back(iv);
        } else {
            ++out.non_touching_excursions;
        }
        i = j + 1;
    }
    return out;
}

// Durations of the completed maximal intervals (truncated final interval is
// censored and excluded), plus their growth trend.
struct LongIntervalSeries {
    std::vector<double> durations;
    TrendSummary trend;
    bool censored_final = false;
};

inline LongIntervalSeries long_interval_series(const std::vector<MaximalInterval>& intervals) {
    LongIntervalSeries s;
    for (const auto& iv : intervals) {
        if (iv.truncated()) {
            s.censored_final = true;
            continue;
        }
        s.durations.push_back(iv.duration);
    }
    s.trend = trend_summary(s.durations);
    return s;
}

// ---------------------------------------------------------------------------
// oscillation-compensation ratios

// Weighted drift averages over growing interval unions A_N:
//   u_N = sum_{i in A_N} gamma_i w_i / sum_{i in A_N} gamma_i,
// where membership is by iteration index. The larger the accumulated
// denominator, the more the alternating drift must cancel for ||u_N|| to
// shrink; this is the oscillation-compensation statistic. plain_u is the
// same ratio with the indicator "x_i in U" (no interval structure), the
// variant that can fail to vanish; it is reported side by side with no
// threshold attached.
struct OscillationReport {
    std::vector<Vec> u;             // u_N, N = 1..upto
    std::vector<double> u_norm;
    std::vector<double> denominator;   // b_N
    std::vector<double> plain_u_norm;  // Eq. with 1_U(x_i), at the same cutoffs
    std::vector<std::uint64_t> subdivision_counts;  // K_i per interval, if T given
};

inline OscillationReport oscillation_ratio(const Trajectory& traj,
                                           const std::vector<MaximalInterval>& intervals,
                                           std::size_t upto_N,
                                           const std::optional<Region>& plain_U = std::nullopt) {
    if (intervals.empty()) throw InputError("oscillation_ratio: no intervals");
    if (upto_N == 0 || upto_N > intervals.size())
        throw InputError("oscillation_ratio: upto_N out of range");
    if (!traj.contiguous())
        throw DataCompletenessError("oscillation_ratio: needs an unthinned trajectory");

    OscillationReport rep;
    const std::size_t d = traj.dim;
    Vec num = zeros(d);
    double den = 0.0;
    Vec plain_num = zeros(d);
    double plain_den = 0.0;
    std::size_t plain_cursor = 0;

    for (std::size_t N = 0; N < upto_N; ++N) {
        const auto& iv = intervals[N];
        for (std::uint64_t n = iv.n1; n <= iv.n2; ++n) {
            const auto i = static_cast<std::size_t>(n);
            if (i >= traj.size()) break;
            const double g = traj.gamma(i);
            auto w = traj.w(i);
            for (std::size_t k = 0; k < d; ++k) num[k] += g * w[k];
            den += g;
        }
        if (den <= 0.0)
            throw InputError("oscillation_ratio: empty denominator at N=" +
                             std::to_string(N + 1));
        rep.u.push_back(scale(1.0 / den, num));
        rep.u_norm.push_back(norm(rep.u.back()));
        rep.denominator.push_back(den);

        if (plain_U) {
            const auto cutoff = static_cast<std::size_t>(iv.n2);
            for (; plain_cursor <= cutoff && plain_cursor < traj.size(); ++plain_cursor) {
                if (!plain_U->contains(traj.x(plain_cursor))) continue;
                const double g = traj.gamma(plain_cursor);
                auto w = traj.w(plain_cursor);
                for (std::size_t k = 0; k < d; ++k) plain_num[k] += g * w[k];
                plain_den += g;
            }
            rep.plain_u_norm.push_back(plain_den > 0.0 ? norm(plain_num) / plain_den
                                                       : std::nan(""));
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// windowed partial-sum sups

namespace detail {

// first stored index j >= i0 with tau(j) - tau(i0) >= T; throws if the window
// leaves the trajectory
inline std::size_t window_end_index(const Trajectory& traj, double T, std::size_t i0,
                                    const char* who) {
    if (!(T > 0.0)) throw InputError(std::string(who) + ": T must be > 0");
    if (i0 >= traj.size()) throw RangeError(std::string(who) + ": n outside trajectory");
    const double target = traj.tau(i0) + T;
    std::size_t lo = i0, hi = traj.size();
    if (traj.tau(hi - 1) < target)
        throw RangeError(std::string(who) + ": window [n, N(T,n)] exceeds the trajectory");
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (traj.tau(mid) >= target)
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

template <typename Term>
double windowed_sup(const Trajectory& traj, double T, std::uint64_t n, Term term,
                    const char* who) {
    if (!traj.contiguous())
        throw DataCompletenessError(std::string(who) + ": needs an unthinned trajectory");
    const auto i0 = static_cast<std::size_t>(n);
    const std::size_t jend = window_end_index(traj, T, i0, who);
    Vec acc = zeros(traj.dim);
    double sup = 0.0;
    for (std::size_t j = i0; j <= jend && j < traj.size(); ++j) {
        term(j, acc);
        sup = std::max(sup, norm(acc));
    }
    return sup;
}

}  // namespace detail

// sup_{n <= j <= N(T,n)} || sum_{i=n}^{j} gamma_i w_i ||
inline double windowed_drift_sup(const Trajectory& traj, double T, std::uint64_t n) {
    return detail::windowed_sup(
        traj, T, n,
        [&](std::size_t j, Vec& acc) {
            const double g = traj.gamma(j);
            auto w = traj.w(j);
            for (std::size_t k = 0; k < traj.dim; ++k) acc[k] += g * w[k];
        },
        "windowed_drift_sup");
}

// sup_{n <= j <= N(T,n)} || sum_{i=n}^{j} gamma_i eta_{i+1} ||
inline double windowed_noise_sup(const Trajectory& traj, double T, std::uint64_t n) {
    return detail::windowed_sup(
        traj, T, n,
        [&](std::size_t j, Vec& acc) {
            const double g = traj.gamma(j);
            auto e = traj.eta(j);
            for (std::size_t k = 0; k < traj.dim; ++k) acc[k] += g * e[k];
        },
        "windowed_noise_sup");
}

// Consistency of the two routes to a drift sum: for every prefix,
// sum gamma_i w_i must equal x_0 - x_{j+1} + sum gamma_i eta_{i+1} up to
// rounding. Guards the bookkeeping between the engine and the diagnostics.
inline double drift_sum_consistency_max(const Trajectory& traj) {
    if (!traj.contiguous())
        throw DataCompletenessError("drift_sum_consistency_max: needs an unthinned trajectory");
    const std::size_t d = traj.dim;
    Vec sw = zeros(d), se = zeros(d);
    auto x0 = traj.x(0);
    double worst = 0.0;
    for (std::size_t j = 0; j < traj.size(); ++j) {
        const double g = traj.gamma(j);
        auto w = traj.w(j);
        auto e = traj.eta(j);
        auto xn = traj.x_next(j);
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            sw[k] += g * w[k];
            se[k] += g * e[k];
            double r = sw[k] - (x0[k] - xn[k]) - se[k];
            s += r * r;
        }
        worst = std::max(worst, std::sqrt(s));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// travel times

struct TravelTimeReport {
    std::vector<double> times;  // tau(n_j) - tau(n_i) per matched transition
    TrendSummary trend;
    bool empty_flagged = false;
};

namespace detail {

inline bool regions_disjoint(const Region& a, const Region& b) {
    using K = Region::Kind;
    if (a.kind == K::Ball && b.kind == K::Ball)
        return dist(a.center, b.center) >= a.radius + b.radius;
    if (a.kind == K::Box && b.kind == K::Box) {
        for (std::size_t i = 0; i < a.lower.size(); ++i)
            if (a.upper[i] <= b.lower[i] || b.upper[i] <= a.lower[i]) return true;
        return false;
    }
    const Region& ball = a.kind == K::Ball ? a : b;
    const Region& box = a.kind == K::Ball ? b : a;
    double s = 0.0;
    for (std::size_t i = 0; i < ball.center.size(); ++i) {
        double c = std::clamp(ball.center[i], box.lower[i], box.upper[i]);
        s += (ball.center[i] - c) * (ball.center[i] - c);
    }
    return std::sqrt(s) >= ball.radius;
}

}  // namespace detail

// Greedy first-arrival matching: each visit to ball_x is matched with the
// next arrival in ball_y, then the scan resumes past the arrival. First
// arrival gives the shortest admissible times, the strictest growth probe.
inline TravelTimeReport travel_times(const Trajectory& traj, const Region& ball_x,
                                     const Region& ball_y) {
    if (!detail::regions_disjoint(ball_x, ball_y))
        throw InputError("travel_times: regions must be disjoint");
    detail::require_region_coverage(traj, ball_x, "travel_times");
    detail::require_region_coverage(traj, ball_y, "travel_times");

    TravelTimeReport rep;
    const std::size_t M = traj.size();
    std::size_t i = 0;
    while (i < M) {
        if (!ball_x.contains(traj.x(i))) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < M && !ball_y.contains(traj.x(j))) ++j;
        if (j >= M) break;
        rep.times.push_back(traj.tau(j) - traj.tau(i));
        i = j + 1;
    }
    rep.trend = trend_summary(rep.times);
    rep.empty_flagged = rep.times.empty();
    return rep;
}

// ---------------------------------------------------------------------------
// objective series and accumulation estimates

struct LyapunovSeries {
    std::vector<double> values;  // (f+g)(x_n) per stored record
    double tail_mean = std::nan("");
    double tail_stddev = std::nan("");
    std::size_t tail_start = 0;
};

inline LyapunovSeries lyapunov_series(const Trajectory& traj) {
    LyapunovSeries s;
    s.values.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) s.values.push_back(traj.fg(i));
    if (s.values.empty()) return s;
    s.tail_start = s.values.size() - std::max<std::size_t>(s.values.size() / 10, 1);
    double m = 0.0;
    std::size_t c = 0;
    for (std::size_t i = s.tail_start; i < s.values.size(); ++i, ++c) m += s.values[i];
    m /= static_cast<double>(c);
    double v = 0.0;
    for (std::size_t i = s.tail_start; i < s.values.size(); ++i)
        v += (s.values[i] - m) * (s.values[i] - m);
    s.tail_mean = m;
    s.tail_stddev = std::sqrt(v / static_cast<double>(c));
    return s;
}

struct ClusterCenter {
    Vec point;
    std::uint64_t mass = 0;  // tail points assigned to this center
};

// Greedy eps-net over the tail iterates: walk the tail in order, opening a
// new center whenever a point is farther than eps from all existing ones,
// then assign every tail point to its nearest center.
inline std::vector<ClusterCenter> accumulation_estimate(const Trajectory& traj,
                                                        double tail_fraction,
                                                        double eps) {
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
        throw InputError("accumulation_estimate: tail_fraction must be in (0, 1]");
    if (!(eps > 0.0)) throw InputError("accumulation_estimate: eps must be > 0");
    if (traj.size() < 100)
        throw InputError("accumulation_estimate: trajectory too short (need >= 100 records)");

    const std::size_t M = traj.size();
    const auto start = static_cast<std::size_t>(
        std::floor(static_cast<double>(M) * (1.0 - tail_fraction)));

    std::vector<ClusterCenter> centers;
    auto sq_dist_to = [&](const Vec& c, std::size_t i) {
        auto x = traj.x(i);
        double s = 0.0;
        for (std::size_t k = 0; k < traj.dim; ++k) s += (x[k] - c[k]) * (x[k] - c[k]);
        return s;
    };
    for (std::size_t i = start; i < M; ++i) {
        bool covered = false;
        for (const auto& c : centers)
            if (sq_dist_to(c.point, i) <= eps * eps) {
                covered = true;
                break;
            }
        if (!covered) centers.push_back({traj.x_vec(i), 0});
    }
    for (std::size_t i = start; i < M; ++i) {
        std::size_t best = 0;
        double bd = sq_dist_to(centers[0].point, i);
        for (std::size_t c = 1; c < centers.size(); ++c) {
            double d2 = sq_dist_to(centers[c].point, i);
            if (d2 < bd) {
                bd = d2;
                best = c;
            }
        }
        ++centers[best].mass;
    }
    std::sort(centers.begin(), centers.end(),
              [](const auto& a, const auto& b) { return a.mass > b.mass; });
    return centers;
}

// ---------------------------------------------------------------------------
// interval subdivision (per-chunk decomposition of a maximal interval)

struct IntervalSubdivision {
    std::vector<std::uint64_t> breakpoints;  // a_1 = n1, ..., a_{K+1} = n2
    std::uint64_t chunks = 0;                // K
};

inline IntervalSubdivision interval_subdivision(const MaximalInterval& interval,
                                                const Trajectory& traj, double T) {
    if (!(T > 0.0)) throw InputError("interval_subdivision: T must be > 0");
    if (!traj.contiguous())
        throw DataCompletenessError("interval_subdivision: needs an unthinned trajectory");

    IntervalSubdivision out;
    out.breakpoints.push_back(interval.n1);
    std::uint64_t a = interval.n1;
    if (interval.n2 == interval.n1) {
        out.breakpoints.push_back(interval.n2);
        out.chunks = 1;
        return out;
    }
    while (a < interval.n2) {
        const auto i0 = static_cast<std::size_t>(a);
        const double target = traj.tau(i0) + T;
        std::uint64_t next = interval.n2;
        // smallest j >= a with tau(j) - tau(a) >= T, capped at n2
        std::size_t lo = i0, hi = static_cast<std::size_t>(interval.n2);
        if (traj.tau(hi) >= target) {
            while (lo < hi) {
                std::size_t mid = (lo + hi) / 2;
                if (traj.tau(mid) >= target)
                    hi = mid;
                else
                    lo = mid + 1;
            }
            next = lo;
        }
        out.breakpoints.push_back(next);
        a = next;
    }
    out.chunks = out.breakpoints.size() - 1;
    return out;
}

}  // namespace spgd
