#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include "spgd/errors.hpp"

namespace spgd {

// Step-size sequence. gamma(n) is the step applied between x_n and x_{n+1}
// (n = 0, 1, ...). For the power kind gamma(n) = c * (n+1)^(-alpha), so that
// tau(n) = sum_{i<n} gamma(i) = sum_{k=1..n} c * k^(-alpha), the discrete
// time of the algorithm counted from k = 1.
class Schedule {
public:
    enum class Kind { Power, Constant, Custom };

    static Schedule power(double c, double alpha) {
        if (!(c > 0.0)) throw InputError("power schedule: c must be > 0");
        if (!(alpha > 0.0 && alpha <= 1.0))
            throw InputError("power schedule: alpha must be in (0, 1]");
        Schedule s;
        s.kind_ = Kind::Power;
        s.c_ = c;
        s.alpha_ = alpha;
        return s;
    }

    static Schedule constant(double c) {
        if (!(c > 0.0)) throw InputError("constant schedule: c must be > 0");
        Schedule s;
        s.kind_ = Kind::Constant;
        s.c_ = c;
        return s;
    }

    static Schedule custom(std::function<double(std::uint64_t)> fn,
                           std::string description = "custom") {
        Schedule s;
        s.kind_ = Kind::Custom;
        s.custom_ = std::move(fn);
        s.custom_desc_ = std::move(description);
        return s;
    }

    Kind kind() const { return kind_; }
    double c() const { return c_; }
    double alpha() const { return alpha_; }

    double gamma(std::uint64_t n) const {
        double g;
        switch (kind_) {
            case Kind::Power:
                g = c_ * std::pow(static_cast<double>(n) + 1.0, -alpha_);
                break;
            case Kind::Constant:
                g = c_;
                break;
            case Kind::Custom:
            default:
                g = custom_(n);
                break;
        }
        if (!(g >= 0.0))
            throw InputError("schedule produced a negative step at n=" + std::to_string(n));
        return g;
    }

    // tau(n) = sum_{i<n} gamma(i); cached prefix sums, safe to share across
    // threads.
    double tau(std::uint64_t n) const {
        std::lock_guard<std::mutex> lock(cache_->m);
        auto& prefix = cache_->prefix;
        while (prefix.size() <= n)
            prefix.push_back(prefix.back() + gamma(prefix.size() - 1));
        return prefix[n];
    }

    std::string describe() const {
        switch (kind_) {
            case Kind::Power:
                return "power(c=" + std::to_string(c_) + ", alpha=" + std::to_string(alpha_) + ")";
            case Kind::Constant:
                return "constant(c=" + std::to_string(c_) + ")";
            case Kind::Custom:
            default:
                return custom_desc_;
        }
    }

private:
    struct TauCache {
        std::mutex m;
        std::vector<double> prefix{0.0};
    };

    Kind kind_ = Kind::Constant;
    double c_ = 1.0;
    double alpha_ = 1.0;
    std::function<double(std::uint64_t)> custom_;
    std::string custom_desc_;
    std::shared_ptr<TauCache> cache_ = std::make_shared<TauCache>();
};

inline double tau(const Schedule& s, std::uint64_t n) { return s.tau(n); }

// N(T, n): smallest j >= n with tau(j) - tau(n) >= T. Requires a divergent
// step sum to terminate; `cap` bounds the scan past n.
inline std::uint64_t window_end(const Schedule& s, double T, std::uint64_t n,
                                std::uint64_t cap = 1'000'000'000ull) {
    if (!(T > 0.0)) throw InputError("window_end: T must be > 0");
    const double t0 = s.tau(n);
    std::uint64_t j = n;
    double t = t0;
    while (t - t0 < T) {
        if (j - n >= cap)
            throw RangeError("window_end: cap exceeded; schedule looks effectively summable");
        t += s.gamma(j);
        ++j;
    }
    return j;
}

// --- Validation of the step-size assumptions -------------------------------
//
// Condition A: sum gamma_i diverges. Condition B: sum gamma_i^(1 + q/2)
// converges. For power/constant kinds both are decided analytically by the
// p-series criterion; custom schedules only get partial sums at the horizon
// plus a trend heuristic, and the verdict is marked empirical.

enum class Verdict { Pass, Fail, EmpiricalPass, EmpiricalFail };

inline bool verdict_ok(Verdict v) {
    return v == Verdict::Pass || v == Verdict::EmpiricalPass;
}

inline std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "PASS";
        case Verdict::Fail: return "FAIL";
        case Verdict::EmpiricalPass: return "PASS(empirical)";
        case Verdict::EmpiricalFail: return "FAIL(empirical)";
    }
    return "?";
}

struct ScheduleValidation {
    Verdict divergence = Verdict::Fail;    // sum gamma = +inf
    Verdict summability = Verdict::Fail;   // sum gamma^(1+q/2) < +inf
    bool analytic = false;
    double q = 2.0;
    double partial_sum = 0.0;              // sum gamma at horizon
    double partial_sum_pow = 0.0;          // sum gamma^(1+q/2) at horizon
    std::uint64_t horizon = 0;
    std::string detail;

    bool ok() const { return verdict_ok(divergence) && verdict_ok(summability); }
};

namespace detail {

// Ratio of tail increments over successive octaves; ~2^(1-p) for n^(-p)
// terms, so >= ~1 signals divergence.
inline Verdict trend_verdict(double inc_late, double inc_early, bool want_divergent) {
    bool looks_divergent = inc_early <= 0.0 || inc_late / inc_early >= 0.95;
    if (want_divergent)
        return looks_divergent ? Verdict::EmpiricalPass : Verdict::EmpiricalFail;
    return looks_divergent ? Verdict::EmpiricalFail : Verdict::EmpiricalPass;
}

}  // namespace detail

inline ScheduleValidation validate_schedule(const Schedule& s, double q,
                                            std::uint64_t horizon = 1'000'000) {
    if (!(q >= 2.0)) throw InputError("validate_schedule: q must be >= 2");
    if (horizon < 1000) throw InputError("validate_schedule: horizon must be >= 1000");

    ScheduleValidation r;
    r.q = q;
    r.horizon = horizon;
    const double p = 1.0 + q / 2.0;  // exponent of condition B

    double sum = 0.0, sum_pow = 0.0;
    // increments over [h/4, h/2) and [h/2, h) for the custom-trend heuristic
    double incA_early = 0.0, incA_late = 0.0, incB_early = 0.0, incB_late = 0.0;
    for (std::uint64_t n = 0; n < horizon; ++n) {
        const double g = s.gamma(n);
        const double gp = std::pow(g, p);
        sum += g;
        sum_pow += gp;
        if (n >= horizon / 4 && n < horizon / 2) {
            incA_early += g;
            incB_early += gp;
        } else if (n >= horizon / 2) {
            incA_late += g;
            incB_late += gp;
        }
    }
    r.partial_sum = sum;
    r.partial_sum_pow = sum_pow;

    switch (s.kind()) {
        case Schedule::Kind::Power: {
            r.analytic = true;
            // sum n^(-a) diverges iff a <= 1
            r.divergence = s.alpha() <= 1.0 ? Verdict::Pass : Verdict::Fail;
            r.summability = s.alpha() * p > 1.0 ? Verdict::Pass : Verdict::Fail;
            r.detail = "p-series: alpha=" + std::to_string(s.alpha()) +
                       ", alpha*(1+q/2)=" + std::to_string(s.alpha() * p);
            break;
        }
        case Schedule::Kind::Constant: {
            r.analytic = true;
            r.divergence = Verdict::Pass;
            r.summability = Verdict::Fail;
            r.detail = "constant steps: both series diverge";
            break;
        }
        case Schedule::Kind::Custom: {
            r.analytic = false;
            r.divergence = detail::trend_verdict(incA_late, incA_early, true);
            r.summability = detail::trend_verdict(incB_late, incB_early, false);
            r.detail = "custom schedule: verdict from partial-sum trend at horizon";
            break;
        }
    }
    return r;
}

}  // namespace spgd
