#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spgd/noise.hpp"
#include "spgd/problem.hpp"
#include "spgd/region.hpp"
#include "spgd/schedule.hpp"

namespace spgd {

// One iteration of the update
//   x_{n+1} = prox_{g,X}^{gamma_n}( x_n - gamma_n v_n + gamma_n eta_{n+1} ),
// together with the combined drift w_n = (x_n - x_{n+1})/gamma_n + eta_{n+1},
// i.e. the sum v_n + v_n^g + v_n^X of the subgradient, regularizer and
// normal-cone contributions, recovered exactly from the update identity.
struct StepRecord {
    std::uint64_t n = 0;
    Vec x;        // x_n
    double gamma = 0.0;
    Vec v;        // selection from df(x_n)
    Vec eta;      // eta_{n+1}
    Vec x_half;   // x_n - gamma v + gamma eta
    Vec x_next;   // x_{n+1}
    Vec w;        // combined drift
    double tau = 0.0;  // sum of steps before n
    double fg = 0.0;   // (f+g)(x_n)
};

struct TrajectoryError {
    std::string message;
    std::uint64_t step = 0;
};

// Complete per-step record of a run, stored column-wise. When a thinning
// stride is set, only every stride-th record plus records whose x_n lies in
// one of the keep regions are retained (plus the first and last); x_half is
// not stored, it is recomputed exactly from x, v, eta.
class Trajectory {
public:
    std::size_t dim = 0;
    std::string problem_id, schedule_desc, noise_desc;
    std::uint64_t seed = 0;
    Vec x0;
    double bound = 0.0;
    bool bound_violated = false;
    std::uint64_t thinning_stride = 1;
    std::vector<Region> keep_regions;
    std::optional<TrajectoryError> error;
    std::uint64_t total_steps = 0;  // steps executed (>= size() when thinned)

    std::size_t size() const { return n_.size(); }
    bool empty() const { return n_.empty(); }
    bool contiguous() const { return thinning_stride <= 1; }

    std::uint64_t step_index(std::size_t i) const { return n_[i]; }
    double gamma(std::size_t i) const { return gamma_[i]; }
    double tau(std::size_t i) const { return tau_[i]; }
    double fg(std::size_t i) const { return fg_[i]; }
    // tau at the end of record i's step
    double tau_next(std::size_t i) const { return tau_[i] + gamma_[i]; }

    std::span<const double> x(std::size_t i) const { return col(x_, i); }
    std::span<const double> v(std::size_t i) const { return col(v_, i); }
    std::span<const double> eta(std::size_t i) const { return col(eta_, i); }
    std::span<const double> w(std::size_t i) const { return col(w_, i); }
    std::span<const double> x_next(std::size_t i) const { return col(xn_, i); }

    Vec x_vec(std::size_t i) const { return Vec(x(i).begin(), x(i).end()); }
    Vec x_next_vec(std::size_t i) const { return Vec(x_next(i).begin(), x_next(i).end()); }
    Vec final_x() const {
        if (empty()) return x0;
        return x_next_vec(size() - 1);
    }

    StepRecord record(std::size_t i) const {
        StepRecord r;
        r.n = n_[i];
        r.x = x_vec(i);
        r.gamma = gamma_[i];
        r.v = Vec(v(i).begin(), v(i).end());
        r.eta = Vec(eta(i).begin(), eta(i).end());
        r.x_next = x_next_vec(i);
        r.w = Vec(w(i).begin(), w(i).end());
        r.tau = tau_[i];
        r.fg = fg_[i];
        r.x_half = axpy(axpy(r.x, -r.gamma, r.v), r.gamma, r.eta);
        return r;
    }

    void reserve(std::size_t n) {
        n_.reserve(n);
        gamma_.reserve(n);
        tau_.reserve(n);
        fg_.reserve(n);
        for (auto* c : {&x_, &v_, &eta_, &w_, &xn_}) c->reserve(n * dim);
    }

    void push_back(const StepRecord& r) {
        n_.push_back(r.n);
        gamma_.push_back(r.gamma);
        tau_.push_back(r.tau);
        fg_.push_back(r.fg);
        append(x_, r.x);
        append(v_, r.v);
        append(eta_, r.eta);
        append(w_, r.w);
        append(xn_, r.x_next);
    }

private:
    std::span<const double> col(const std::vector<double>& c, std::size_t i) const {
        return {c.data() + i * dim, dim};
    }
    static void append(std::vector<double>& c, const Vec& v) {
        c.insert(c.end(), v.begin(), v.end());
    }

    std::vector<std::uint64_t> n_;
    std::vector<double> gamma_, tau_, fg_;
    std::vector<double> x_, v_, eta_, w_, xn_;
};

namespace detail {

inline StepRecord make_step(const ProblemSpec& p, Vec x, double gamma, Vec eta,
                            std::uint64_t n, double tau) {
    StepRecord r;
    r.n = n;
    r.gamma = gamma;
    r.tau = tau;
    r.fg = eval_objective(p, x);
    r.v = p.f.subgrad(x);
    r.x_half = axpy(axpy(x, -gamma, r.v), gamma, eta);
    r.x_next = prox_map(p, gamma, r.x_half);
    // w = (x - x_next)/gamma + eta; by construction the update identity
    // x_next = x - gamma*w + gamma*eta holds to rounding.
    r.w = axpy(scale(1.0 / gamma, sub(x, r.x_next)), 1.0, eta);
    r.x = std::move(x);
    r.eta = std::move(eta);
    if (!std::isfinite(r.fg) || !all_finite(r.v) || !all_finite(r.x_half) ||
        !all_finite(r.x_next) || !all_finite(r.w))
        throw NumericalError("non-finite value in step", n);
    return r;
}

}  // namespace detail

inline StepRecord spgd_step(const ProblemSpec& p, const Vec& x, double gamma,
                            const Vec& eta, std::uint64_t n = 0, double tau = 0.0) {
    if (!(gamma > 0.0)) throw InputError("spgd_step: gamma must be > 0");
    require_dim(x, p.dim, "spgd_step");
    require_dim(eta, p.dim, "spgd_step(eta)");
    if (!p.constraint.contains(x, 1e-10))
        throw InputError("spgd_step: x is not in the constraint set");
    return detail::make_step(p, x, gamma, eta, n, tau);
}

// ||x_{n+1} - x_n|| <= gamma_n L_g + ||x_n - x_{n+1/2}||, the one-step bound
// implied by prox optimality when L_g bounds g's local Lipschitz constant.
inline bool step_bound_check(const StepRecord& rec, double L_g) {
    if (!(L_g >= 0.0)) throw InputError("step_bound_check: L_g must be >= 0");
    return dist(rec.x_next, rec.x) <=
           rec.gamma * L_g + dist(rec.x, rec.x_half) + 1e-9;
}

struct RunOptions {
    double bound = 1e6;
    bool validate_schedule = true;
    bool override_validation = false;
    std::uint64_t thinning_stride = 1;
    std::vector<Region> keep_regions;
};

inline Trajectory run_spgd(const ProblemSpec& p, const Schedule& s,
                           const NoiseModel& m, std::uint64_t seed, const Vec& x0,
                           std::uint64_t n_iters, const RunOptions& opts = {}) {
    if (n_iters < 1) throw InputError("run_spgd: n_iters must be >= 1");
    require_dim(x0, p.dim, "run_spgd(x0)");
    if (!p.constraint.contains(x0, 1e-10))
        throw InputError("run_spgd: x0 is not in the constraint set");
    if (opts.validate_schedule && !opts.override_validation) {
        auto val = validate_schedule(s, m.q());
        if (!val.ok())
            throw ConfigError(
                "schedule fails the step-size assumptions (divergence " +
                verdict_name(val.divergence) + ", summability " +
                verdict_name(val.summability) +
                "); pass override to run anyway");
    }

    Trajectory traj;
    traj.dim = p.dim;
    traj.problem_id = p.id;
    traj.schedule_desc = s.describe();
    traj.noise_desc = m.describe();
    traj.seed = seed;
    traj.x0 = x0;
    traj.bound = opts.bound;
    traj.thinning_stride = std::max<std::uint64_t>(opts.thinning_stride, 1);
    traj.keep_regions = opts.keep_regions;
    if (traj.thinning_stride == 1) traj.reserve(static_cast<std::size_t>(n_iters));

    CounterRng rng(seed);
    Vec x = x0;
    double tau_acc = 0.0;

    auto keep = [&](std::uint64_t n, const Vec& xn) {
        if (traj.thinning_stride <= 1) return true;
        if (n == 0 || n + 1 == n_iters) return true;
        if (n % traj.thinning_stride == 0) return true;
        for (const auto& g : traj.keep_regions)
            if (g.contains(xn)) return true;
        return false;
    };

    for (std::uint64_t n = 0; n < n_iters; ++n) {
        const double gamma = s.gamma(n);
        if (!(gamma > 0.0)) {
            traj.error = TrajectoryError{"zero step size", n};
            break;
        }
        Vec eta = m.sample(rng, n, p.dim);
        StepRecord rec;
        try {
            rec = detail::make_step(p, std::move(x), gamma, std::move(eta), n, tau_acc);
        } catch (const NumericalError& e) {
            traj.error = TrajectoryError{e.what(), e.step_index};
            break;
        }
        x = rec.x_next;
        tau_acc += gamma;
        traj.total_steps = n + 1;
        if (keep(n, rec.x)) traj.push_back(rec);
        if (norm_safe(x) > opts.bound) {
            traj.bound_violated = true;
            break;
        }
    }
    return traj;
}

// --- run-level invariants (used by tests and the acceptance suite) ----------

// max over records of || x_next - x + gamma*w - gamma*eta ||
inline double max_update_identity_residual(const Trajectory& t) {
    double worst = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        auto x = t.x(i);
        auto xn = t.x_next(i);
        auto w = t.w(i);
        auto e = t.eta(i);
        double g = t.gamma(i);
        double s = 0.0;
        for (std::size_t k = 0; k < t.dim; ++k) {
            double r = xn[k] - x[k] + g * w[k] - g * e[k];
            s += r * r;
        }
        worst = std::max(worst, std::sqrt(s));
    }
    return worst;
}

// worst violation of the prox optimality comparison against the previous
// iterate: g(x_next) + ||x_next-x_half||^2/(2 gamma) vs the same at z = x
inline double max_prox_decrease_violation(const Trajectory& t, const ProblemSpec& p) {
    double worst = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        StepRecord r = t.record(i);
        double lhs = p.g.value(r.x_next) + sqnorm(sub(r.x_next, r.x_half)) / (2.0 * r.gamma);
        double rhs = p.g.value(r.x) + sqnorm(sub(r.x, r.x_half)) / (2.0 * r.gamma);
        worst = std::max(worst, lhs - rhs);
    }
    return worst;
}

inline bool all_steps_bound_checked(const Trajectory& t, double L_g) {
    for (std::size_t i = 0; i < t.size(); ++i)
        if (!step_bound_check(t.record(i), L_g)) return false;
    return true;
}

}  // namespace spgd
