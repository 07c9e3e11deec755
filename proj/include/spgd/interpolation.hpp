#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "spgd/engine.hpp"
#include "spgd/problem.hpp"

namespace spgd {

// Piecewise-linear interpolation of a trajectory on the tau time axis:
// X(tau_n) = x_n and X is linear on [tau_n, tau_{n+1}].
class InterpolatedProcess {
public:
    explicit InterpolatedProcess(const Trajectory& traj) : traj_(&traj) {
        if (traj.empty()) throw InputError("InterpolatedProcess: empty trajectory");
        if (!traj.contiguous())
            throw DataCompletenessError(
                "InterpolatedProcess: trajectory was thinned; interpolation "
                "needs every record");
    }

    double t_begin() const { return traj_->tau(0); }
    double t_end() const { return traj_->tau_next(traj_->size() - 1); }

    // Breakpoints tau_0, ..., tau_N (N = number of steps).
    std::vector<double> breakpoints() const {
        std::vector<double> ts;
        ts.reserve(traj_->size() + 1);
        for (std::size_t i = 0; i < traj_->size(); ++i) ts.push_back(traj_->tau(i));
        ts.push_back(t_end());
        return ts;
    }

    Vec operator()(double t) const {
        if (!(t >= t_begin() - 1e-12 && t <= t_end() + 1e-12))
            throw RangeError("interpolate: t=" + std::to_string(t) +
                             " outside [" + std::to_string(t_begin()) + ", " +
                             std::to_string(t_end()) + "]");
        t = std::clamp(t, t_begin(), t_end());
        // locate the segment [tau_i, tau_i + gamma_i)
        std::size_t lo = 0, hi = traj_->size();
        while (lo + 1 < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (traj_->tau(mid) <= t)
                lo = mid;
            else
                hi = mid;
        }
        const double t0 = traj_->tau(lo);
        const double g = traj_->gamma(lo);
        const double s = g > 0.0 ? std::clamp((t - t0) / g, 0.0, 1.0) : 0.0;
        auto a = traj_->x(lo);
        auto b = traj_->x_next(lo);
        Vec r(traj_->dim);
        for (std::size_t k = 0; k < traj_->dim; ++k) r[k] = a[k] + s * (b[k] - a[k]);
        return r;
    }

private:
    const Trajectory* traj_;
};

inline Vec interpolate(const InterpolatedProcess& ip, double t) { return ip(t); }

// Numerical (or exact) solution of the descent flow
//   xdot(t) in -df(x) - dg(x) - N_X(x),
// realized as a projected explicit Euler scheme on a minimal-norm selection,
// or sampled from the problem's closed-form flow when one is wired.
struct FlowSolution {
    std::vector<double> times;       // increasing, times.front() == 0
    std::vector<Vec> points;
    double h = 0.0;
    std::string method;              // "exact" or "euler"
    std::string selection = "minimal-norm";

    double t_end() const { return times.empty() ? 0.0 : times.back(); }

    Vec operator()(double t) const {
        if (times.empty()) throw RangeError("FlowSolution: empty");
        if (!(t >= times.front() - 1e-12 && t <= times.back() + 1e-12))
            throw RangeError("FlowSolution: t outside covered range");
        t = std::clamp(t, times.front(), times.back());
        auto it = std::upper_bound(times.begin(), times.end(), t);
        std::size_t i = it == times.begin() ? 0 : (it - times.begin()) - 1;
        if (i + 1 >= times.size()) return points.back();
        double dt = times[i + 1] - times[i];
        double s = dt > 0.0 ? (t - times[i]) / dt : 0.0;
        Vec r(points[i].size());
        for (std::size_t k = 0; k < r.size(); ++k)
            r[k] = points[i][k] + s * (points[i + 1][k] - points[i][k]);
        return r;
    }
};

enum class FlowMethod { Auto, Euler, Exact };

inline FlowSolution integrate_flow(const ProblemSpec& p, const Vec& x0, double T,
                                   double h, FlowMethod method = FlowMethod::Auto) {
    require_dim(x0, p.dim, "integrate_flow(x0)");
    if (!(h > 0.0 && h <= T)) throw InputError("integrate_flow: need 0 < h <= T");
    if (!p.constraint.contains(x0, 1e-10))
        throw InputError("integrate_flow: x0 not in the constraint set");

    const bool exact = method == FlowMethod::Exact ||
                       (method == FlowMethod::Auto && static_cast<bool>(p.exact_flow));
    if (exact && !p.exact_flow)
        throw InputError("integrate_flow: no closed-form flow for this problem");

    FlowSolution sol;
    sol.h = h;
    sol.method = exact ? "exact" : "euler";

    auto selection = [&](const Vec& y) {
        if (p.combined_subgrad_selection) return p.combined_subgrad_selection(y);
        Vec s = p.f.subgrad(y);
        if (p.g.subgrad_selection) s = add(s, p.g.subgrad_selection(y));
        return s;
    };

    Vec y = x0;
    double t = 0.0;
    sol.times.push_back(0.0);
    sol.points.push_back(y);
    std::uint64_t k = 0;
    while (t < T - 1e-15) {
        double step = std::min(h, T - t);
        if (exact) {
            y = p.exact_flow(x0, t + step);
        } else {
            y = p.constraint.project(axpy(y, -step, selection(y)));
        }
        if (!all_finite(y)) throw NumericalError("integrate_flow: non-finite state", k);
        t += step;
        sol.times.push_back(t);
        sol.points.push_back(y);
        ++k;
    }
    return sol;
}

// sup_{h in [0, T]} || X(t0 + h) - flow(h) ||, evaluated on the union of the
// two breakpoint grids; exact for piecewise-linear inputs since the norm of a
// linear segment attains its max at an endpoint.
inline double shifted_sup_distance(const InterpolatedProcess& ip, double t0,
                                   const FlowSolution& flow, double T) {
    if (!(T > 0.0)) throw InputError("shifted_sup_distance: T must be > 0");
    if (t0 < ip.t_begin() - 1e-12 || t0 + T > ip.t_end() + 1e-12)
        throw RangeError("shifted_sup_distance: [t0, t0+T] outside the process domain");
    if (flow.t_end() < T - 1e-12)
        throw RangeError("shifted_sup_distance: flow does not cover [0, T]");

    std::vector<double> grid;
    for (double t : ip.breakpoints())
        if (t >= t0 && t <= t0 + T) grid.push_back(t - t0);
    for (double t : flow.times)
        if (t <= T) grid.push_back(t);
    grid.push_back(0.0);
    grid.push_back(T);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    double sup = 0.0;
    for (double hh : grid) sup = std::max(sup, dist(ip(t0 + hh), flow(hh)));
    return sup;
}

// Check of the descent-flow energy identity: along a flow solution,
// (f+g)(x(t)) - (f+g)(x(0)) should equal minus the integrated squared speed.
struct LyapunovCheck {
    double max_discrepancy = 0.0;  // worst |(f+g)(x_k) - predicted_k|
    double fg_drop = 0.0;          // (f+g)(x_end) - (f+g)(x_0)
    double dissipation = 0.0;      // sum h ||dx/h||^2
};

inline LyapunovCheck lyapunov_decrease_check(const FlowSolution& flow,
                                             const ProblemSpec& p) {
    if (flow.points.empty()) throw InputError("lyapunov_decrease_check: empty flow");
    LyapunovCheck r;
    const double fg0 = eval_objective(p, flow.points.front());
    double acc = 0.0;
    for (std::size_t k = 0; k < flow.points.size(); ++k) {
        if (k > 0) {
            double dt = flow.times[k] - flow.times[k - 1];
            if (dt > 0.0) acc += sqnorm(sub(flow.points[k], flow.points[k - 1])) / dt;
        }
        double predicted = fg0 - acc;
        double actual = eval_objective(p, flow.points[k]);
        r.max_discrepancy = std::max(r.max_discrepancy, std::abs(actual - predicted));
        if (k + 1 == flow.points.size()) r.fg_drop = actual - fg0;
    }
    r.dissipation = acc;
    return r;
}

}  // namespace spgd
