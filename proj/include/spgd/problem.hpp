#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spgd/constraint.hpp"
#include "spgd/rng.hpp"
#include "spgd/vec.hpp"

namespace spgd {

// Value oracle plus one deterministic Clarke-subgradient selection.
// At differentiability points the selection equals the gradient; at kinks the
// built-ins return the minimal-norm element of the subdifferential.
struct FunctionOracle {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> subgrad;
};

// Regularizer with an optional exact prox. When `prox` is empty, prox_map
// falls back to a multistart pattern search over the constraint set.
// subgrad_selection is a minimal-norm selection from the regularizer's own
// subdifferential (used by the flow integrator and residuals).
struct Regularizer {
    std::function<double(const Vec&)> value;
    std::function<Vec(double, const Vec&)> prox;  // (gamma, y) -> point, may be empty
    std::function<Vec(const Vec&)> subgrad_selection;  // may be empty (treated as 0)
};

// Analytic description of the critical set Z = {x : 0 in df + dg + N_X},
// available for the built-in problems.
struct CriticalSetDescriptor {
    std::string text;
    std::vector<Vec> samples;                    // representative points of Z
    std::function<double(const Vec&)> distance;  // distance to Z (may be empty)
};

struct ProblemSpec {
    std::size_t dim = 0;
    FunctionOracle f;
    Regularizer g;
    ConstraintSet constraint;
    std::optional<double> lipschitz_g;  // local bound L_g on the play region
    std::optional<CriticalSetDescriptor> critical_set;
    std::string id = "custom";

    // Minimal-norm selection from d(f+g)(x); optional, wired analytically for
    // built-ins. The flow integrator prefers it over subgrad_f + subgrad_g.
    std::function<Vec(const Vec&)> combined_subgrad_selection;

    // Exact solution of the subgradient flow started at x over time t, for
    // built-ins where a closed form exists.
    std::function<Vec(const Vec&, double)> exact_flow;
};

inline double eval_objective(const ProblemSpec& p, const Vec& x) {
    require_dim(x, p.dim, "eval_objective");
    return p.f.value(x) + p.g.value(x);
}

inline Vec clarke_subgrad_selection(const ProblemSpec& p, const Vec& x) {
    require_dim(x, p.dim, "clarke_subgrad_selection");
    return p.f.subgrad(x);
}

struct ProxResult {
    Vec point;
    // Set when the numeric fallback could not improve on projection(y).
    bool fell_back_to_projection = false;
};

namespace detail {

inline double prox_objective(const ProblemSpec& p, double gamma, const Vec& y,
                             const Vec& z) {
    return p.g.value(z) + sqnorm(sub(z, y)) / (2.0 * gamma);
}

// Multistart pattern search for regularizers without a closed-form prox:
// start from projection(y) plus 8 deterministic perturbed starts, move
// coordinate-wise with a shrinking step, projecting candidates onto X.
inline ProxResult numeric_prox(const ProblemSpec& p, double gamma, const Vec& y) {
    const std::size_t d = p.dim;
    const Vec base = p.constraint.project(y);
    const double base_val = prox_objective(p, gamma, y, base);

    CounterRng rng(0x5eedull);  // fixed: the prox must be deterministic
    std::vector<Vec> starts{base};
    const double spread = 0.5 * std::sqrt(gamma) * (1.0 + norm(y));
    for (std::uint64_t k = 0; k < 8; ++k) {
        Vec s(d);
        for (std::size_t i = 0; i < d; ++i)
            s[i] = base[i] + spread * rng.uniform(k, i, -1.0, 1.0);
        starts.push_back(p.constraint.project(s));
    }

    Vec best = base;
    double best_val = base_val;
    for (const Vec& s0 : starts) {
        Vec z = s0;
        double fz = prox_objective(p, gamma, y, z);
        double h = std::max(spread, 1e-3);
        while (h > 1e-10) {
            bool improved = false;
            for (std::size_t i = 0; i < d; ++i) {
                for (double sgn : {+1.0, -1.0}) {
                    Vec cand = z;
                    cand[i] += sgn * h;
                    cand = p.constraint.project(cand);
                    double fc = prox_objective(p, gamma, y, cand);
                    if (fc < fz - 1e-15 * (1.0 + std::abs(fz))) {
                        z = std::move(cand);
                        fz = fc;
                        improved = true;
                    }
                }
            }
            if (!improved) h *= 0.5;
        }
        if (fz < best_val) {
            best_val = fz;
            best = z;
        }
    }

    ProxResult r;
    r.fell_back_to_projection = !(best_val < base_val - 1e-15 * (1.0 + std::abs(base_val)));
    r.point = r.fell_back_to_projection ? base : best;
    return r;
}

}  // namespace detail

inline ProxResult prox_map_checked(const ProblemSpec& p, double gamma, const Vec& y) {
    if (!(gamma > 0.0)) throw InputError("prox_map: gamma must be > 0");
    require_dim(y, p.dim, "prox_map");
    if (p.g.prox) return ProxResult{p.g.prox(gamma, y), false};
    return detail::numeric_prox(p, gamma, y);
}

inline Vec prox_map(const ProblemSpec& p, double gamma, const Vec& y) {
    return prox_map_checked(p, gamma, y).point;
}

// Prox-gradient stationarity residual ||x - prox(gamma, x - gamma*df(x))|| / gamma.
// Zero exactly at points of Z for convex problems; a standard surrogate for
// the minimal-norm element of d(f+g)(x) + N_X(x).
inline double stationarity_residual(const ProblemSpec& p, const Vec& x,
                                    double gamma = 1e-3) {
    Vec v = clarke_subgrad_selection(p, x);
    Vec step = prox_map(p, gamma, axpy(x, -gamma, v));
    return dist(x, step) / gamma;
}

}  // namespace spgd
