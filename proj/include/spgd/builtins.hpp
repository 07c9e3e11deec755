#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "spgd/problem.hpp"

namespace spgd {

// Parameters for the built-in problem catalogue.
struct BuiltinParams {
    std::map<std::string, double> scalars;
    std::map<std::string, Vec> vectors;
    std::map<std::string, Matrix> matrices;

    double scalar_or(const std::string& k, double fallback) const {
        auto it = scalars.find(k);
        return it == scalars.end() ? fallback : it->second;
    }
};

namespace detail {

inline Vec soft_threshold(const Vec& y, double t) {
    Vec r(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        r[i] = std::copysign(std::max(std::abs(y[i]) - t, 0.0), y[i]);
    return r;
}

inline ProblemSpec make_abs1d() {
    ProblemSpec p;
    p.dim = 1;
    p.id = "abs1d";
    p.f.value = [](const Vec& x) { return std::abs(x[0]); };
    p.f.subgrad = [](const Vec& x) {
        return Vec{x[0] > 0.0 ? 1.0 : (x[0] < 0.0 ? -1.0 : 0.0)};
    };
    p.g.value = [](const Vec&) { return 0.0; };
    p.g.prox = [](double, const Vec& y) { return y; };
    p.constraint = ConstraintSet::whole_space(1);
    p.lipschitz_g = 0.0;
    p.combined_subgrad_selection = p.f.subgrad;
    p.exact_flow = [](const Vec& x, double t) {
        double a = std::abs(x[0]);
        return Vec{std::copysign(std::max(a - t, 0.0), x[0])};
    };
    p.critical_set = CriticalSetDescriptor{
        "the origin {0}", {Vec{0.0}},
        [](const Vec& x) { return std::abs(x[0]); }};
    return p;
}

inline ProblemSpec make_norm_nd(std::size_t d) {
    ProblemSpec p;
    p.dim = d;
    p.id = "norm_nd";
    p.f.value = [](const Vec& x) { return norm(x); };
    p.f.subgrad = [](const Vec& x) {
        double n = norm(x);
        if (n < 1e-300) return zeros(x.size());
        return scale(1.0 / n, x);
    };
    p.g.value = [](const Vec&) { return 0.0; };
    p.g.prox = [](double, const Vec& y) { return y; };
    p.constraint = ConstraintSet::whole_space(d);
    p.lipschitz_g = 0.0;
    p.combined_subgrad_selection = p.f.subgrad;
    p.exact_flow = [](const Vec& x, double t) {
        double n = norm(x);
        if (n <= t || n < 1e-300) return zeros(x.size());
        return scale((n - t) / n, x);
    };
    p.critical_set = CriticalSetDescriptor{
        "the origin {0}", {zeros(d)}, [](const Vec& x) { return norm(x); }};
    return p;
}

inline ProblemSpec make_lasso(Matrix A, Vec b, double lambda) {
    const std::size_t d = A.cols;
    if (b.size() != A.rows) throw ConfigError("lasso: A rows must match b");
    if (!(lambda >= 0.0)) throw ConfigError("lasso: lambda must be >= 0");

    ProblemSpec p;
    p.dim = d;
    p.id = "lasso";
    p.f.value = [A, b](const Vec& x) { return 0.5 * sqnorm(sub(matvec(A, x), b)); };
    p.f.subgrad = [A, b](const Vec& x) { return matvec_t(A, sub(matvec(A, x), b)); };
    p.g.value = [lambda](const Vec& x) {
        double s = 0.0;
        for (double xi : x) s += std::abs(xi);
        return lambda * s;
    };
    p.g.prox = [lambda](double gamma, const Vec& y) {
        return soft_threshold(y, gamma * lambda);
    };
    p.g.subgrad_selection = [lambda](const Vec& x) {
        Vec s(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            s[i] = x[i] > 0.0 ? lambda : (x[i] < 0.0 ? -lambda : 0.0);
        return s;
    };
    p.constraint = ConstraintSet::whole_space(d);
    p.lipschitz_g = lambda * std::sqrt(static_cast<double>(d));

    // minimal-norm element of df(x) + dg(x), coordinate-wise
    auto grad_f = p.f.subgrad;
    p.combined_subgrad_selection = [grad_f, lambda](const Vec& x) {
        Vec gf = grad_f(x);
        Vec r(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] != 0.0)
                r[i] = gf[i] + std::copysign(lambda, x[i]);
            else
                r[i] = std::copysign(std::max(std::abs(gf[i]) - lambda, 0.0), gf[i]);
        }
        return r;
    };

    if (A.is_diagonal()) {
        // closed-form minimizer: x_i = S(a_i b_i, lambda) / a_i^2
        Vec star(d, 0.0);
        bool determined = true;
        for (std::size_t i = 0; i < d; ++i) {
            double a = A(i, i);
            if (a == 0.0) {
                if (lambda == 0.0) determined = false;  // free coordinate
                star[i] = 0.0;
            } else {
                double z = a * b[i];
                star[i] = std::copysign(std::max(std::abs(z) - lambda, 0.0), z) / (a * a);
            }
        }
        if (determined) {
            p.critical_set = CriticalSetDescriptor{
                "the soft-thresholded least-squares solution", {star},
                [star](const Vec& x) { return dist(x, star); }};
        }
        if (lambda == 0.0) {
            // per-coordinate linear flow x_i(t) = x*_i + exp(-a_i^2 t)(x_i - x*_i)
            p.exact_flow = [A, star](const Vec& x, double t) {
                Vec r(x.size());
                for (std::size_t i = 0; i < x.size(); ++i) {
                    double a = A(i, i);
                    r[i] = star[i] + std::exp(-a * a * t) * (x[i] - star[i]);
                }
                return r;
            };
        }
    }
    return p;
}

inline ProblemSpec make_box_linear(Vec cost, Vec lower, Vec upper) {
    const std::size_t d = cost.size();
    if (lower.size() != d || upper.size() != d)
        throw ConfigError("box_linear: c, lower, upper must share a dimension");

    ProblemSpec p;
    p.dim = d;
    p.id = "box_linear";
    p.f.value = [cost](const Vec& x) { return dot(cost, x); };
    p.f.subgrad = [cost](const Vec&) { return cost; };
    p.g.value = [](const Vec&) { return 0.0; };
    p.constraint = ConstraintSet::box(lower, upper);
    auto cs = p.constraint;
    p.g.prox = [cs](double, const Vec& y) { return cs.project(y); };
    p.lipschitz_g = 0.0;
    p.combined_subgrad_selection = p.f.subgrad;

    Vec star(d);
    for (std::size_t i = 0; i < d; ++i)
        star[i] = cost[i] > 0.0 ? lower[i]
                : cost[i] < 0.0 ? upper[i]
                                : 0.5 * (lower[i] + upper[i]);
    p.critical_set = CriticalSetDescriptor{
        "the face of the box minimizing <c, x>", {star},
        [cost, lower, upper](const Vec& x) {
            // distance to the minimizing face
            double s = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                double di = cost[i] > 0.0 ? x[i] - lower[i]
                          : cost[i] < 0.0 ? upper[i] - x[i]
                                          : 0.0;
                s += di * di;
            }
            return std::sqrt(s);
        }};
    return p;
}

// Designed demonstration fixture: a planar problem whose critical set is
// exactly the unit circle (plus an isolated repelling critical point at the
// origin). In polar coordinates
//
//     f(r, theta) = (r-1)^2 * (1 + eps * chi(r) * sin(theta)),
//
// with chi a smoothstep that switches the angular modulation off near the
// origin (so f stays continuous there). The gradient vanishes identically on
// r = 1; the angular term makes descent iterates drift slowly along the
// circle instead of converging radially to a fixed angle. Requires
// eps in [0, 0.4) so no spurious critical points appear in the cutoff band.
inline ProblemSpec make_circle_oscillator(double eps) {
    if (!(eps >= 0.0 && eps < 0.4))
        throw ConfigError("circle_oscillator: eps must lie in [0, 0.4)");

    auto chi = [](double r) {
        double t = std::clamp((r - 0.4) / 0.3, 0.0, 1.0);
        return t * t * (3.0 - 2.0 * t);
    };
    auto dchi = [](double r) {
        double t = (r - 0.4) / 0.3;
        if (t <= 0.0 || t >= 1.0) return 0.0;
        return (6.0 * t - 6.0 * t * t) / 0.3;
    };

    ProblemSpec p;
    p.dim = 2;
    p.id = "circle_oscillator";
    p.f.value = [chi, eps](const Vec& x) {
        double r = std::hypot(x[0], x[1]);
        double d = r - 1.0;
        if (r < 1e-300) return d * d;  // chi(0) = 0
        double theta = std::atan2(x[1], x[0]);
        return d * d * (1.0 + eps * chi(r) * std::sin(theta));
    };
    p.f.subgrad = [chi, dchi, eps](const Vec& x) {
        double r = std::hypot(x[0], x[1]);
        if (r < 1e-12) return zeros(2);  // minimal-norm element at the origin
        double d = r - 1.0;
        double theta = std::atan2(x[1], x[0]);
        double s = std::sin(theta), c = std::cos(theta);
        double fr = 2.0 * d * (1.0 + eps * chi(r) * s) + d * d * eps * dchi(r) * s;
        double ftheta = d * d * eps * chi(r) * c;
        // grad = fr * e_r + (ftheta / r) * e_theta
        double ex = x[0] / r, ey = x[1] / r;
        return Vec{fr * ex - (ftheta / r) * ey, fr * ey + (ftheta / r) * ex};
    };
    p.g.value = [](const Vec&) { return 0.0; };
    p.g.prox = [](double, const Vec& y) { return y; };
    p.constraint = ConstraintSet::whole_space(2);
    p.lipschitz_g = 0.0;
    p.combined_subgrad_selection = p.f.subgrad;

    std::vector<Vec> samples;
    for (int k = 0; k < 8; ++k) {
        double a = 2.0 * std::numbers::pi * k / 8.0;
        samples.push_back(Vec{std::cos(a), std::sin(a)});
    }
    p.critical_set = CriticalSetDescriptor{
        "the unit circle {|x| = 1}; the origin is an isolated Clarke-critical "
        "local max (repelling)",
        samples, [](const Vec& x) { return std::abs(std::hypot(x[0], x[1]) - 1.0); }};
    return p;
}

}  // namespace detail

inline std::vector<std::string> builtin_problem_names() {
    return {"abs1d", "norm_nd", "lasso", "box_linear", "circle_oscillator"};
}

inline ProblemSpec builtin_problem(const std::string& name,
                                   const BuiltinParams& params = {}) {
    if (name == "abs1d") return detail::make_abs1d();
    if (name == "norm_nd") {
        auto d = static_cast<std::size_t>(params.scalar_or("dim", 2.0));
        if (d < 1) throw ConfigError("norm_nd: dim must be >= 1");
        return detail::make_norm_nd(d);
    }
    if (name == "lasso") {
        Matrix A;
        Vec b;
        if (auto it = params.matrices.find("A"); it != params.matrices.end()) A = it->second;
        if (auto it = params.vectors.find("b"); it != params.vectors.end()) b = it->second;
        if (A.rows == 0 && b.empty()) {
            auto d = static_cast<std::size_t>(params.scalar_or("dim", 2.0));
            A = Matrix::identity(d);
            b = zeros(d);
        } else if (A.rows == 0) {
            A = Matrix::identity(b.size());
        } else if (b.empty()) {
            b = zeros(A.rows);
        }
        return detail::make_lasso(A, b, params.scalar_or("lambda", 1.0));
    }
    if (name == "box_linear") {
        auto d = static_cast<std::size_t>(params.scalar_or("dim", 2.0));
        Vec c(d, 1.0), lo(d, 0.0), hi(d, 1.0);
        if (auto it = params.vectors.find("c"); it != params.vectors.end()) c = it->second;
        if (auto it = params.vectors.find("lower"); it != params.vectors.end()) lo = it->second;
        if (auto it = params.vectors.find("upper"); it != params.vectors.end()) hi = it->second;
        return detail::make_box_linear(c, lo, hi);
    }
    if (name == "circle_oscillator")
        return detail::make_circle_oscillator(params.scalar_or("eps", 0.1));

    std::string valid;
    for (const auto& n : builtin_problem_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw ConfigError("unknown problem '" + name + "'; valid names: " + valid);
}

}  // namespace spgd
