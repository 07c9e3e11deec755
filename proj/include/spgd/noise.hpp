#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>

#include "spgd/rng.hpp"
#include "spgd/vec.hpp"

namespace spgd {

// Martingale-difference noise generator. sample(rng, n, dim) draws
// eta_{n+1}, a pure function of (rng.seed, n), conditionally mean zero.
// q is the moment order the model guarantees finite (bounded and zero noise
// have all moments; a gaussian too, the field just records what the runner
// assumed).
class NoiseModel {
public:
    enum class Kind { Zero, Gaussian, BoundedUniform, Custom };

    using Sampler = std::function<Vec(const CounterRng&, std::uint64_t, std::size_t)>;

    static NoiseModel zero() { return NoiseModel(Kind::Zero, 0.0, 2.0); }

    static NoiseModel gaussian(double sigma, double q = 2.0) {
        if (!(sigma >= 0.0)) throw InputError("gaussian noise: sigma must be >= 0");
        return NoiseModel(Kind::Gaussian, sigma, q);
    }

    static NoiseModel bounded_uniform(double a, double q = 2.0) {
        if (!(a >= 0.0)) throw InputError("bounded_uniform noise: a must be >= 0");
        return NoiseModel(Kind::BoundedUniform, a, q);
    }

    static NoiseModel custom(Sampler s, double q, std::string description = "custom") {
        NoiseModel m(Kind::Custom, 0.0, q);
        m.sampler_ = std::move(s);
        m.custom_desc_ = std::move(description);
        return m;
    }

    Kind kind() const { return kind_; }
    double parameter() const { return param_; }
    double q() const { return q_; }
    bool is_zero() const {
        return kind_ == Kind::Zero || (kind_ != Kind::Custom && param_ == 0.0);
    }

    // Per-component standard deviation, used by the empirical validator.
    double component_stddev() const {
        switch (kind_) {
            case Kind::Zero: return 0.0;
            case Kind::Gaussian: return param_;
            case Kind::BoundedUniform: return param_ / std::sqrt(3.0);
            case Kind::Custom: return -1.0;  // unknown
        }
        return -1.0;
    }

    Vec sample(const CounterRng& rng, std::uint64_t n, std::size_t dim) const {
        switch (kind_) {
            case Kind::Zero:
                return zeros(dim);
            case Kind::Gaussian: {
                if (param_ == 0.0) return zeros(dim);
                Vec e(dim);
                for (std::size_t i = 0; i < dim; ++i)
                    e[i] = param_ * rng.gaussian(n, i);
                return e;
            }
            case Kind::BoundedUniform: {
                if (param_ == 0.0) return zeros(dim);
                Vec e(dim);
                for (std::size_t i = 0; i < dim; ++i)
                    e[i] = rng.uniform(n, i, -param_, param_);
                return e;
            }
            case Kind::Custom:
            default:
                return sampler_(rng, n, dim);
        }
    }

    std::string describe() const {
        switch (kind_) {
            case Kind::Zero: return "zero";
            case Kind::Gaussian: return "gaussian(sigma=" + std::to_string(param_) + ")";
            case Kind::BoundedUniform: return "bounded_uniform(a=" + std::to_string(param_) + ")";
            case Kind::Custom: default: return custom_desc_;
        }
    }

private:
    NoiseModel(Kind k, double p, double q) : kind_(k), param_(p), q_(q) {
        if (!(q >= 2.0)) throw InputError("noise model: q must be >= 2");
    }

    Kind kind_;
    double param_;
    double q_;
    Sampler sampler_;
    std::string custom_desc_;
};

inline Vec sample_noise(const NoiseModel& m, const CounterRng& rng,
                        std::uint64_t n, std::size_t dim) {
    if (dim == 0) throw InputError("sample_noise: dim must be >= 1");
    return m.sample(rng, n, dim);
}

// Empirical check of the martingale-difference and moment assumptions:
// at a fixed n, the mean over n_samples independent seeds must be near zero
// and the q-th moment must be stable across the probed n's.
struct NoiseValidation {
    bool mean_ok = false;
    bool moment_ok = false;
    double worst_mean_norm = 0.0;
    double mean_tolerance = 0.0;
    double max_qth_moment = 0.0;
    std::string detail;

    bool ok() const { return mean_ok && moment_ok; }
};

inline NoiseValidation validate_noise(const NoiseModel& m, std::size_t dim,
                                      std::uint64_t base_seed = 987654321ull,
                                      std::size_t n_samples = 100'000) {
    NoiseValidation r;
    const std::uint64_t probes[] = {0, 1, 1000, 1'000'000};
    double sigma = m.component_stddev();
    if (sigma < 0.0) sigma = 1.0;  // custom: assume unit scale
    r.mean_tolerance = 5.0 * std::max(sigma, 1e-12) * std::sqrt(static_cast<double>(dim)) /
                       std::sqrt(static_cast<double>(n_samples));

    double worst = 0.0, max_moment = 0.0, min_moment = 0.0;
    bool first = true;
    for (std::uint64_t n : probes) {
        Vec mean = zeros(dim);
        double qmom = 0.0;
        for (std::size_t s = 0; s < n_samples; ++s) {
            CounterRng rng(base_seed + s);
            Vec e = m.sample(rng, n, dim);
            mean = add(mean, e);
            qmom += std::pow(norm(e), m.q());
        }
        mean = scale(1.0 / static_cast<double>(n_samples), mean);
        qmom /= static_cast<double>(n_samples);
        worst = std::max(worst, norm(mean));
        if (first) {
            max_moment = min_moment = qmom;
            first = false;
        } else {
            max_moment = std::max(max_moment, qmom);
            min_moment = std::min(min_moment, qmom);
        }
    }
    r.worst_mean_norm = worst;
    r.max_qth_moment = max_moment;
    r.mean_ok = worst <= r.mean_tolerance;
    // stability across n: no blow-up by more than 2x between probes
    r.moment_ok = std::isfinite(max_moment) &&
                  (max_moment <= 2.0 * min_moment + 1e-12);
    r.detail = "worst mean norm " + std::to_string(worst) + " (tol " +
               std::to_string(r.mean_tolerance) + "), q-th moment in [" +
               std::to_string(min_moment) + ", " + std::to_string(max_moment) + "]";
    return r;
}

}  // namespace spgd
