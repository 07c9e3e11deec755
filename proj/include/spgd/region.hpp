#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "spgd/vec.hpp"

namespace spgd {

// Open region of R^d used for neighborhoods and thinning keep-lists.
struct Region {
    enum class Kind { Ball, Box };

    Kind kind = Kind::Ball;
    Vec center;       // Ball
    double radius = 0.0;
    Vec lower, upper;  // Box (open)

    static Region ball(Vec c, double r) {
        Region g;
        g.kind = Kind::Ball;
        g.center = std::move(c);
        g.radius = r;
        return g;
    }

    static Region box(Vec lo, Vec hi) {
        Region g;
        g.kind = Kind::Box;
        g.lower = std::move(lo);
        g.upper = std::move(hi);
        return g;
    }

    std::size_t dim() const {
        return kind == Kind::Ball ? center.size() : lower.size();
    }

    bool contains(std::span<const double> x) const {
        if (kind == Kind::Ball) {
            double s = 0.0;
            for (std::size_t i = 0; i < center.size(); ++i) {
                double d = x[i] - center[i];
                s += d * d;
            }
            return s < radius * radius;
        }
        for (std::size_t i = 0; i < lower.size(); ++i)
            if (!(x[i] > lower[i] && x[i] < upper[i])) return false;
        return true;
    }

    bool contains(const Vec& x) const {
        return contains(std::span<const double>(x.data(), x.size()));
    }

    // True iff *this is contained in `outer` (closures compared, non-strict).
    bool subset_of(const Region& outer) const {
        if (dim() != outer.dim()) return false;
        if (kind == Kind::Ball && outer.kind == Kind::Ball)
            return dist(center, outer.center) + radius <= outer.radius;
        if (kind == Kind::Box && outer.kind == Kind::Box) {
            for (std::size_t i = 0; i < lower.size(); ++i)
                if (!(lower[i] >= outer.lower[i] && upper[i] <= outer.upper[i]))
                    return false;
            return true;
        }
        if (kind == Kind::Ball && outer.kind == Kind::Box) {
            for (std::size_t i = 0; i < center.size(); ++i)
                if (!(center[i] - radius >= outer.lower[i] &&
                      center[i] + radius <= outer.upper[i]))
                    return false;
            return true;
        }
        std::size_t d = lower.size();
        for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
            Vec corner(d);
            for (std::size_t i = 0; i < d; ++i)
                corner[i] = (mask >> i) & 1 ? upper[i] : lower[i];
            if (!(dist(corner, outer.center) <= outer.radius)) return false;
        }
        return true;
    }

    // True iff closure(*this) is contained in the open region `outer`.
    // Exact for ball/box combinations.
    bool closure_inside(const Region& outer) const {
        if (dim() != outer.dim()) return false;
        if (kind == Kind::Ball && outer.kind == Kind::Ball)
            return dist(center, outer.center) + radius < outer.radius;
        if (kind == Kind::Box && outer.kind == Kind::Box) {
            for (std::size_t i = 0; i < lower.size(); ++i)
                if (!(lower[i] > outer.lower[i] && upper[i] < outer.upper[i]))
                    return false;
            return true;
        }
        if (kind == Kind::Ball && outer.kind == Kind::Box) {
            for (std::size_t i = 0; i < center.size(); ++i)
                if (!(center[i] - radius > outer.lower[i] &&
                      center[i] + radius < outer.upper[i]))
                    return false;
            return true;
        }
        // box inside ball: all corners strictly inside
        std::size_t d = lower.size();
        for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
            Vec corner(d);
            for (std::size_t i = 0; i < d; ++i)
                corner[i] = (mask >> i) & 1 ? upper[i] : lower[i];
            if (!(dist(corner, outer.center) < outer.radius)) return false;
        }
        return true;
    }

    std::string describe() const {
        if (kind == Kind::Ball) {
            std::string s = "ball(c=[";
            for (std::size_t i = 0; i < center.size(); ++i)
                s += (i ? "," : "") + std::to_string(center[i]);
            return s + "], r=" + std::to_string(radius) + ")";
        }
        std::string s = "box([";
        for (std::size_t i = 0; i < lower.size(); ++i)
            s += (i ? "," : "") + std::to_string(lower[i]);
        s += "],[";
        for (std::size_t i = 0; i < upper.size(); ++i)
            s += (i ? "," : "") + std::to_string(upper[i]);
        return s + "])";
    }
};

}  // namespace spgd
