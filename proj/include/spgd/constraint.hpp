#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "spgd/vec.hpp"

namespace spgd {

// Closed convex constraint set with a Euclidean projection and a normal-cone
// witness. The witness returns some element of N_X(x) (the zero vector in the
// interior); it satisfies <witness(x), y - x> <= 0 for all y in X.
class ConstraintSet {
public:
    enum class Kind { WholeSpace, Box, Ball, Halfspaces };

    struct Halfspace {
        Vec normal;     // a
        double offset;  // b, the set is { x : <a, x> <= b }
    };

    static ConstraintSet whole_space(std::size_t dim) {
        ConstraintSet c;
        c.kind_ = Kind::WholeSpace;
        c.dim_ = dim;
        return c;
    }

    static ConstraintSet box(Vec lower, Vec upper) {
        if (lower.size() != upper.size())
            throw InputError("box: lower/upper dimension mismatch");
        for (std::size_t i = 0; i < lower.size(); ++i)
            if (!(lower[i] <= upper[i]))
                throw InputError("box: lower > upper in coordinate " + std::to_string(i));
        ConstraintSet c;
        c.kind_ = Kind::Box;
        c.dim_ = lower.size();
        c.lower_ = std::move(lower);
        c.upper_ = std::move(upper);
        return c;
    }

    static ConstraintSet ball(Vec center, double radius) {
        if (!(radius > 0.0)) throw InputError("ball: radius must be positive");
        ConstraintSet c;
        c.kind_ = Kind::Ball;
        c.dim_ = center.size();
        c.center_ = std::move(center);
        c.radius_ = radius;
        return c;
    }

    static ConstraintSet halfspaces(std::vector<Halfspace> hs, std::size_t dim) {
        for (const auto& h : hs) {
            if (h.normal.size() != dim)
                throw InputError("halfspaces: normal dimension mismatch");
            if (norm(h.normal) == 0.0)
                throw InputError("halfspaces: zero normal");
        }
        ConstraintSet c;
        c.kind_ = Kind::Halfspaces;
        c.dim_ = dim;
        c.halfspaces_ = std::move(hs);
        return c;
    }

    Kind kind() const { return kind_; }
    std::size_t dim() const { return dim_; }
    const Vec& lower() const { return lower_; }
    const Vec& upper() const { return upper_; }

    bool is_whole_space() const { return kind_ == Kind::WholeSpace; }

    Vec project(const Vec& y) const {
        require_dim(y, dim_, "ConstraintSet::project");
        switch (kind_) {
            case Kind::WholeSpace:
                return y;
            case Kind::Box: {
                Vec r(y.size());
                for (std::size_t i = 0; i < y.size(); ++i)
                    r[i] = std::clamp(y[i], lower_[i], upper_[i]);
                return r;
            }
            case Kind::Ball: {
                Vec d = sub(y, center_);
                double n = norm(d);
                if (n <= radius_) return y;
                return axpy(center_, radius_ / n, d);
            }
            case Kind::Halfspaces:
                return project_halfspaces(y);
        }
        return y;
    }

    bool contains(const Vec& x, double tol = 1e-10) const {
        return dist(x, project(x)) <= tol;
    }

    // An element of the normal cone at x (zero in the interior). For boxes the
    // witness is the sum of active-face outward unit normals, for balls the
    // outward radial direction at the boundary, for halfspace intersections
    // the sum of active constraint normals.
    Vec normal_cone_witness(const Vec& x, double tol = 1e-10) const {
        require_dim(x, dim_, "ConstraintSet::normal_cone_witness");
        Vec w = zeros(dim_);
        switch (kind_) {
            case Kind::WholeSpace:
                break;
            case Kind::Box:
                for (std::size_t i = 0; i < x.size(); ++i) {
                    if (x[i] >= upper_[i] - tol) w[i] += 1.0;
                    if (x[i] <= lower_[i] + tol) w[i] -= 1.0;
                }
                break;
            case Kind::Ball: {
                Vec d = sub(x, center_);
                double n = norm(d);
                if (n >= radius_ - tol && n > 0.0) w = scale(1.0 / n, d);
                break;
            }
            case Kind::Halfspaces:
                for (const auto& h : halfspaces_) {
                    double slack = h.offset - dot(h.normal, x);
                    if (slack <= tol * (1.0 + std::abs(h.offset))) w = add(w, h.normal);
                }
                break;
        }
        return w;
    }

    std::string describe() const {
        switch (kind_) {
            case Kind::WholeSpace: return "whole_space";
            case Kind::Box: return "box";
            case Kind::Ball: return "ball";
            case Kind::Halfspaces: return "halfspaces(" + std::to_string(halfspaces_.size()) + ")";
        }
        return "?";
    }

private:
    // Dykstra's alternating projections onto the halfspace intersection.
    Vec project_halfspaces(const Vec& y) const {
        const std::size_t m = halfspaces_.size();
        Vec x = y;
        std::vector<Vec> corrections(m, zeros(dim_));
        for (int sweep = 0; sweep < 1000; ++sweep) {
            double moved = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                Vec z = add(x, corrections[k]);
                Vec p = project_one(z, halfspaces_[k]);
                corrections[k] = sub(z, p);
                moved += dist(x, p);
                x = std::move(p);
            }
            if (moved <= 1e-14 * (1.0 + norm(x))) break;
        }
        return x;
    }

    static Vec project_one(const Vec& z, const Halfspace& h) {
        double viol = dot(h.normal, z) - h.offset;
        if (viol <= 0.0) return z;
        return axpy(z, -viol / sqnorm(h.normal), h.normal);
    }

    Kind kind_ = Kind::WholeSpace;
    std::size_t dim_ = 0;
    Vec lower_, upper_;            // Box
    Vec center_;                   // Ball
    double radius_ = 0.0;          // Ball
    std::vector<Halfspace> halfspaces_;
};

}  // namespace spgd
