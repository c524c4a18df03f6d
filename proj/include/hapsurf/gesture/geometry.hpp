#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace hapsurf::gesture {

struct Circle {
    Eigen::Vector2d center{0.0, 0.0};
    double radius = 0.0;

    bool contains(const Eigen::Vector2d& p, double tol = 1e-9) const {
        return (p - center).norm() <= radius * (1.0 + 1e-12) + tol;
    }
};

/// Exact minimum enclosing circle (Welzl, randomized incremental with a
/// fixed seed). Throws GeometryError for an empty point set.
Circle min_enclosing_circle(std::span<const Eigen::Vector2d> points);

/// Circle through two points (as diameter) or three points (circumcircle);
/// collinear triples degrade to the widest two-point circle.
Circle circle_from(const Eigen::Vector2d& a, const Eigen::Vector2d& b);
Circle circle_from(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c);

} // namespace hapsurf::gesture
