#include "hapsurf/gesture/geometry.hpp"

#include "hapsurf/errors.hpp"
#include "hapsurf/rng.hpp"

#include <cmath>

namespace hapsurf::gesture {

Circle circle_from(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return {(a + b) / 2.0, (a - b).norm() / 2.0};
}

Circle circle_from(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
    const Eigen::Vector2d ab = b - a;
    const Eigen::Vector2d ac = c - a;
    const double d = 2.0 * (ab.x() * ac.y() - ab.y() * ac.x());
    const double scale = std::max({ab.norm(), ac.norm(), (b - c).norm()});
    if (std::abs(d) <= 1e-12 * scale * scale) {
        // Collinear: the widest pair circle covers all three.
        Circle best = circle_from(a, b);
        for (const Circle& candidate : {circle_from(a, c), circle_from(b, c)})
            if (candidate.radius > best.radius) best = candidate;
        return best;
    }
    const double ab2 = ab.squaredNorm();
    const double ac2 = ac.squaredNorm();
    const Eigen::Vector2d center =
        a + Eigen::Vector2d(ac.y() * ab2 - ab.y() * ac2, ab.x() * ac2 - ac.x() * ab2) / d;
    const double radius = std::max({(center - a).norm(), (center - b).norm(), (center - c).norm()});
    return {center, radius};
}

Circle min_enclosing_circle(std::span<const Eigen::Vector2d> points) {
    if (points.empty()) throw GeometryError("minimum enclosing circle of an empty point set");

    std::vector<Eigen::Vector2d> p(points.begin(), points.end());
    Rng rng(0x9e3779b97f4a7c15ull); // fixed seed keeps results reproducible
    rng.shuffle(p);

    Circle circle{p[0], 0.0};
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (circle.contains(p[i])) continue;
        circle = {p[i], 0.0};
        for (std::size_t j = 0; j < i; ++j) {
            if (circle.contains(p[j])) continue;
            circle = circle_from(p[i], p[j]);
            for (std::size_t k = 0; k < j; ++k) {
                if (circle.contains(p[k])) continue;
                circle = circle_from(p[i], p[j], p[k]);
            }
        }
    }
    return circle;
}

} // namespace hapsurf::gesture
