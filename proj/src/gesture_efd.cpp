#include "hapsurf/gesture/efd.hpp"

#include "hapsurf/errors.hpp"

#include <cmath>
#include <numbers>

namespace hapsurf::gesture {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<Eigen::Vector2d> dedupe_closed(const std::vector<Eigen::Vector2d>& contour) {
    std::vector<Eigen::Vector2d> points;
    points.reserve(contour.size());
    for (const Eigen::Vector2d& p : contour) {
        if (points.empty() || (p - points.back()).norm() > 0.0) points.push_back(p);
    }
    while (points.size() > 1 && (points.front() - points.back()).norm() == 0.0) points.pop_back();
    return points;
}

} // namespace

EfdCoefficients elliptic_fourier(const std::vector<Eigen::Vector2d>& contour,
                                 int harmonic_count) {
    if (harmonic_count < 1) throw ConfigError("harmonic count must be >= 1");
    const std::vector<Eigen::Vector2d> p = dedupe_closed(contour);
    const std::size_t k = p.size();
    if (k < 3) throw ConfigError("elliptic Fourier analysis needs a closed contour of >= 3 points");

    std::vector<double> dx(k), dy(k), dt(k), t(k + 1, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        const Eigen::Vector2d d = p[(i + 1) % k] - p[i];
        dx[i] = d.x();
        dy[i] = d.y();
        dt[i] = d.norm();
        t[i + 1] = t[i] + dt[i];
    }
    const double period = t[k];
    if (!(period > 0.0)) throw ConfigError("contour has zero perimeter");

    EfdCoefficients out;
    out.harmonics.setZero(harmonic_count, 4);
    for (int n = 1; n <= harmonic_count; ++n) {
        const double scale = period / (2.0 * n * n * std::numbers::pi * std::numbers::pi);
        double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double phi0 = kTwoPi * n * t[i] / period;
            const double phi1 = kTwoPi * n * t[i + 1] / period;
            const double dcos = std::cos(phi1) - std::cos(phi0);
            const double dsin = std::sin(phi1) - std::sin(phi0);
            a += dx[i] / dt[i] * dcos;
            b += dx[i] / dt[i] * dsin;
            c += dy[i] / dt[i] * dcos;
            d += dy[i] / dt[i] * dsin;
        }
        out.harmonics(n - 1, 0) = scale * a;
        out.harmonics(n - 1, 1) = scale * b;
        out.harmonics(n - 1, 2) = scale * c;
        out.harmonics(n - 1, 3) = scale * d;
    }

    // DC terms (the contour centroid under arc-length parameterization).
    double a0 = 0.0, c0 = 0.0;
    double run_x = 0.0, run_y = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double xi = run_x - dx[i] / dt[i] * t[i];
        const double zeta = run_y - dy[i] / dt[i] * t[i];
        a0 += dx[i] / (2.0 * dt[i]) * (t[i + 1] * t[i + 1] - t[i] * t[i]) + xi * dt[i];
        c0 += dy[i] / (2.0 * dt[i]) * (t[i + 1] * t[i + 1] - t[i] * t[i]) + zeta * dt[i];
        run_x += dx[i];
        run_y += dy[i];
    }
    out.a0 = p[0].x() + a0 / period;
    out.c0 = p[0].y() + c0 / period;
    return out;
}

namespace {

using Harmonics = Eigen::Matrix<double, Eigen::Dynamic, 4>;

Harmonics shift_start(const Harmonics& h, double theta) {
    Harmonics out(h.rows(), 4);
    for (Eigen::Index n = 0; n < h.rows(); ++n) {
        const double ct = std::cos((n + 1) * theta);
        const double st = std::sin((n + 1) * theta);
        out(n, 0) = h(n, 0) * ct + h(n, 1) * st;
        out(n, 1) = -h(n, 0) * st + h(n, 1) * ct;
        out(n, 2) = h(n, 2) * ct + h(n, 3) * st;
        out(n, 3) = -h(n, 2) * st + h(n, 3) * ct;
    }
    return out;
}

Harmonics rotate_space(const Harmonics& h, double psi) {
    const double cp = std::cos(psi);
    const double sp = std::sin(psi);
    Harmonics out(h.rows(), 4);
    for (Eigen::Index n = 0; n < h.rows(); ++n) {
        out(n, 0) = cp * h(n, 0) + sp * h(n, 2);
        out(n, 1) = cp * h(n, 1) + sp * h(n, 3);
        out(n, 2) = -sp * h(n, 0) + cp * h(n, 2);
        out(n, 3) = -sp * h(n, 1) + cp * h(n, 3);
    }
    return out;
}

Eigen::VectorXd flatten_normalized(const Harmonics& h, double theta) {
    Harmonics shifted = shift_start(h, theta);
    const double psi = std::atan2(shifted(0, 2), shifted(0, 0));
    Harmonics rotated = rotate_space(shifted, psi);
    const double magnitude = rotated(0, 0); // sqrt(a1^2 + c1^2) >= 0 by construction
    if (magnitude > 0.0) rotated /= magnitude;
    Eigen::VectorXd flat(h.rows() * 4);
    for (Eigen::Index n = 0; n < h.rows(); ++n)
        for (int j = 0; j < 4; ++j) flat[n * 4 + j] = rotated(n, j);
    return flat;
}

} // namespace

Eigen::VectorXd normalized_descriptor(const EfdCoefficients& coefficients) {
    const Harmonics& h = coefficients.harmonics;
    const double a1 = h(0, 0), b1 = h(0, 1), c1 = h(0, 2), d1 = h(0, 3);
    const double theta =
        0.5 * std::atan2(2.0 * (a1 * b1 + c1 * d1), a1 * a1 + c1 * c1 - b1 * b1 - d1 * d1);

    // The first-harmonic phase leaves a half-turn ambiguity; evaluate both
    // candidates and decide by the sign of the largest differing entry,
    // which stays stable under small contour perturbations.
    const Eigen::VectorXd first = flatten_normalized(h, theta);
    const Eigen::VectorXd second = flatten_normalized(h, theta + std::numbers::pi);
    Eigen::Index pivot = 0;
    const double gap = (first - second).cwiseAbs().maxCoeff(&pivot);
    if (gap < 1e-9) return first;
    return first[pivot] > second[pivot] ? first : second;
}

Eigen::VectorXd efd_descriptor(const std::vector<Eigen::Vector2d>& contour, int harmonic_count) {
    return normalized_descriptor(elliptic_fourier(contour, harmonic_count));
}

std::vector<Eigen::Vector2d> efd_reconstruct(const EfdCoefficients& coefficients,
                                             int point_count) {
    std::vector<Eigen::Vector2d> points;
    points.reserve(static_cast<std::size_t>(point_count));
    for (int i = 0; i < point_count; ++i) {
        const double t = static_cast<double>(i) / point_count;
        double x = coefficients.a0;
        double y = coefficients.c0;
        for (Eigen::Index n = 0; n < coefficients.harmonics.rows(); ++n) {
            const double phi = kTwoPi * (n + 1) * t;
            x += coefficients.harmonics(n, 0) * std::cos(phi) +
                 coefficients.harmonics(n, 1) * std::sin(phi);
            y += coefficients.harmonics(n, 2) * std::cos(phi) +
                 coefficients.harmonics(n, 3) * std::sin(phi);
        }
        points.emplace_back(x, y);
    }
    return points;
}

} // namespace hapsurf::gesture
