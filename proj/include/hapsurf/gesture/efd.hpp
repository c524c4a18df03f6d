#pragma once

#include <Eigen/Dense>

#include <vector>

namespace hapsurf::gesture {

/// Elliptic Fourier coefficients of a closed polygonal contour with
/// arc-length parameterization. Row n-1 of `harmonics` holds (a_n, b_n,
/// c_n, d_n).
struct EfdCoefficients {
    Eigen::Matrix<double, Eigen::Dynamic, 4> harmonics;
    double a0 = 0.0;
    double c0 = 0.0;
};

/// Throws ConfigError for contours with fewer than 3 distinct points or
/// zero perimeter.
EfdCoefficients elliptic_fourier(const std::vector<Eigen::Vector2d>& contour, int harmonic_count);

/// Flattened 4H descriptor, normalized for translation (DC dropped), scale
/// (first-harmonic magnitude), rotation, and starting point (first-harmonic
/// phases). The residual half-turn ambiguity resolves to the
/// lexicographically larger coefficient vector.
Eigen::VectorXd normalized_descriptor(const EfdCoefficients& coefficients);

Eigen::VectorXd efd_descriptor(const std::vector<Eigen::Vector2d>& contour, int harmonic_count);

/// Curve reconstructed from the (unnormalized) coefficients.
std::vector<Eigen::Vector2d> efd_reconstruct(const EfdCoefficients& coefficients,
                                             int point_count);

} // namespace hapsurf::gesture
