#pragma once

#include "hapsurf/gesture/geometry.hpp"
#include "hapsurf/gesture/image.hpp"

#include <Eigen/Dense>

#include <vector>

namespace hapsurf::gesture {

struct PoseOptions {
    double circle_tol_px = 2.0;       // contour-to-circle distance that counts as touching
    double min_wrist_arc_deg = 15.0;  // shortest admissible wrist arc
    double wrist_margin_deg = 8.0;    // angular widening when trimming the forearm
    double wrist_cut_radius_ratio = 0.55;
};

/// Detected hand geometry: contour, bounding circle, and the wrist arc (the
/// longest contour run hugging the circle).
struct HandPose {
    std::vector<Eigen::Vector2d> contour;
    Circle bounding;
    int wrist_begin = 0;  // index into contour, circular run
    int wrist_length = 0; // number of contour points in the run
    Eigen::Vector2d wrist_mid{0.0, 0.0};
};

/// Throws GeometryError when the frame is empty or no contour run touches
/// the bounding circle over the minimum arc.
HandPose detect_pose(const ContactFrame& frame, const PoseOptions& options = {});

struct CanonicalPose {
    Mask mask;            // rotated, wrist trimmed
    double theta_deg = 0; // applied counter-clockwise rotation, [0, 360)
    Circle bounding;      // circle of the input pose
};

/// Rotates the pose about the circle center so the wrist-to-center axis
/// points away from the table's bottom reference edge, then removes the
/// forearm pixels. The rotation angle theta is measured between the
/// reference edge and the wrist-to-center line.
CanonicalPose canonicalize(const ContactFrame& frame, const HandPose& pose,
                           const PoseOptions& options = {});

CanonicalPose canonicalize(const ContactFrame& frame, const PoseOptions& options = {});

} // namespace hapsurf::gesture
