#include "hapsurf/gesture/pose.hpp"

#include "hapsurf/errors.hpp"

#include <cmath>
#include <numbers>

namespace hapsurf::gesture {

namespace {

double chord_angle_deg(const Eigen::Vector2d& a, const Eigen::Vector2d& b, double radius) {
    const double chord = (a - b).norm();
    const double ratio = std::min(1.0, chord / (2.0 * radius));
    return 2.0 * std::asin(ratio) * 180.0 / std::numbers::pi;
}

} // namespace

HandPose detect_pose(const ContactFrame& frame, const PoseOptions& options) {
    if (frame.empty()) throw GeometryError("cannot detect a pose in an empty frame");

    HandPose pose;
    pose.contour = trace_contour(frame.mask);
    pose.bounding = min_enclosing_circle(pose.contour);

    const int n = static_cast<int>(pose.contour.size());
    std::vector<char> touching(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double d = (pose.contour[static_cast<std::size_t>(i)] - pose.bounding.center).norm();
        touching[static_cast<std::size_t>(i)] = std::abs(d - pose.bounding.radius) <=
                                                options.circle_tol_px;
    }

    // Longest circular run of circle-touching points.
    int best_begin = -1, best_length = 0;
    int run_begin = -1, run_length = 0;
    for (int i = 0; i < 2 * n; ++i) {
        if (touching[static_cast<std::size_t>(i % n)]) {
            if (run_length == 0) run_begin = i;
            if (++run_length > best_length && run_begin < n) {
                best_begin = run_begin;
                best_length = std::min(run_length, n);
            }
        } else {
            run_length = 0;
        }
    }

    bool found = false;
    if (best_length > 1) {
        const Eigen::Vector2d& first = pose.contour[static_cast<std::size_t>(best_begin % n)];
        const Eigen::Vector2d& last =
            pose.contour[static_cast<std::size_t>((best_begin + best_length - 1) % n)];
        found = chord_angle_deg(first, last, pose.bounding.radius) >= options.min_wrist_arc_deg;
    }
    if (!found)
        throw GeometryError("wrist not found: no contour arc of >= " +
                            std::to_string(options.min_wrist_arc_deg) +
                            " degrees touches the bounding circle");

    pose.wrist_begin = best_begin % n;
    pose.wrist_length = best_length;
    pose.wrist_mid = pose.contour[static_cast<std::size_t>((best_begin + best_length / 2) % n)];
    return pose;
}

CanonicalPose canonicalize(const ContactFrame& frame, const HandPose& pose,
                           const PoseOptions& options) {
    const Eigen::Vector2d center = pose.bounding.center;
    const Eigen::Vector2d v = center - pose.wrist_mid;

    // Angles in a y-up frame; the reference edge is the bottom image edge.
    const double phi_deg = std::atan2(-v.y(), v.x()) * 180.0 / std::numbers::pi;
    double theta_deg = 90.0 - phi_deg;
    theta_deg = std::fmod(theta_deg, 360.0);
    if (theta_deg < 0.0) theta_deg += 360.0;

    const double theta = theta_deg * std::numbers::pi / 180.0;
    const double ct = std::cos(theta);
    const double st = std::sin(theta);

    CanonicalPose canonical;
    canonical.theta_deg = theta_deg;
    canonical.bounding = pose.bounding;
    canonical.mask = Mask::Zero(frame.mask.rows(), frame.mask.cols());

    const int rows = static_cast<int>(frame.mask.rows());
    const int cols = static_cast<int>(frame.mask.cols());
    const int pad = static_cast<int>(std::ceil(pose.bounding.radius)) + 2;
    const int r_lo = std::max(0, static_cast<int>(center.y()) - pad);
    const int r_hi = std::min(rows - 1, static_cast<int>(center.y()) + pad);
    const int c_lo = std::max(0, static_cast<int>(center.x()) - pad);
    const int c_hi = std::min(cols - 1, static_cast<int>(center.x()) + pad);

    // Wrist trim: after rotation the forearm points straight down; clear a
    // widened angular wedge beyond the cut radius.
    const int n = static_cast<int>(pose.contour.size());
    const Eigen::Vector2d arc_first = pose.contour[static_cast<std::size_t>(pose.wrist_begin)];
    const Eigen::Vector2d arc_last =
        pose.contour[static_cast<std::size_t>((pose.wrist_begin + pose.wrist_length - 1) % n)];
    const double half_span_deg =
        chord_angle_deg(arc_first, arc_last, pose.bounding.radius) / 2.0 +
        options.wrist_margin_deg;
    const double cut_radius = pose.bounding.radius * options.wrist_cut_radius_ratio;

    for (int r = r_lo; r <= r_hi; ++r) {
        for (int c = c_lo; c <= c_hi; ++c) {
            const double qx = c - center.x();
            const double qy = r - center.y();
            // Inverse map of a counter-clockwise rotation in a y-up frame.
            const double sx = center.x() + ct * qx - st * qy;
            const double sy = center.y() + st * qx + ct * qy;
            const int sr = static_cast<int>(std::lround(sy));
            const int sc = static_cast<int>(std::lround(sx));
            if (sr < 0 || sr >= rows || sc < 0 || sc >= cols || !frame.mask(sr, sc)) continue;

            if (std::hypot(qx, qy) >= cut_radius) {
                double angle_deg = std::atan2(-qy, qx) * 180.0 / std::numbers::pi;
                double off = std::fmod(angle_deg - (-90.0), 360.0);
                if (off < -180.0) off += 360.0;
                if (off > 180.0) off -= 360.0;
                if (std::abs(off) <= half_span_deg) continue; // forearm wedge
            }
            canonical.mask(r, c) = 1;
        }
    }
    return canonical;
}

CanonicalPose canonicalize(const ContactFrame& frame, const PoseOptions& options) {
    return canonicalize(frame, detect_pose(frame, options), options);
}

} // namespace hapsurf::gesture
