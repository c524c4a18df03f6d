#include "hapsurf/gesture/synth.hpp"

#include "hapsurf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace hapsurf::gesture {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

struct EllipsePrim {
    Eigen::Vector2d center;
    double rx, ry;
    bool contains(const Eigen::Vector2d& p) const {
        const double u = (p.x() - center.x()) / rx;
        const double v = (p.y() - center.y()) / ry;
        return u * u + v * v <= 1.0;
    }
    double extent() const { return center.norm() + std::max(rx, ry); }
};

struct CapsulePrim {
    Eigen::Vector2d a, b;
    double r;
    bool contains(const Eigen::Vector2d& p) const {
        const Eigen::Vector2d ab = b - a;
        const double len2 = ab.squaredNorm();
        double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        return (p - (a + t * ab)).norm() <= r;
    }
    double extent() const { return std::max(a.norm(), b.norm()) + r; }
};

struct ArmPrim {
    Eigen::Vector2d dir; // unit, away from the palm
    double halfwidth;
    double reach; // outer radius, shared with the bounding circle
    bool contains(const Eigen::Vector2d& p) const {
        const double along = p.dot(dir);
        if (along < 0.0) return false;
        const double across = (p - along * dir).norm();
        return across <= halfwidth && p.norm() <= reach;
    }
};

/// Hand silhouette in local coordinates: +y is "fingers up", the forearm
/// points down and ends on an arc of radius `arm.reach` about the origin,
/// so the minimum enclosing circle stays centered near the palm and the
/// wrist arc hugs it.
struct HandShape {
    EllipsePrim palm;
    std::vector<CapsulePrim> fingers;
    std::vector<EllipsePrim> bumps;
    ArmPrim arm;

    bool contains(const Eigen::Vector2d& p) const {
        if (palm.contains(p) || arm.contains(p)) return true;
        for (const CapsulePrim& f : fingers)
            if (f.contains(p)) return true;
        for (const EllipsePrim& b : bumps)
            if (b.contains(p)) return true;
        return false;
    }
};

Eigen::Vector2d polar(double angle_deg, double radius) {
    return {radius * std::cos(angle_deg * kDegToRad), radius * std::sin(angle_deg * kDegToRad)};
}

CapsulePrim make_finger(const EllipsePrim& palm, double angle_deg, double length, double radius) {
    const Eigen::Vector2d base(0.88 * palm.rx * std::cos(angle_deg * kDegToRad),
                               0.88 * palm.ry * std::sin(angle_deg * kDegToRad));
    return {base, base + polar(angle_deg, length), radius};
}

HandShape make_hand(Rng& rng, GestureLabel label) {
    HandShape hand;
    hand.palm = {{0.0, 0.0}, rng.uniform(50.0, 60.0), rng.uniform(45.0, 55.0)};

    switch (label) {
        case GestureLabel::OneFinger:
            hand.fingers.push_back(make_finger(hand.palm, 90.0 + rng.uniform(-5.0, 5.0),
                                               rng.uniform(78.0, 100.0), rng.uniform(9.5, 12.0)));
            break;
        case GestureLabel::TwoFinger: {
            const double spread = rng.uniform(11.0, 17.0);
            hand.fingers.push_back(make_finger(hand.palm, 90.0 - spread, rng.uniform(72.0, 95.0),
                                               rng.uniform(9.0, 11.5)));
            hand.fingers.push_back(make_finger(hand.palm, 90.0 + spread, rng.uniform(72.0, 95.0),
                                               rng.uniform(9.0, 11.5)));
            break;
        }
        case GestureLabel::LShape:
            hand.fingers.push_back(make_finger(hand.palm, 90.0 + rng.uniform(-5.0, 5.0),
                                               rng.uniform(75.0, 95.0), rng.uniform(9.5, 12.0)));
            hand.fingers.push_back(make_finger(hand.palm, rng.uniform(168.0, 182.0),
                                               rng.uniform(50.0, 68.0), rng.uniform(10.5, 13.5)));
            break;
        case GestureLabel::ClosedHand: {
            hand.palm = {{0.0, 0.0}, rng.uniform(56.0, 66.0), rng.uniform(50.0, 60.0)};
            for (double angle : {55.0, 78.0, 102.0, 125.0}) {
                const double a = angle + rng.uniform(-3.0, 3.0);
                const double r = rng.uniform(8.0, 11.0);
                hand.bumps.push_back({{0.95 * hand.palm.rx * std::cos(a * kDegToRad),
                                       0.95 * hand.palm.ry * std::sin(a * kDegToRad)},
                                      r, r});
            }
            break;
        }
        case GestureLabel::OpenHand: {
            const double base_angles[5] = {25.0, 58.0, 90.0, 122.0, 158.0};
            const double base_lengths[5] = {52.0, 80.0, 92.0, 80.0, 62.0};
            for (int f = 0; f < 5; ++f) {
                hand.fingers.push_back(make_finger(
                    hand.palm, base_angles[f] + rng.uniform(-4.0, 4.0),
                    base_lengths[f] * rng.uniform(0.9, 1.1),
                    f == 4 ? rng.uniform(10.5, 13.0) : rng.uniform(8.5, 11.0)));
            }
            break;
        }
        default:
            throw ConfigError("make_hand expects a static gesture label");
    }

    double r_max = hand.palm.extent();
    for (const CapsulePrim& f : hand.fingers) r_max = std::max(r_max, f.extent());
    for (const EllipsePrim& b : hand.bumps) r_max = std::max(r_max, b.extent());

    const double arm_angle = -90.0 + rng.uniform(-8.0, 8.0);
    hand.arm.dir = polar(arm_angle, 1.0);
    hand.arm.halfwidth = rng.uniform(33.0, 42.0);
    hand.arm.reach = r_max + rng.uniform(12.0, 18.0);
    return hand;
}

Mask rasterize(const HandShape& hand, double rotation_deg, double scale,
               const Eigen::Vector2d& center, int width, int height) {
    Mask mask = Mask::Zero(height, width);
    const double reach = hand.arm.reach * scale + 2.0;
    const int r_lo = std::max(0, static_cast<int>(center.y() - reach));
    const int r_hi = std::min(height - 1, static_cast<int>(center.y() + reach));
    const int c_lo = std::max(0, static_cast<int>(center.x() - reach));
    const int c_hi = std::min(width - 1, static_cast<int>(center.x() + reach));
    const double ca = std::cos(-rotation_deg * kDegToRad);
    const double sa = std::sin(-rotation_deg * kDegToRad);
    for (int r = r_lo; r <= r_hi; ++r) {
        for (int c = c_lo; c <= c_hi; ++c) {
            const double qx = (c - center.x()) / scale;
            const double qy = (r - center.y()) / scale;
            const Eigen::Vector2d local(ca * qx - sa * qy, sa * qx + ca * qy);
            if (hand.contains(local)) mask(r, c) = 1;
        }
    }
    return mask;
}

void stamp_ellipse(Mask& mask, const Eigen::Vector2d& center, double rx, double ry,
                   double angle_deg) {
    const int height = static_cast<int>(mask.rows());
    const int width = static_cast<int>(mask.cols());
    const double reach = std::max(rx, ry) + 2.0;
    const int r_lo = std::max(0, static_cast<int>(center.y() - reach));
    const int r_hi = std::min(height - 1, static_cast<int>(center.y() + reach));
    const int c_lo = std::max(0, static_cast<int>(center.x() - reach));
    const int c_hi = std::min(width - 1, static_cast<int>(center.x() + reach));
    const double ca = std::cos(-angle_deg * kDegToRad);
    const double sa = std::sin(-angle_deg * kDegToRad);
    for (int r = r_lo; r <= r_hi; ++r) {
        for (int c = c_lo; c <= c_hi; ++c) {
            const double qx = c - center.x();
            const double qy = r - center.y();
            const double u = (ca * qx - sa * qy) / rx;
            const double v = (sa * qx + ca * qy) / ry;
            if (u * u + v * v <= 1.0) mask(r, c) = 1;
        }
    }
}

} // namespace

ContactFrame make_static_frame(Rng& rng, GestureLabel label, int width, int height) {
    if (!is_static(label)) throw ConfigError("make_static_frame expects a static gesture label");
    const HandShape hand = make_hand(rng, label);
    const double scale = rng.uniform(0.8, 1.05);
    const double rotation = rng.uniform(0.0, 360.0);
    const double reach = hand.arm.reach * scale;
    const double margin = reach + 6.0;
    if (2.0 * margin >= std::min(width, height))
        throw ConfigError("frame too small for the generated hand");
    const Eigen::Vector2d center(rng.uniform(margin, width - margin),
                                 rng.uniform(margin, height - margin));
    return make_frame(rasterize(hand, rotation, scale, center, width, height));
}

std::vector<ContactFrame> make_dynamic_sequence(Rng& rng, GestureLabel label, int width,
                                                int height) {
    if (is_static(label))
        throw ConfigError("make_dynamic_sequence expects a dynamic gesture label");

    constexpr int kFrames = 4;
    const double margin = 170.0;
    const Eigen::Vector2d center(rng.uniform(margin, width - margin),
                                 rng.uniform(margin, height - margin));

    // All motion parameters are drawn up front; each frame is then a pure
    // function of (parameters, frame index).
    std::function<void(Mask&, int)> stamp;
    switch (label) {
        case GestureLabel::Drag: {
            const double dir_deg = rng.uniform(0.0, 360.0);
            const double step = rng.uniform(9.0, 18.0);
            const double radius = rng.uniform(9.0, 13.0);
            stamp = [=](Mask& mask, int k) {
                stamp_ellipse(mask, center + polar(dir_deg, step * k), radius, radius, 0.0);
            };
            break;
        }
        case GestureLabel::Rotate: {
            const double orbit_r = rng.uniform(65.0, 110.0);
            const double step_deg = (rng.uniform() < 0.5 ? 1.0 : -1.0) * rng.uniform(7.0, 16.0);
            const double angle0 = rng.uniform(0.0, 360.0);
            const double tip_r = rng.uniform(9.0, 13.0);
            stamp = [=](Mask& mask, int k) {
                stamp_ellipse(mask, center, tip_r, tip_r, 0.0);
                stamp_ellipse(mask, center + polar(angle0 + step_deg * k, orbit_r), tip_r, tip_r,
                              0.0);
            };
            break;
        }
        case GestureLabel::SpreadPile: {
            const double r0 = rng.uniform(45.0, 65.0);
            const double step = rng.uniform(5.0, 8.0);
            const double phase = rng.uniform(0.0, 72.0);
            const double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
            stamp = [=](Mask& mask, int k) {
                for (int f = 0; f < 5; ++f)
                    stamp_ellipse(mask, center + polar(phase + 72.0 * f, r0 + sign * step * k),
                                  10.0, 10.0, 0.0);
            };
            break;
        }
        case GestureLabel::Wipe: {
            const double dir_deg = rng.uniform(0.0, 360.0);
            const double step = rng.uniform(12.0, 22.0);
            const double rx = rng.uniform(16.0, 24.0);
            const double ry = rng.uniform(55.0, 75.0);
            stamp = [=](Mask& mask, int k) {
                stamp_ellipse(mask, center + polar(dir_deg, step * k), rx, ry, dir_deg);
            };
            break;
        }
        case GestureLabel::Zoom: {
            const double axis_deg = rng.uniform(0.0, 360.0);
            const double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
            const double sep0 = sign > 0.0 ? rng.uniform(60.0, 90.0) : rng.uniform(100.0, 130.0);
            const double step = rng.uniform(6.0, 10.0);
            const double radius = rng.uniform(9.0, 13.0);
            stamp = [=](Mask& mask, int k) {
                const double half = (sep0 + sign * 2.0 * step * k) / 2.0;
                stamp_ellipse(mask, center + polar(axis_deg, half), radius, radius, 0.0);
                stamp_ellipse(mask, center + polar(axis_deg + 180.0, half), radius, radius, 0.0);
            };
            break;
        }
        default:
            throw ConfigError("unexpected dynamic gesture label");
    }

    std::vector<ContactFrame> frames;
    frames.reserve(kFrames);
    for (int k = 0; k < kFrames; ++k) {
        Mask mask = Mask::Zero(height, width);
        stamp(mask, k);
        frames.push_back(make_frame(std::move(mask), k / 60.0));
    }
    return frames;
}

Corpus make_static_corpus(const SynthOptions& options) {
    Rng rng(options.seed);
    Corpus corpus;
    corpus.kind = GestureKind::Static;
    for (GestureLabel label : labels_of(GestureKind::Static)) {
        for (int i = 0; i < options.per_class; ++i) {
            CorpusItem item;
            item.label = label;
            item.frames.push_back(make_static_frame(rng, label, options.width, options.height));
            corpus.items.push_back(std::move(item));
        }
    }
    return corpus;
}

Corpus make_dynamic_corpus(const SynthOptions& options) {
    Rng rng(options.seed);
    Corpus corpus;
    corpus.kind = GestureKind::Dynamic;
    for (GestureLabel label : labels_of(GestureKind::Dynamic)) {
        for (int i = 0; i < options.per_class; ++i) {
            CorpusItem item;
            item.label = label;
            item.frames = make_dynamic_sequence(rng, label, options.width, options.height);
            corpus.items.push_back(std::move(item));
        }
    }
    return corpus;
}

} // namespace hapsurf::gesture
