#pragma once

#include "hapsurf/vibmap.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace hapsurf::waveform {

/// Piezo-channel routing: which patch the relay connects during a span of
/// samples. Spans may never overlap; only one piezo signal exists at a time.
struct RoutingSpan {
    Eigen::Index begin = 0; // inclusive
    Eigen::Index end = 0;   // exclusive
    vibmap::Actuator actuator = vibmap::Actuator::PA;
};

/// Two output channels, mirroring the amplifier wiring: one feeds the piezo
/// patches (through the relay routing), the other the electrostatic layer.
struct Waveform {
    double sample_rate_hz = 44100.0;
    Eigen::ArrayXd piezo_vp;
    Eigen::ArrayXd electro_vp;
    std::vector<RoutingSpan> routing;

    Eigen::Index sample_count() const { return std::max(piezo_vp.size(), electro_vp.size()); }

    /// True when routing spans are ordered, disjoint, and cover every
    /// nonzero piezo sample.
    bool piezo_exclusive() const;
};

/// Trapezoidal envelope value at time t for a part of the given duration and
/// ramp length; 0 at the endpoints, 1 over the plateau.
double trapezoid_envelope(double t_s, double duration_s, double ramp_s);

/// One constant-frequency tone with linear attack/release ramps.
Eigen::ArrayXd ramped_tone(double freq_hz, double amplitude, double duration_s, double ramp_s,
                           double sample_rate_hz);

/// CSV with a time column and one column per channel; `comments` lines are
/// written first, prefixed with '#', so the file feeds straight into gnuplot.
void write_csv(const Waveform& wave, const std::string& path,
               const std::vector<std::string>& comments = {});

/// 16-bit PCM stereo WAV (piezo on the left channel, electrostatic on the
/// right), normalized by full_scale_vp.
void write_wav16(const Waveform& wave, const std::string& path, double full_scale_vp);

} // namespace hapsurf::waveform
