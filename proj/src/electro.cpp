#include "hapsurf/electro.hpp"

#include "hapsurf/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace hapsurf::electro {

void ElectroParams::validate() const {
    if (!(eps0_f_per_m > 0.0) || !(contact_area_m2 > 0.0))
        throw ConfigError("permittivity and contact area must be positive");
    if (!(eps_insulator >= 1.0) || !(eps_skin >= 1.0))
        throw ConfigError("relative permittivities must be >= 1");
    if (!(thickness_insulator_m > 0.0) || !(thickness_skin_m > 0.0))
        throw ConfigError("layer thicknesses must be positive");
    if (!(friction_coefficient > 0.0) || !(normal_force_n > 0.0))
        throw ConfigError("friction coefficient and normal force must be positive");
}

double electrostatic_force(const ElectroParams& p, double volts) {
    p.validate();
    const double stack = 2.0 * (p.thickness_insulator_m + p.thickness_skin_m) *
                         (p.thickness_insulator_m / p.eps_insulator +
                          p.thickness_skin_m / p.eps_skin);
    return p.eps0_f_per_m * volts * volts * p.contact_area_m2 / stack;
}

double friction_force(const ElectroParams& p, double volts, bool sliding) {
    if (!sliding) return 0.0;
    return p.friction_coefficient * (p.normal_force_n + electrostatic_force(p, volts));
}

std::string to_string(KnobCondition c) {
    switch (c) {
        case KnobCondition::Virtual: return "V";
        case KnobCondition::Detent: return "HD";
        case KnobCondition::DetentConstantFriction: return "HD+CF";
        case KnobCondition::DetentVelocityFriction: return "HD+VF";
    }
    throw ConfigError("unknown knob condition enum value");
}

KnobCondition condition_from_string(const std::string& name) {
    if (name == "V") return KnobCondition::Virtual;
    if (name == "HD") return KnobCondition::Detent;
    if (name == "HD+CF") return KnobCondition::DetentConstantFriction;
    if (name == "HD+VF") return KnobCondition::DetentVelocityFriction;
    throw ParseError("unknown knob condition '" + name + "' (expected V, HD, HD+CF, or HD+VF)");
}

void KnobSpec::validate() const {
    if (sector_count < 2) throw ConfigError("knob needs at least 2 sectors");
    if (!(radius_mm > 0.0)) throw ConfigError("knob radius must be positive");
    if (menu_length < 1) throw ConfigError("menu length must be >= 1");
}

KnobSession::KnobSession(KnobSpec spec, KnobCondition condition, KnobTuning tuning)
    : spec_(spec), condition_(condition), tuning_(tuning) {
    spec_.validate();
    if (tuning_.velocity_filter_taps < 1) throw ConfigError("velocity filter needs >= 1 tap");
    if (!(tuning_.hysteresis_deg >= 0.0) || tuning_.hysteresis_deg >= spec_.sector_size_deg())
        throw ConfigError("hysteresis must lie in [0, sector size)");
}

int KnobSession::sector_index() const {
    const long long n = spec_.sector_count;
    return static_cast<int>(((sector_ % n) + n) % n);
}

double KnobSession::instantaneous_freq_hz() const {
    const double span = tuning_.velocity_freq_max_hz - tuning_.velocity_freq_min_hz;
    const double ratio =
        std::min(std::abs(velocity_filtered_deg_s_) / tuning_.velocity_full_scale_deg_s, 1.0);
    return tuning_.velocity_freq_min_hz + span * ratio;
}

void KnobSession::append_segment(const WaveSegment& segment) {
    if (segment.t_end_s <= segment.t_begin_s) return;
    if (!segments_.empty()) {
        WaveSegment& last = segments_.back();
        if (last.shape == segment.shape && last.amplitude_vp == segment.amplitude_vp &&
            last.freq_hz == segment.freq_hz && last.t_end_s == segment.t_begin_s &&
            emitted_ < segments_.size()) {
            last.t_end_s = segment.t_end_s;
            return;
        }
    }
    segments_.push_back(segment);
}

void KnobSession::emit(double t_begin, double t_end) {
    if (t_end <= t_begin) return;

    WaveSegment carrier;
    carrier.shape = SegmentShape::Silence;
    switch (condition_) {
        case KnobCondition::Virtual:
        case KnobCondition::Detent:
            break;
        case KnobCondition::DetentConstantFriction:
            carrier.shape = SegmentShape::Sine;
            carrier.amplitude_vp = tuning_.carrier_amplitude_vpp / 2.0;
            carrier.freq_hz = tuning_.constant_friction_freq_hz;
            break;
        case KnobCondition::DetentVelocityFriction:
            carrier.shape = SegmentShape::Sine;
            carrier.amplitude_vp = tuning_.carrier_amplitude_vpp / 2.0;
            carrier.freq_hz = instantaneous_freq_hz();
            break;
    }

    const bool pulses = condition_ != KnobCondition::Virtual;
    double cursor = t_begin;
    if (pulses && pulse_until_s_ > cursor) {
        const double pulse_end = std::min(t_end, pulse_until_s_);
        append_segment({cursor, pulse_end, SegmentShape::Square, tuning_.detent_amplitude_vp, 0.0});
        cursor = pulse_end;
    }
    if (cursor < t_end) {
        carrier.t_begin_s = cursor;
        carrier.t_end_s = t_end;
        append_segment(carrier);
    }
}

std::vector<WaveSegment> KnobSession::step(const TouchSample& sample) {
    const double dx = sample.index_x_mm - sample.thumb_x_mm;
    const double dy = sample.index_y_mm - sample.thumb_y_mm;
    if (std::hypot(dx, dy) < 1e-9)
        throw GeometryError("thumb and index contacts coincide; rotation angle undefined");
    const double raw_deg = std::atan2(dy, dx) * 180.0 / std::numbers::pi;

    if (!primed_) {
        primed_ = true;
        last_t_s_ = sample.t_s;
        last_raw_deg_ = raw_deg;
        angle_unwrapped_deg_ = raw_deg;
        sector_ = static_cast<long long>(std::floor(raw_deg / spec_.sector_size_deg()));
        return {};
    }
    if (!(sample.t_s > last_t_s_))
        throw StreamError("touch samples must have strictly increasing timestamps");

    double delta = raw_deg - last_raw_deg_;
    delta -= 360.0 * std::round(delta / 360.0);
    const double dt = sample.t_s - last_t_s_;
    angle_unwrapped_deg_ += delta;

    velocity_window_.push_back(delta / dt);
    if (velocity_window_.size() > static_cast<std::size_t>(tuning_.velocity_filter_taps))
        velocity_window_.erase(velocity_window_.begin());
    double sum = 0.0;
    for (double v : velocity_window_) sum += v;
    velocity_filtered_deg_s_ = sum / static_cast<double>(velocity_window_.size());

    // Schmitt-style crossing detection: a fresh boundary registers the
    // moment it is reached; immediately re-crossing the same boundary needs
    // the hysteresis margin.
    const double s = spec_.sector_size_deg();
    const double h = tuning_.hysteresis_deg;
    while (angle_unwrapped_deg_ >= static_cast<double>(sector_ + 1) * s + up_guard_deg_) {
        ++sector_;
        crossings_.push_back({sample.t_s, sector_, +1});
        up_guard_deg_ = 0.0;
        down_guard_deg_ = h;
        if (condition_ != KnobCondition::Virtual)
            pulse_until_s_ = std::max(pulse_until_s_, sample.t_s + tuning_.detent_duration_s);
    }
    while (angle_unwrapped_deg_ <= static_cast<double>(sector_) * s - down_guard_deg_) {
        crossings_.push_back({sample.t_s, sector_, -1});
        --sector_;
        down_guard_deg_ = 0.0;
        up_guard_deg_ = h;
        if (condition_ != KnobCondition::Virtual)
            pulse_until_s_ = std::max(pulse_until_s_, sample.t_s + tuning_.detent_duration_s);
    }

    emit(last_t_s_, sample.t_s);
    last_t_s_ = sample.t_s;
    last_raw_deg_ = raw_deg;

    std::vector<WaveSegment> fresh(segments_.begin() + static_cast<std::ptrdiff_t>(emitted_),
                                   segments_.end());
    emitted_ = segments_.size();
    return fresh;
}

std::vector<WaveSegment> KnobSession::finish() {
    if (primed_ && pulse_until_s_ > last_t_s_) {
        emit(last_t_s_, pulse_until_s_);
        last_t_s_ = pulse_until_s_;
    }
    std::vector<WaveSegment> fresh(segments_.begin() + static_cast<std::ptrdiff_t>(emitted_),
                                   segments_.end());
    emitted_ = segments_.size();
    return fresh;
}

ScenarioResult run_knob_scenario(const KnobSpec& spec, KnobCondition condition,
                                 const std::vector<TouchSample>& trajectory,
                                 long long start_sector, long long target_sector,
                                 const KnobTuning& tuning, double waveform_sample_rate_hz) {
    if (trajectory.size() < 2)
        throw StreamError("scenario trajectory needs at least two samples");

    KnobSession session(spec, condition, tuning);
    session.step(trajectory.front());
    // Targets are counted relative to the starting sector, so trajectories
    // with arbitrary angle origins score consistently.
    const long long target_abs = session.sector_unwrapped() + (target_sector - start_sector);

    const double t0 = trajectory.front().t_s;
    bool in_target = session.sector_unwrapped() == target_abs;
    bool missed = false;
    double first_exit_s = 0.0;
    double last_entry_s = in_target ? t0 : 0.0;
    ScenarioMetrics metrics;

    for (std::size_t i = 1; i < trajectory.size(); ++i) {
        session.step(trajectory[i]);
        const bool now = session.sector_unwrapped() == target_abs;
        if (now && !in_target) last_entry_s = trajectory[i].t_s;
        if (!now && in_target) {
            if (!missed) {
                missed = true;
                first_exit_s = trajectory[i].t_s;
            }
            ++metrics.overshoot_count;
        }
        in_target = now;
    }
    session.finish();

    metrics.reached = in_target;
    if (in_target) {
        metrics.completion_time_s = last_entry_s - t0;
        metrics.recovery_time_s = missed ? last_entry_s - first_exit_s : 0.0;
    } else {
        metrics.completion_time_s = trajectory.back().t_s - t0;
        metrics.recovery_time_s = 0.0;
        throw ScenarioTimeout("trajectory ended in sector " +
                                  std::to_string(session.sector_unwrapped()) +
                                  " without settling on target " + std::to_string(target_abs),
                              metrics);
    }

    ScenarioResult result;
    result.metrics = metrics;
    result.crossings = session.crossings();
    result.segments = session.segments();
    result.wave = render_segments(result.segments, waveform_sample_rate_hz);
    return result;
}

namespace {

TouchSample sample_at(const KnobSpec& spec, double t, double angle_deg) {
    const double rad = angle_deg * std::numbers::pi / 180.0;
    TouchSample s;
    s.t_s = t;
    s.thumb_x_mm = spec.center_x_mm;
    s.thumb_y_mm = spec.center_y_mm;
    s.index_x_mm = spec.center_x_mm + spec.radius_mm * std::cos(rad);
    s.index_y_mm = spec.center_y_mm + spec.radius_mm * std::sin(rad);
    return s;
}

} // namespace

std::vector<TouchSample> make_sweep_trajectory(const KnobSpec& spec, double start_angle_deg,
                                               double sweep_deg, double speed_deg_s,
                                               double sample_rate_hz) {
    if (!(speed_deg_s > 0.0) || !(sample_rate_hz > 0.0))
        throw ConfigError("sweep speed and sample rate must be positive");
    const double duration = std::abs(sweep_deg) / speed_deg_s;
    const double sign = sweep_deg >= 0.0 ? 1.0 : -1.0;
    const long long n = static_cast<long long>(std::floor(duration * sample_rate_hz));
    std::vector<TouchSample> samples;
    samples.reserve(static_cast<std::size_t>(n) + 2);
    for (long long k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) / sample_rate_hz;
        samples.push_back(sample_at(spec, t, start_angle_deg + sign * speed_deg_s * t));
    }
    if (samples.back().t_s < duration)
        samples.push_back(sample_at(spec, duration, start_angle_deg + sweep_deg));
    return samples;
}

std::vector<TouchSample> make_overshoot_trajectory(const KnobSpec& spec, double start_angle_deg,
                                                   double sweep_deg, double overshoot_deg,
                                                   double speed_deg_s, double sample_rate_hz) {
    if (!(overshoot_deg > 0.0)) throw ConfigError("overshoot must be positive");
    std::vector<TouchSample> out =
        make_sweep_trajectory(spec, start_angle_deg, sweep_deg + overshoot_deg, speed_deg_s,
                              sample_rate_hz);
    const double t_turn = out.back().t_s;
    const std::vector<TouchSample> back = make_sweep_trajectory(
        spec, start_angle_deg + sweep_deg + overshoot_deg, -overshoot_deg, speed_deg_s,
        sample_rate_hz);
    for (std::size_t i = 1; i < back.size(); ++i) {
        TouchSample s = back[i];
        s.t_s += t_turn;
        out.push_back(s);
    }
    return out;
}

waveform::Waveform render_segments(const std::vector<WaveSegment>& segments,
                                   double sample_rate_hz) {
    waveform::Waveform wave;
    wave.sample_rate_hz = sample_rate_hz;
    if (segments.empty()) return wave;

    const double t0 = segments.front().t_begin_s;
    const double t1 = segments.back().t_end_s;
    const Eigen::Index n = static_cast<Eigen::Index>(std::llround((t1 - t0) * sample_rate_hz));
    wave.piezo_vp.setZero(n);
    wave.electro_vp.setZero(n);

    std::size_t seg = 0;
    double phase = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double t = t0 + static_cast<double>(k) / sample_rate_hz;
        while (seg + 1 < segments.size() && t >= segments[seg].t_end_s) ++seg;
        const WaveSegment& s = segments[seg];
        if (t < s.t_begin_s || t >= s.t_end_s) continue; // gap between segments
        switch (s.shape) {
            case SegmentShape::Silence:
                break;
            case SegmentShape::Square:
                wave.electro_vp[k] = s.amplitude_vp;
                break;
            case SegmentShape::Sine:
                wave.electro_vp[k] = s.amplitude_vp * std::sin(phase);
                phase += 2.0 * std::numbers::pi * s.freq_hz / sample_rate_hz;
                break;
        }
    }
    return wave;
}

std::vector<TouchSample> load_trajectory(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open trajectory file '" + path + "'");
    std::vector<TouchSample> samples;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (line_no == 1 && line.find("t_s") != std::string::npos) continue; // header
        std::istringstream s(line);
        TouchSample sample;
        char comma;
        s >> sample.t_s >> comma >> sample.thumb_x_mm >> comma >> sample.thumb_y_mm >> comma >>
            sample.index_x_mm >> comma >> sample.index_y_mm;
        if (s.fail())
            throw ParseError("trajectory file '" + path + "' line " + std::to_string(line_no) +
                             ": expected 't,thumb_x,thumb_y,index_x,index_y'");
        samples.push_back(sample);
    }
    if (samples.empty()) throw ParseError("trajectory file '" + path + "' holds no samples");
    return samples;
}

void save_trajectory(const std::vector<TouchSample>& samples, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    out << "t_s,thumb_x_mm,thumb_y_mm,index_x_mm,index_y_mm\n";
    char line[192];
    for (const TouchSample& s : samples) {
        std::snprintf(line, sizeof line, "%.9g,%.9g,%.9g,%.9g,%.9g\n", s.t_s, s.thumb_x_mm,
                      s.thumb_y_mm, s.index_x_mm, s.index_y_mm);
        out << line;
    }
    if (!out) throw ParseError("write to '" + path + "' failed");
}

ScenarioSpec load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("scenario file '" + path + "': " + e.what());
    }
    ScenarioSpec spec;
    try {
        spec.knob.sector_count = j.value("sectors", spec.knob.sector_count);
        spec.knob.radius_mm = j.value("radius_mm", spec.knob.radius_mm);
        if (j.contains("condition"))
            spec.condition = condition_from_string(j.at("condition").get<std::string>());
        spec.distance_deg = j.value("distance_deg", spec.distance_deg);
        spec.speed_deg_s = j.value("speed_deg_s", spec.speed_deg_s);
        spec.sample_rate_hz = j.value("sample_rate_hz", spec.sample_rate_hz);
        spec.knob.menu_length =
            static_cast<int>(std::lround(spec.distance_deg / spec.knob.sector_size_deg()));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("scenario file '" + path + "': " + e.what());
    }
    spec.knob.validate();
    return spec;
}

} // namespace hapsurf::electro
