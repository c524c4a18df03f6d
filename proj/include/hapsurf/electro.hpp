#pragma once

#include "hapsurf/waveform.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hapsurf::electro {

/// Capacitive stack between fingertip and screen: insulator over the
/// conductive layer plus the outer skin layer, in series.
struct ElectroParams {
    double eps0_f_per_m = 8.854e-12;
    double eps_insulator = 3.0;
    double eps_skin = 1000.0;
    double thickness_insulator_m = 1e-6;
    double thickness_skin_m = 2e-4;
    double contact_area_m2 = 1e-4;
    double friction_coefficient = 0.5;
    double normal_force_n = 0.5;

    void validate() const; // throws ConfigError
};

/// Attraction force in newtons for an applied voltage:
///   f_e = eps0 * v^2 * A / (2 * (t_i + t_s) * (t_i/eps_i + t_s/eps_s)).
double electrostatic_force(const ElectroParams& params, double volts);

/// Tangential friction while sliding: mu * (F_N + f_e). A stationary finger
/// feels no tangential component, so the function returns zero then.
double friction_force(const ElectroParams& params, double volts, bool sliding);

enum class KnobCondition { Virtual, Detent, DetentConstantFriction, DetentVelocityFriction };

std::string to_string(KnobCondition c);
KnobCondition condition_from_string(const std::string& name); // "V", "HD", "HD+CF", "HD+VF"

struct KnobSpec {
    int sector_count = 8;
    double center_x_mm = 0.0;
    double center_y_mm = 0.0;
    double radius_mm = 60.0;
    int menu_length = 8; // one item per sector spanned

    double sector_size_deg() const { return 360.0 / sector_count; }
    void validate() const;
};

/// Rendering constants for the four sensory conditions. Carrier levels are
/// given peak-to-peak; detent pulses as peak volts.
struct KnobTuning {
    double detent_amplitude_vp = 100.0;
    double detent_duration_s = 0.020;
    double carrier_amplitude_vpp = 100.0;
    double constant_friction_freq_hz = 180.0;
    double velocity_freq_min_hz = 60.0;
    double velocity_freq_max_hz = 180.0;
    double velocity_full_scale_deg_s = 360.0;
    double hysteresis_deg = 2.0;
    int velocity_filter_taps = 5;
};

struct TouchSample {
    double t_s = 0.0;
    double thumb_x_mm = 0.0;
    double thumb_y_mm = 0.0;
    double index_x_mm = 0.0;
    double index_y_mm = 0.0;
};

enum class SegmentShape { Silence, Sine, Square };

/// Contiguous description of the electrostatic channel over a time span.
struct WaveSegment {
    double t_begin_s = 0.0;
    double t_end_s = 0.0;
    SegmentShape shape = SegmentShape::Silence;
    double amplitude_vp = 0.0;
    double freq_hz = 0.0;
};

struct SectorCrossing {
    double t_s = 0.0;
    long long boundary = 0; // unwrapped boundary number (boundary k sits at k * sector size)
    int direction = 0;      // +1 counter-clockwise, -1 clockwise
};

/// Streaming knob state: feeds on two-finger touch samples, tracks the
/// unwrapped rotation angle of the index finger about the thumb, detects
/// sector crossings with hysteresis, and emits the voltage segments of the
/// active sensory condition. Single writer; samples must be time-ordered.
class KnobSession {
public:
    KnobSession(KnobSpec spec, KnobCondition condition, KnobTuning tuning = {});

    /// Consume one sample; returns the segments covering the elapsed
    /// interval. The first sample only initializes the state.
    std::vector<WaveSegment> step(const TouchSample& sample);

    /// Emit any pending detent tail after the last sample.
    std::vector<WaveSegment> finish();

    double angle_deg() const { return angle_unwrapped_deg_; }
    double velocity_deg_s() const { return velocity_filtered_deg_s_; }
    long long sector_unwrapped() const { return sector_; }
    int sector_index() const; // 0..sector_count-1
    const KnobSpec& spec() const { return spec_; }
    KnobCondition condition() const { return condition_; }
    const std::vector<SectorCrossing>& crossings() const { return crossings_; }
    const std::vector<WaveSegment>& segments() const { return segments_; }

private:
    double instantaneous_freq_hz() const;
    void emit(double t_begin, double t_end);
    void append_segment(const WaveSegment& segment);

    KnobSpec spec_;
    KnobCondition condition_;
    KnobTuning tuning_;

    bool primed_ = false;
    double last_t_s_ = 0.0;
    double last_raw_deg_ = 0.0;
    double angle_unwrapped_deg_ = 0.0;
    double velocity_filtered_deg_s_ = 0.0;
    std::vector<double> velocity_window_;
    long long sector_ = 0;
    double up_guard_deg_ = 0.0;
    double down_guard_deg_ = 0.0;
    double pulse_until_s_ = -1.0;
    std::vector<SectorCrossing> crossings_;
    std::vector<WaveSegment> segments_;
    std::size_t emitted_ = 0; // segments already returned from step()
};

struct ScenarioMetrics {
    double completion_time_s = 0.0; // start to the final arrival in the target sector
    int overshoot_count = 0;        // departures from the target sector
    double recovery_time_s = 0.0;   // first departure to final arrival
    bool reached = false;
};

/// Thrown when the trajectory never settles on the target sector; carries
/// whatever metrics were measurable.
class ScenarioTimeout : public std::runtime_error {
public:
    ScenarioTimeout(const std::string& what, ScenarioMetrics partial)
        : std::runtime_error(what), partial_metrics(partial) {}
    ScenarioMetrics partial_metrics;
};

struct ScenarioResult {
    ScenarioMetrics metrics;
    std::vector<SectorCrossing> crossings;
    std::vector<WaveSegment> segments;
    waveform::Waveform wave;
};

/// Replays a trajectory through a session and scores it against the target
/// sector (counted in unwrapped sectors from the start).
ScenarioResult run_knob_scenario(const KnobSpec& spec, KnobCondition condition,
                                 const std::vector<TouchSample>& trajectory,
                                 long long start_sector, long long target_sector,
                                 const KnobTuning& tuning = {},
                                 double waveform_sample_rate_hz = 44100.0);

/// Constant-speed two-finger sweep: thumb pinned at the knob center, index
/// on the rim. Starts exactly on the lower boundary of the start sector so
/// crossing counts and timing have closed forms.
std::vector<TouchSample> make_sweep_trajectory(const KnobSpec& spec, double start_angle_deg,
                                               double sweep_deg, double speed_deg_s,
                                               double sample_rate_hz = 60.0);

/// Sweep that passes the target by `overshoot_deg` and returns to it.
std::vector<TouchSample> make_overshoot_trajectory(const KnobSpec& spec, double start_angle_deg,
                                                   double sweep_deg, double overshoot_deg,
                                                   double speed_deg_s,
                                                   double sample_rate_hz = 60.0);

/// Renders ordered, contiguous segments into the electrostatic channel with
/// a phase-continuous oscillator.
waveform::Waveform render_segments(const std::vector<WaveSegment>& segments,
                                   double sample_rate_hz = 44100.0);

/// Trajectory CSV: t_s,thumb_x_mm,thumb_y_mm,index_x_mm,index_y_mm.
std::vector<TouchSample> load_trajectory(const std::string& path);
void save_trajectory(const std::vector<TouchSample>& samples, const std::string& path);

/// Scenario preset JSON: condition, sectors, distance_deg, speed_deg_s.
struct ScenarioSpec {
    KnobSpec knob;
    KnobCondition condition = KnobCondition::Detent;
    double distance_deg = 270.0;
    double speed_deg_s = 90.0;
    double sample_rate_hz = 60.0;
};
ScenarioSpec load_scenario(const std::string& path);

} // namespace hapsurf::electro
