#pragma once

#include "hapsurf/vibmap.hpp"
#include "hapsurf/waveform.hpp"

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace hapsurf::flowlut {

/// Detection threshold versus frequency, piecewise linear in log-log space
/// and clamped outside the anchor range. The anchors are configuration, not
/// measured truth; jnd_db is the assumed just-noticeable step in dB.
struct SensitivityCurve {
    std::vector<std::pair<double, double>> anchors_hz_um{
        {10.0, 10.0}, {100.0, 0.6}, {250.0, 0.1}, {625.0, 0.5}};
    double jnd_db = 1.5;

    void validate() const;
    double threshold_um(double freq_hz) const;
    /// dB above the detection threshold; -inf for a zero amplitude.
    double sensation_level_db(double amplitude_um, double freq_hz) const;
};

SensitivityCurve load_sensitivity(const std::string& path);

/// Best excitation choice for one ordered (active, passive) point pair.
struct PairRecord {
    double max_diff_um_per_vp = 0.0;
    double freq_hz = 0.0;
    vibmap::Actuator actuator = vibmap::Actuator::PA;
    bool feasible = false;

    bool operator==(const PairRecord&) const = default;
};

struct BuildOptions {
    double drive_vp = 50.0;   // reference drive for the feasibility gate
    double margin_db = 0.0;   // extra headroom above the threshold
    bool parallel = true;
};

/// Argmax tables over every ordered pair of grid points: the displacement
/// difference, its frequency, and the excitation case that produces it.
class ExcitationLookup {
public:
    ExcitationLookup() = default;
    ExcitationLookup(vibmap::GridSpec grid, BuildOptions options);

    const vibmap::GridSpec& grid() const { return grid_; }
    const BuildOptions& options() const { return options_; }

    /// Ordered-pair access; active and passive must differ.
    const PairRecord& record(int active_index, int passive_index) const;
    void set_record(int active_index, int passive_index, const PairRecord& record);

private:
    vibmap::GridSpec grid_;
    BuildOptions options_;
    std::vector<PairRecord> records_; // N*N, diagonal unused
};

/// Exhaustive argmax over (actuator, bin) for each ordered pair. Ties break
/// toward the lowest frequency, then actuator order PA..PALL.
ExcitationLookup build_lookup(const vibmap::VibrationMap& map, const SensitivityCurve& sens,
                              const BuildOptions& options = {});

/// Same selection rule applied to two explicit curve sets (used for
/// off-grid points through bilinear interpolation).
PairRecord best_excitation(const std::array<Eigen::ArrayXd, vibmap::kActuatorCount>& active,
                           const std::array<Eigen::ArrayXd, vibmap::kActuatorCount>& passive,
                           const vibmap::FreqAxis& axis, const SensitivityCurve& sens,
                           const BuildOptions& options);

void save_lookup(const ExcitationLookup& lut, const std::string& path);
ExcitationLookup load_lookup(const std::string& path);

struct FlowTimings {
    double part_duration_s = 1.5;
    double ramp_s = 0.05;
};

struct StimulusPart {
    vibmap::Actuator actuator = vibmap::Actuator::PA;
    double freq_hz = 0.0;
    double amplitude_vp = 0.0;
    double duration_s = 1.5;
    double ramp_s = 0.05;
    int channel = 0; // output channel carrying this part
};

/// Two-part plan: part 1 localizes vibration at the source point, part 2 at
/// the destination, with amplitudes equalized to the same sensation level.
struct FlowStimulus {
    std::array<StimulusPart, 2> parts;
    std::array<PairRecord, 2> records; // forward then reverse pair
    double drive_vp = 0.0;
    double sensation_level_db = 0.0; // equalized level at the active points
};

struct PlanOptions {
    double max_drive_vp = 100.0;
};

/// Plans a source-to-destination flow between two surface points. Grid
/// points use the lookup directly; other points go through interpolated
/// curves with the lookup's build options. Throws PlanningError for
/// coincident points and for pairs with no discriminating excitation.
FlowStimulus plan_point_flow(const ExcitationLookup& lut, const vibmap::VibrationMap& map,
                             const SensitivityCurve& sens, double from_x_mm, double from_y_mm,
                             double to_x_mm, double to_y_mm, const FlowTimings& timings,
                             double drive_vp, const PlanOptions& plan_options = {});

/// Renders the plan as back-to-back ramped tones on the piezo channel with
/// relay routing recorded per part. Deterministic.
waveform::Waveform render_stimulus(const FlowStimulus& plan, double sample_rate_hz = 44100.0);

} // namespace hapsurf::flowlut
