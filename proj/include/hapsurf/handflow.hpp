#pragma once

#include "hapsurf/flowlut.hpp"
#include "hapsurf/vibmap.hpp"
#include "hapsurf/waveform.hpp"

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace hapsurf::handflow {

enum class FlowDirection { LeftToRight, RightToLeft, TopToBottom, BottomToTop };

std::string to_string(FlowDirection d);
FlowDirection direction_from_string(const std::string& name);

/// Square area assumed to lie under a resting hand, split into 3x3 squares
/// of 15x15 subgrid points each (45x45 = 2025 points, cell-centered).
struct HandRegion {
    double center_x_mm = 0.0;
    double center_y_mm = 0.0;
    double side_mm = 120.0;

    static constexpr int kSquaresPerSide = 3;
    static constexpr int kPointsPerSquareSide = 15;
    static constexpr int kSubgridSide = kSquaresPerSide * kPointsPerSquareSide;

    double subgrid_x_mm(int col) const {
        return center_x_mm - side_mm / 2.0 + (col + 0.5) * side_mm / kSubgridSide;
    }
    double subgrid_y_mm(int row) const {
        return center_y_mm - side_mm / 2.0 + (row + 0.5) * side_mm / kSubgridSide;
    }

    void validate(const vibmap::VibrationMap& map) const; // throws GeometryError
};

/// Activity evaluation of one (actuator, frequency, drive) excitation over
/// the region. A square is active when at least 113 of its 225 subgrid
/// points sit at or above 3 JND over the detection threshold.
struct SquareActivity {
    Eigen::MatrixXd levels_db; // 45x45 sensation levels, row-major geometry
    std::array<int, 9> pass_counts{};
    std::array<bool, 9> active{};

    bool at(int col, int row) const { return active[static_cast<std::size_t>(row) * 3 + col]; }
    int count(int col, int row) const {
        return pass_counts[static_cast<std::size_t>(row) * 3 + col];
    }
    bool operator==(const SquareActivity& other) const {
        return pass_counts == other.pass_counts && active == other.active;
    }
};

inline constexpr int kActiveSquareQuorum = 113; // ceil(225 / 2)

SquareActivity square_activity(const vibmap::VibrationMap& map,
                               const flowlut::SensitivityCurve& sens, const HandRegion& region,
                               vibmap::Actuator actuator, double freq_hz, double drive_vp);

struct HandFlowPart {
    vibmap::Actuator actuator = vibmap::Actuator::PA;
    double freq_hz = 0.0;
    double drive_vp = 0.0;
    SquareActivity activity;
};

struct HandFlowPlan {
    FlowDirection direction = FlowDirection::LeftToRight;
    HandRegion region;
    std::array<HandFlowPart, 2> parts;
};

struct CandidateSet {
    std::vector<double> freqs_hz;                // searched in the given (ascending) order
    std::vector<vibmap::Actuator> actuators{vibmap::kAllActuators.begin(),
                                            vibmap::kAllActuators.end()};

    /// Every axis bin inside [lo, hi] Hz.
    static CandidateSet from_axis(const vibmap::FreqAxis& axis, double lo_hz = 20.0,
                                  double hi_hz = 625.0);
};

/// Part-level feasibility rules for a directional flow:
///   (i)  at least one source-line square is active,
///   (ii) no destination-line square is active,
///   (iii) the activity map mirrors across the axis through the region
///         center parallel to the flow.
/// Part 2 swaps source and destination. Returns which rules hold.
struct RuleCheck {
    bool source_active = false;
    bool destination_silent = false;
    bool symmetric = false;
    bool ok() const { return source_active && destination_silent && symmetric; }
};
RuleCheck check_part_rules(const SquareActivity& activity, FlowDirection direction,
                           int part_index);

/// First feasible (actuator, frequency) per part, searching frequencies in
/// ascending order and actuators PA..PALL within each frequency. Throws
/// PlanningError naming the best near-misses when no candidate works.
HandFlowPlan plan_hand_flow(const vibmap::VibrationMap& map,
                            const flowlut::SensitivityCurve& sens, const HandRegion& region,
                            FlowDirection direction, const CandidateSet& candidates,
                            double drive_vp);

/// Two back-to-back ramped tones, one per part, on the piezo channel.
waveform::Waveform render_hand_flow(const HandFlowPlan& plan, const flowlut::FlowTimings& timings,
                                    double sample_rate_hz = 44100.0);

void save_plan_json(const HandFlowPlan& plan, const std::string& path);

/// 45x45 grid of sensation levels for one part, clamped at -120 dB so the
/// file stays plottable.
void write_levels_csv(const HandFlowPart& part, const std::string& path);

} // namespace hapsurf::handflow
