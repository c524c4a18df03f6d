#include "hapsurf/handflow.hpp"

#include "hapsurf/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace hapsurf::handflow {

using vibmap::Actuator;
using vibmap::VibrationMap;

std::string to_string(FlowDirection d) {
    switch (d) {
        case FlowDirection::LeftToRight: return "LR";
        case FlowDirection::RightToLeft: return "RL";
        case FlowDirection::TopToBottom: return "UD";
        case FlowDirection::BottomToTop: return "DU";
    }
    throw ConfigError("unknown flow direction enum value");
}

FlowDirection direction_from_string(const std::string& name) {
    if (name == "LR") return FlowDirection::LeftToRight;
    if (name == "RL") return FlowDirection::RightToLeft;
    if (name == "UD") return FlowDirection::TopToBottom;
    if (name == "DU") return FlowDirection::BottomToTop;
    throw ParseError("unknown flow direction '" + name + "' (expected LR, RL, UD, or DU)");
}

void HandRegion::validate(const VibrationMap& map) const {
    if (!(side_mm > 0.0)) throw ConfigError("hand region side must be positive");
    const double half = side_mm / 2.0;
    if (!map.inside_grid(center_x_mm - half, center_y_mm - half) ||
        !map.inside_grid(center_x_mm + half, center_y_mm + half))
        throw GeometryError("hand region extends outside the instrumented grid");
}

namespace {

// Precomputed corner rows and weights for all 45x45 subgrid points of a
// region, so candidate sweeps touch a single frequency bin per point.
struct RegionSampler {
    const VibrationMap* map = nullptr;
    struct Point {
        int corner_row[4]; // rows into map.data() for one actuator stride
        double weight[4];
    };
    std::vector<Point> points; // 45*45, row-major over (row, col)

    RegionSampler(const VibrationMap& m, const HandRegion& region) : map(&m) {
        const vibmap::GridSpec& g = m.grid();
        points.resize(HandRegion::kSubgridSide * HandRegion::kSubgridSide);
        for (int row = 0; row < HandRegion::kSubgridSide; ++row) {
            for (int col = 0; col < HandRegion::kSubgridSide; ++col) {
                const double x = region.subgrid_x_mm(col);
                const double y = region.subgrid_y_mm(row);
                const double fx = (x - g.origin_x_mm) / g.spacing_mm;
                const double fy = (y - g.origin_y_mm) / g.spacing_mm;
                int c0 = static_cast<int>(std::floor(fx));
                int r0 = static_cast<int>(std::floor(fy));
                c0 = std::min(std::max(c0, 0), std::max(g.cols - 2, 0));
                r0 = std::min(std::max(r0, 0), std::max(g.rows - 2, 0));
                const double tx = g.cols > 1 ? fx - c0 : 0.0;
                const double ty = g.rows > 1 ? fy - r0 : 0.0;
                const int c1 = std::min(c0 + 1, g.cols - 1);
                const int r1 = std::min(r0 + 1, g.rows - 1);

                Point p;
                const auto base = [&](int rr, int cc) {
                    return (rr * g.cols + cc) * vibmap::kActuatorCount;
                };
                p.corner_row[0] = base(r0, c0);
                p.corner_row[1] = base(r0, c1);
                p.corner_row[2] = base(r1, c0);
                p.corner_row[3] = base(r1, c1);
                p.weight[0] = (1.0 - tx) * (1.0 - ty);
                p.weight[1] = tx * (1.0 - ty);
                p.weight[2] = (1.0 - tx) * ty;
                p.weight[3] = tx * ty;
                points[static_cast<std::size_t>(row) * HandRegion::kSubgridSide + col] = p;
            }
        }
    }

    // Matches vibmap::interpolate_frf bin-for-bin, including the corner
    // envelope clamp.
    double magnitude(int point, Actuator actuator, int bin) const {
        const Point& p = points[point];
        const int a = static_cast<int>(actuator);
        const auto& data = map->data();
        const double c00 = data(p.corner_row[0] + a, bin);
        const double c10 = data(p.corner_row[1] + a, bin);
        const double c01 = data(p.corner_row[2] + a, bin);
        const double c11 = data(p.corner_row[3] + a, bin);
        const double blended =
            p.weight[0] * c00 + p.weight[1] * c10 + p.weight[2] * c01 + p.weight[3] * c11;
        const double lo = std::min(std::min(std::min(c00, c10), c01), c11);
        const double hi = std::max(std::max(std::max(c00, c10), c01), c11);
        return std::min(std::max(blended, lo), hi);
    }
};

int bin_for(const vibmap::FreqAxis& axis, double freq_hz) {
    const int bin = static_cast<int>(std::lround((freq_hz - axis.start_hz) / axis.step_hz));
    if (bin < 0 || bin >= axis.count ||
        std::abs(axis.frequency(bin) - freq_hz) > 1e-9 * std::max(1.0, std::abs(freq_hz)))
        throw ConfigError("frequency " + std::to_string(freq_hz) + " Hz is not an axis bin");
    return bin;
}

SquareActivity evaluate(const RegionSampler& sampler, const flowlut::SensitivityCurve& sens,
                        Actuator actuator, double freq_hz, double drive_vp) {
    const int bin = bin_for(sampler.map->axis(), freq_hz);
    const double gate_um =
        sens.threshold_um(freq_hz) * std::pow(10.0, 3.0 * sens.jnd_db / 20.0);

    SquareActivity result;
    result.levels_db.resize(HandRegion::kSubgridSide, HandRegion::kSubgridSide);
    for (int row = 0; row < HandRegion::kSubgridSide; ++row) {
        for (int col = 0; col < HandRegion::kSubgridSide; ++col) {
            const int point = row * HandRegion::kSubgridSide + col;
            const double amp_um = drive_vp * sampler.magnitude(point, actuator, bin);
            result.levels_db(row, col) = sens.sensation_level_db(amp_um, freq_hz);
            if (amp_um >= gate_um) {
                const int si = col / HandRegion::kPointsPerSquareSide;
                const int sj = row / HandRegion::kPointsPerSquareSide;
                ++result.pass_counts[static_cast<std::size_t>(sj) * 3 + si];
            }
        }
    }
    for (int s = 0; s < 9; ++s) result.active[s] = result.pass_counts[s] >= kActiveSquareQuorum;
    return result;
}

} // namespace

SquareActivity square_activity(const VibrationMap& map, const flowlut::SensitivityCurve& sens,
                               const HandRegion& region, Actuator actuator, double freq_hz,
                               double drive_vp) {
    sens.validate();
    region.validate(map);
    if (drive_vp < 0.0) throw ConfigError("drive voltage must be non-negative");
    RegionSampler sampler(map, region);
    return evaluate(sampler, sens, actuator, freq_hz, drive_vp);
}

CandidateSet CandidateSet::from_axis(const vibmap::FreqAxis& axis, double lo_hz, double hi_hz) {
    CandidateSet set;
    for (int bin = 0; bin < axis.count; ++bin) {
        const double f = axis.frequency(bin);
        if (f >= lo_hz && f <= hi_hz) set.freqs_hz.push_back(f);
    }
    return set;
}

RuleCheck check_part_rules(const SquareActivity& activity, FlowDirection direction,
                           int part_index) {
    const bool horizontal = direction == FlowDirection::LeftToRight ||
                            direction == FlowDirection::RightToLeft;
    // Source line for part 1; part 2 swaps source and destination.
    int source_line;
    switch (direction) {
        case FlowDirection::LeftToRight: source_line = 0; break;
        case FlowDirection::RightToLeft: source_line = 2; break;
        case FlowDirection::TopToBottom: source_line = 0; break;
        case FlowDirection::BottomToTop: source_line = 2; break;
        default: throw ConfigError("unknown flow direction enum value");
    }
    if (part_index == 1) source_line = 2 - source_line;
    const int dest_line = 2 - source_line;

    RuleCheck check;
    check.source_active = false;
    check.destination_silent = true;
    check.symmetric = true;
    for (int k = 0; k < 3; ++k) {
        const bool src = horizontal ? activity.at(source_line, k) : activity.at(k, source_line);
        const bool dst = horizontal ? activity.at(dest_line, k) : activity.at(k, dest_line);
        check.source_active = check.source_active || src;
        check.destination_silent = check.destination_silent && !dst;
    }
    for (int k = 0; k < 3; ++k) {
        // Mirror across the axis through the center parallel to the flow:
        // rows swap for horizontal flow, columns for vertical flow.
        const bool first = horizontal ? activity.at(k, 0) : activity.at(0, k);
        const bool last = horizontal ? activity.at(k, 2) : activity.at(2, k);
        if (first != last) check.symmetric = false;
    }
    return check;
}

namespace {

std::string describe_check(const RuleCheck& check) {
    std::string out;
    out += check.source_active ? "source line active" : "source line silent";
    out += check.destination_silent ? ", destination line silent" : ", destination line active";
    out += check.symmetric ? ", symmetric" : ", asymmetric";
    return out;
}

} // namespace

HandFlowPlan plan_hand_flow(const VibrationMap& map, const flowlut::SensitivityCurve& sens,
                            const HandRegion& region, FlowDirection direction,
                            const CandidateSet& candidates, double drive_vp) {
    sens.validate();
    region.validate(map);
    if (!(drive_vp > 0.0)) throw ConfigError("drive voltage must be positive");
    if (candidates.freqs_hz.empty() || candidates.actuators.empty())
        throw ConfigError("candidate set must offer at least one frequency and actuator");

    RegionSampler sampler(map, region);

    HandFlowPlan plan;
    plan.direction = direction;
    plan.region = region;

    for (int part = 0; part < 2; ++part) {
        bool found = false;
        int best_score = -1;
        std::string best_note;
        for (double freq : candidates.freqs_hz) {
            for (Actuator actuator : candidates.actuators) {
                SquareActivity activity = evaluate(sampler, sens, actuator, freq, drive_vp);
                const RuleCheck check = check_part_rules(activity, direction, part);
                if (check.ok()) {
                    plan.parts[part] = {actuator, freq, drive_vp, std::move(activity)};
                    found = true;
                    break;
                }
                const int score = static_cast<int>(check.source_active) +
                                  static_cast<int>(check.destination_silent) +
                                  static_cast<int>(check.symmetric);
                if (score > best_score) {
                    best_score = score;
                    best_note = std::to_string(freq) + " Hz on " + vibmap::to_string(actuator) +
                                " (" + describe_check(check) + ")";
                }
            }
            if (found) break;
        }
        if (!found)
            throw PlanningError("no feasible excitation for part " + std::to_string(part + 1) +
                                " of the " + to_string(direction) +
                                " flow; closest candidate: " + best_note);
    }
    return plan;
}

waveform::Waveform render_hand_flow(const HandFlowPlan& plan, const flowlut::FlowTimings& timings,
                                    double sample_rate_hz) {
    flowlut::FlowStimulus stimulus;
    for (int i = 0; i < 2; ++i) {
        stimulus.parts[i].actuator = plan.parts[i].actuator;
        stimulus.parts[i].freq_hz = plan.parts[i].freq_hz;
        stimulus.parts[i].amplitude_vp = plan.parts[i].drive_vp;
        stimulus.parts[i].duration_s = timings.part_duration_s;
        stimulus.parts[i].ramp_s = timings.ramp_s;
        stimulus.parts[i].channel = 0;
    }
    stimulus.drive_vp = plan.parts[0].drive_vp;
    return flowlut::render_stimulus(stimulus, sample_rate_hz);
}

void save_plan_json(const HandFlowPlan& plan, const std::string& path) {
    nlohmann::json j;
    j["direction"] = to_string(plan.direction);
    j["region"] = {{"center_mm", {plan.region.center_x_mm, plan.region.center_y_mm}},
                   {"side_mm", plan.region.side_mm}};
    for (const HandFlowPart& part : plan.parts) {
        nlohmann::json pj;
        pj["actuator"] = vibmap::to_string(part.actuator);
        pj["freq_hz"] = part.freq_hz;
        pj["drive_vp"] = part.drive_vp;
        for (int row = 0; row < 3; ++row) {
            nlohmann::json active_row = nlohmann::json::array();
            nlohmann::json count_row = nlohmann::json::array();
            for (int col = 0; col < 3; ++col) {
                active_row.push_back(part.activity.at(col, row));
                count_row.push_back(part.activity.count(col, row));
            }
            pj["activity"].push_back(active_row);
            pj["pass_counts"].push_back(count_row);
        }
        j["parts"].push_back(pj);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
    if (!out) throw ParseError("write to '" + path + "' failed");
}

void write_levels_csv(const HandFlowPart& part, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    out << "# sensation level dB re threshold, 45x45 subgrid, row per line\n";
    char cell[32];
    for (int row = 0; row < HandRegion::kSubgridSide; ++row) {
        for (int col = 0; col < HandRegion::kSubgridSide; ++col) {
            const double level = std::max(part.activity.levels_db(row, col), -120.0);
            std::snprintf(cell, sizeof cell, col == 0 ? "%.6g" : ",%.6g", level);
            out << cell;
        }
        out << "\n";
    }
    if (!out) throw ParseError("write to '" + path + "' failed");
}

} // namespace hapsurf::handflow
