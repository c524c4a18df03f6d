#include "hapsurf/flowlut.hpp"

#include "hapsurf/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>
#include <thread>

namespace hapsurf::flowlut {

using vibmap::Actuator;
using vibmap::FreqAxis;
using vibmap::GridSpec;
using vibmap::kActuatorCount;
using vibmap::VibrationMap;

void SensitivityCurve::validate() const {
    if (anchors_hz_um.size() < 2) throw ConfigError("sensitivity curve needs at least two anchors");
    for (std::size_t i = 0; i < anchors_hz_um.size(); ++i) {
        if (!(anchors_hz_um[i].first > 0.0) || !(anchors_hz_um[i].second > 0.0))
            throw ConfigError("sensitivity anchors must have positive frequency and threshold");
        if (i > 0 && !(anchors_hz_um[i].first > anchors_hz_um[i - 1].first))
            throw ConfigError("sensitivity anchors must be strictly ascending in frequency");
    }
    if (!(jnd_db > 0.0)) throw ConfigError("jnd_db must be positive");
}

double SensitivityCurve::threshold_um(double freq_hz) const {
    const auto& a = anchors_hz_um;
    if (freq_hz <= a.front().first) return a.front().second;
    if (freq_hz >= a.back().first) return a.back().second;
    for (std::size_t i = 1; i < a.size(); ++i) {
        if (freq_hz <= a[i].first) {
            const double lf0 = std::log(a[i - 1].first);
            const double lf1 = std::log(a[i].first);
            const double lt0 = std::log(a[i - 1].second);
            const double lt1 = std::log(a[i].second);
            const double t = (std::log(freq_hz) - lf0) / (lf1 - lf0);
            return std::exp(lt0 + t * (lt1 - lt0));
        }
    }
    return a.back().second;
}

double SensitivityCurve::sensation_level_db(double amplitude_um, double freq_hz) const {
    if (amplitude_um <= 0.0) return -std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(amplitude_um / threshold_um(freq_hz));
}

SensitivityCurve load_sensitivity(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open sensitivity file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("sensitivity file '" + path + "': " + e.what());
    }
    SensitivityCurve curve;
    try {
        if (j.contains("anchors_hz_um")) {
            curve.anchors_hz_um.clear();
            for (const auto& pair : j.at("anchors_hz_um"))
                curve.anchors_hz_um.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
        }
        curve.jnd_db = j.value("jnd_db", curve.jnd_db);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("sensitivity file '" + path + "': " + e.what());
    }
    curve.validate();
    return curve;
}

ExcitationLookup::ExcitationLookup(GridSpec grid, BuildOptions options)
    : grid_(grid), options_(options) {
    grid_.validate();
    records_.resize(static_cast<std::size_t>(grid_.point_count()) * grid_.point_count());
}

static std::size_t pair_slot(const GridSpec& grid, int active, int passive) {
    const int n = grid.point_count();
    if (active < 1 || active > n || passive < 1 || passive > n)
        throw GeometryError("pair index outside 1.." + std::to_string(n));
    if (active == passive)
        throw ConfigError("ordered pair requires two distinct grid points, got " +
                          std::to_string(active) + " twice");
    return static_cast<std::size_t>(active - 1) * n + (passive - 1);
}

const PairRecord& ExcitationLookup::record(int active_index, int passive_index) const {
    return records_[pair_slot(grid_, active_index, passive_index)];
}

void ExcitationLookup::set_record(int active_index, int passive_index, const PairRecord& record) {
    records_[pair_slot(grid_, active_index, passive_index)] = record;
}

namespace {

PairRecord scan_rows(const double* const* active_rows, const double* const* passive_rows,
                     const FreqAxis& axis, const SensitivityCurve& sens,
                     const BuildOptions& options) {
    int best_bin = 0;
    int best_act = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (int bin = 0; bin < axis.count; ++bin) {
        for (int a = 0; a < kActuatorCount; ++a) {
            const double diff = active_rows[a][bin] - passive_rows[a][bin];
            if (diff > best) {
                best = diff;
                best_bin = bin;
                best_act = a;
            }
        }
    }
    PairRecord record;
    record.max_diff_um_per_vp = best;
    record.freq_hz = axis.frequency(best_bin);
    record.actuator = static_cast<Actuator>(best_act);
    const double active_um = options.drive_vp * active_rows[best_act][best_bin];
    const double gate_um =
        sens.threshold_um(record.freq_hz) * std::pow(10.0, options.margin_db / 20.0);
    record.feasible = best > 0.0 && active_um >= gate_um;
    return record;
}

} // namespace

PairRecord best_excitation(const std::array<Eigen::ArrayXd, vibmap::kActuatorCount>& active,
                           const std::array<Eigen::ArrayXd, vibmap::kActuatorCount>& passive,
                           const FreqAxis& axis, const SensitivityCurve& sens,
                           const BuildOptions& options) {
    const double* act_rows[kActuatorCount];
    const double* pas_rows[kActuatorCount];
    for (int a = 0; a < kActuatorCount; ++a) {
        if (active[a].size() != axis.count || passive[a].size() != axis.count)
            throw ConfigError("curve length does not match the frequency axis");
        act_rows[a] = active[a].data();
        pas_rows[a] = passive[a].data();
    }
    return scan_rows(act_rows, pas_rows, axis, sens, options);
}

ExcitationLookup build_lookup(const VibrationMap& map, const SensitivityCurve& sens,
                              const BuildOptions& options) {
    sens.validate();
    const GridSpec& grid = map.grid();
    const int n = grid.point_count();
    ExcitationLookup lut(grid, options);

    const auto row_ptr = [&](int point, int act) {
        return map.data().row((point - 1) * kActuatorCount + act).data();
    };

    const auto fill_range = [&](int active_begin, int active_end) {
        const double* act_rows[kActuatorCount];
        const double* pas_rows[kActuatorCount];
        for (int active = active_begin; active < active_end; ++active) {
            for (int a = 0; a < kActuatorCount; ++a) act_rows[a] = row_ptr(active, a);
            for (int passive = 1; passive <= n; ++passive) {
                if (passive == active) continue;
                for (int a = 0; a < kActuatorCount; ++a) pas_rows[a] = row_ptr(passive, a);
                lut.set_record(active, passive,
                               scan_rows(act_rows, pas_rows, map.axis(), sens, options));
            }
        }
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (!options.parallel || hw == 1 || n < 8) {
        fill_range(1, n + 1);
        return lut;
    }

    // Per-pair work is pure, so any split yields the serial result.
    const int tasks = static_cast<int>(std::min<unsigned>(hw, 8));
    std::vector<std::future<void>> futures;
    const int chunk = (n + tasks - 1) / tasks;
    for (int t = 0; t < tasks; ++t) {
        const int begin = 1 + t * chunk;
        const int end = std::min(n + 1, begin + chunk);
        if (begin >= end) break;
        futures.push_back(std::async(std::launch::async, fill_range, begin, end));
    }
    for (auto& f : futures) f.get();
    return lut;
}

namespace {

void append_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

} // namespace

void save_lookup(const ExcitationLookup& lut, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    const GridSpec& g = lut.grid();
    const int n = g.point_count();

    std::string text;
    text += "exclut v1\n";
    text += "rows " + std::to_string(g.rows) + "\n";
    text += "cols " + std::to_string(g.cols) + "\n";
    text += "drive_vp ";
    append_double(text, lut.options().drive_vp);
    text += "\nmargin_db ";
    append_double(text, lut.options().margin_db);
    text += "\npairs " + std::to_string(static_cast<long long>(n) * (n - 1)) + "\n";
    for (int active = 1; active <= n; ++active) {
        for (int passive = 1; passive <= n; ++passive) {
            if (active == passive) continue;
            const PairRecord& r = lut.record(active, passive);
            text += "record " + std::to_string(active) + " " + std::to_string(passive) + " ";
            append_double(text, r.max_diff_um_per_vp);
            text += " ";
            append_double(text, r.freq_hz);
            text += " " + vibmap::to_string(r.actuator) + (r.feasible ? " 1\n" : " 0\n");
        }
    }
    out << text;
    if (!out) throw ParseError("write to '" + path + "' failed");
}

ExcitationLookup load_lookup(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open lookup file '" + path + "'");

    std::string line;
    auto next_line = [&](const char* what) {
        if (!std::getline(in, line))
            throw ParseError(std::string("lookup file truncated before ") + what);
        return std::istringstream(line);
    };
    {
        auto s = next_line("format line");
        std::string magic, version;
        s >> magic >> version;
        if (magic != "exclut" || version != "v1")
            throw ParseError("lookup file '" + path + "' has unknown format line '" + line + "'");
    }
    GridSpec grid;
    BuildOptions options;
    long long declared_pairs = 0;
    auto read_kv = [&](const char* key, auto& value) {
        auto s = next_line(key);
        std::string k;
        s >> k >> value;
        if (k != key || s.fail())
            throw ParseError(std::string("expected header '") + key + " ...', got '" + line + "'");
    };
    read_kv("rows", grid.rows);
    read_kv("cols", grid.cols);
    read_kv("drive_vp", options.drive_vp);
    read_kv("margin_db", options.margin_db);
    read_kv("pairs", declared_pairs);

    ExcitationLookup lut(grid, options);
    long long loaded = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream s(line);
        std::string tag, actuator_name;
        int active = 0, passive = 0, feasible = 0;
        PairRecord r;
        s >> tag >> active >> passive >> r.max_diff_um_per_vp >> r.freq_hz >> actuator_name >>
            feasible;
        if (tag != "record" || s.fail())
            throw ParseError("malformed lookup record '" + line + "'");
        r.actuator = vibmap::actuator_from_string(actuator_name);
        r.feasible = feasible != 0;
        lut.set_record(active, passive, r);
        ++loaded;
    }
    if (loaded != declared_pairs)
        throw ParseError("lookup file declares " + std::to_string(declared_pairs) +
                         " pairs but contains " + std::to_string(loaded));
    return lut;
}

namespace {

std::array<Eigen::ArrayXd, vibmap::kActuatorCount> curves_at(const VibrationMap& map, double x_mm,
                                                             double y_mm) {
    std::array<Eigen::ArrayXd, vibmap::kActuatorCount> curves;
    const int node = vibmap::point_index_at(map.grid(), x_mm, y_mm);
    for (int a = 0; a < kActuatorCount; ++a) {
        if (node > 0)
            curves[a] = map.curve(node, static_cast<Actuator>(a));
        else
            curves[a] = vibmap::interpolate_frf(map, x_mm, y_mm, static_cast<Actuator>(a));
    }
    return curves;
}

double magnitude_at(const VibrationMap& map,
                    const std::array<Eigen::ArrayXd, vibmap::kActuatorCount>& curves,
                    const PairRecord& record) {
    const int bin =
        static_cast<int>(std::lround((record.freq_hz - map.axis().start_hz) / map.axis().step_hz));
    return curves[static_cast<int>(record.actuator)][bin];
}

} // namespace

FlowStimulus plan_point_flow(const ExcitationLookup& lut, const VibrationMap& map,
                             const SensitivityCurve& sens, double from_x_mm, double from_y_mm,
                             double to_x_mm, double to_y_mm, const FlowTimings& timings,
                             double drive_vp, const PlanOptions& plan_options) {
    sens.validate();
    if (!(drive_vp > 0.0)) throw ConfigError("drive voltage must be positive");
    if (drive_vp > plan_options.max_drive_vp)
        throw ConfigError("drive voltage exceeds the configured maximum of " +
                          std::to_string(plan_options.max_drive_vp) + " Vp");
    if (from_x_mm == to_x_mm && from_y_mm == to_y_mm)
        throw PlanningError("flow is undefined for coincident source and destination points");
    if (!map.inside_grid(from_x_mm, from_y_mm) || !map.inside_grid(to_x_mm, to_y_mm))
        throw GeometryError("flow endpoints must lie inside the instrumented grid");

    const int from_node = vibmap::point_index_at(map.grid(), from_x_mm, from_y_mm);
    const int to_node = vibmap::point_index_at(map.grid(), to_x_mm, to_y_mm);

    const auto from_curves = curves_at(map, from_x_mm, from_y_mm);
    const auto to_curves = curves_at(map, to_x_mm, to_y_mm);

    std::array<PairRecord, 2> records;
    if (from_node > 0 && to_node > 0) {
        records[0] = lut.record(from_node, to_node);
        records[1] = lut.record(to_node, from_node);
    } else {
        records[0] = best_excitation(from_curves, to_curves, map.axis(), sens, lut.options());
        records[1] = best_excitation(to_curves, from_curves, map.axis(), sens, lut.options());
    }
    for (int i = 0; i < 2; ++i) {
        if (!records[i].feasible)
            throw PlanningError(std::string("no discriminating excitation for the ") +
                                (i == 0 ? "source" : "destination") +
                                " part: best difference " +
                                std::to_string(records[i].max_diff_um_per_vp) + " um/Vp at " +
                                std::to_string(records[i].freq_hz) + " Hz on " +
                                vibmap::to_string(records[i].actuator));
    }

    // Equalize: both parts present the same dB level above threshold at
    // their active points, pinned by the quieter of the two at full drive.
    const double level0 =
        sens.sensation_level_db(drive_vp * magnitude_at(map, from_curves, records[0]),
                                records[0].freq_hz);
    const double level1 =
        sens.sensation_level_db(drive_vp * magnitude_at(map, to_curves, records[1]),
                                records[1].freq_hz);
    const double target_db = std::min(level0, level1);

    FlowStimulus plan;
    plan.records = records;
    plan.drive_vp = drive_vp;
    plan.sensation_level_db = target_db;
    const std::array<double, 2> levels{level0, level1};
    for (int i = 0; i < 2; ++i) {
        StimulusPart& part = plan.parts[i];
        part.actuator = records[i].actuator;
        part.freq_hz = records[i].freq_hz;
        part.amplitude_vp = drive_vp * std::pow(10.0, (target_db - levels[i]) / 20.0);
        part.duration_s = timings.part_duration_s;
        part.ramp_s = timings.ramp_s;
        part.channel = 0;
    }
    return plan;
}

waveform::Waveform render_stimulus(const FlowStimulus& plan, double sample_rate_hz) {
    waveform::Waveform wave;
    wave.sample_rate_hz = sample_rate_hz;

    std::array<Eigen::ArrayXd, 2> tones;
    Eigen::Index total = 0;
    for (int i = 0; i < 2; ++i) {
        const StimulusPart& part = plan.parts[i];
        tones[i] = waveform::ramped_tone(part.freq_hz, part.amplitude_vp, part.duration_s,
                                         part.ramp_s, sample_rate_hz);
        total += tones[i].size();
    }
    wave.piezo_vp.setZero(total);
    wave.electro_vp.setZero(total);
    Eigen::Index cursor = 0;
    for (int i = 0; i < 2; ++i) {
        wave.piezo_vp.segment(cursor, tones[i].size()) = tones[i];
        wave.routing.push_back({cursor, cursor + tones[i].size(), plan.parts[i].actuator});
        cursor += tones[i].size();
    }
    return wave;
}

} // namespace hapsurf::flowlut
