#include "hapsurf/vibmap.hpp"

#include "hapsurf/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>

namespace hapsurf::vibmap {

std::string to_string(Actuator a) {
    switch (a) {
        case Actuator::PA: return "PA";
        case Actuator::PB: return "PB";
        case Actuator::PC: return "PC";
        case Actuator::PD: return "PD";
        case Actuator::PALL: return "PALL";
    }
    throw ConfigError("unknown actuator enum value");
}

Actuator actuator_from_string(const std::string& name) {
    for (Actuator a : kAllActuators) {
        if (to_string(a) == name) return a;
    }
    throw ParseError("unknown actuator name: '" + name + "'");
}

void GridSpec::validate() const {
    if (rows < 1 || cols < 1) throw ConfigError("grid rows/cols must be >= 1");
    if (!(spacing_mm > 0.0)) throw ConfigError("grid spacing must be positive");
    if (!std::isfinite(origin_x_mm) || !std::isfinite(origin_y_mm))
        throw ConfigError("grid origin must be finite");
}

VibrationMap::VibrationMap(GridSpec grid, FreqAxis axis, std::string provenance)
    : grid_(grid), axis_(axis), provenance_(std::move(provenance)) {
    grid_.validate();
    if (axis_.count < 1 || !(axis_.step_hz > 0.0))
        throw ConfigError("frequency axis must be ascending and non-empty");
    data_ = CurveMatrix::Zero(grid_.point_count() * kActuatorCount, axis_.count);
}

static int curve_row(const GridSpec& grid, int point_index, Actuator a) {
    if (point_index < 1 || point_index > grid.point_count())
        throw GeometryError("grid point index " + std::to_string(point_index) +
                            " out of range 1.." + std::to_string(grid.point_count()));
    return (point_index - 1) * kActuatorCount + static_cast<int>(a);
}

Eigen::Ref<const Eigen::ArrayXd> VibrationMap::curve(int point_index, Actuator a) const {
    return data_.row(curve_row(grid_, point_index, a)).transpose().array();
}

void VibrationMap::set_curve(int point_index, Actuator a, const Eigen::ArrayXd& magnitudes) {
    if (magnitudes.size() != axis_.count)
        throw ConfigError("curve length " + std::to_string(magnitudes.size()) +
                          " does not match axis length " + std::to_string(axis_.count));
    if (!magnitudes.isFinite().all() || (magnitudes < 0.0).any())
        throw ConfigError("curve magnitudes must be finite and non-negative");
    data_.row(curve_row(grid_, point_index, a)) = magnitudes.transpose();
}

bool VibrationMap::inside_grid(double x_mm, double y_mm) const {
    const double x0 = grid_.origin_x_mm;
    const double y0 = grid_.origin_y_mm;
    return x_mm >= x0 && x_mm <= x0 + grid_.width_mm() &&
           y_mm >= y0 && y_mm <= y0 + grid_.height_mm();
}

std::pair<double, double> point_coordinates(const GridSpec& grid, int index) {
    if (index < 1 || index > grid.point_count())
        throw GeometryError("grid point index " + std::to_string(index) + " out of range 1.." +
                            std::to_string(grid.point_count()));
    const int i0 = index - 1;
    const int row = i0 / grid.cols;
    const int col = i0 % grid.cols;
    return {grid.origin_x_mm + col * grid.spacing_mm, grid.origin_y_mm + row * grid.spacing_mm};
}

int point_index_at(const GridSpec& grid, double x_mm, double y_mm, double tol_mm) {
    const double fx = (x_mm - grid.origin_x_mm) / grid.spacing_mm;
    const double fy = (y_mm - grid.origin_y_mm) / grid.spacing_mm;
    const int col = static_cast<int>(std::lround(fx));
    const int row = static_cast<int>(std::lround(fy));
    if (col < 0 || col >= grid.cols || row < 0 || row >= grid.rows) return -1;
    if (std::abs(fx - col) * grid.spacing_mm > tol_mm) return -1;
    if (std::abs(fy - row) * grid.spacing_mm > tol_mm) return -1;
    return row * grid.cols + col + 1;
}

Eigen::ArrayXd interpolate_frf(const VibrationMap& map, double x_mm, double y_mm, Actuator a) {
    const GridSpec& g = map.grid();
    if (!map.inside_grid(x_mm, y_mm))
        throw GeometryError("point (" + std::to_string(x_mm) + ", " + std::to_string(y_mm) +
                            ") mm lies outside the instrumented grid; no extrapolation");

    const double fx = (x_mm - g.origin_x_mm) / g.spacing_mm;
    const double fy = (y_mm - g.origin_y_mm) / g.spacing_mm;
    int c0 = static_cast<int>(std::floor(fx));
    int r0 = static_cast<int>(std::floor(fy));
    // Clamp so points on the far edges use the last interior cell.
    c0 = std::min(std::max(c0, 0), std::max(g.cols - 2, 0));
    r0 = std::min(std::max(r0, 0), std::max(g.rows - 2, 0));
    const double tx = g.cols > 1 ? fx - c0 : 0.0;
    const double ty = g.rows > 1 ? fy - r0 : 0.0;

    const auto index = [&](int row, int col) { return row * g.cols + col + 1; };
    const int c1 = std::min(c0 + 1, g.cols - 1);
    const int r1 = std::min(r0 + 1, g.rows - 1);

    const double w00 = (1.0 - tx) * (1.0 - ty);
    const double w10 = tx * (1.0 - ty);
    const double w01 = (1.0 - tx) * ty;
    const double w11 = tx * ty;

    const auto c00 = map.curve(index(r0, c0), a);
    const auto c10 = map.curve(index(r0, c1), a);
    const auto c01 = map.curve(index(r1, c0), a);
    const auto c11 = map.curve(index(r1, c1), a);

    // Clamping to the corner envelope removes the last-ulp rounding of the
    // weighted sum, so constant cells reproduce exactly.
    Eigen::ArrayXd blended = w00 * c00 + w10 * c10 + w01 * c01 + w11 * c11;
    const Eigen::ArrayXd lo = c00.min(c10).min(c01).min(c11);
    const Eigen::ArrayXd hi = c00.max(c10).max(c01).max(c11);
    return blended.max(lo).min(hi);
}

namespace {

// %.17g round-trips doubles exactly and keeps short decimals short.
void append_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

} // namespace

void save_map(const VibrationMap& map, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");

    const GridSpec& g = map.grid();
    std::string text;
    text.reserve(static_cast<std::size_t>(map.data().size()) * 8 + 512);
    text += "vibmap v1\n";
    text += "rows " + std::to_string(g.rows) + "\n";
    text += "cols " + std::to_string(g.cols) + "\n";
    text += "spacing_mm ";
    append_double(text, g.spacing_mm);
    text += "\norigin_mm ";
    append_double(text, g.origin_x_mm);
    text += " ";
    append_double(text, g.origin_y_mm);
    text += "\naxis_hz ";
    append_double(text, map.axis().start_hz);
    text += " ";
    append_double(text, map.axis().step_hz);
    text += " " + std::to_string(map.axis().count);
    text += "\nprovenance " + map.provenance() + "\n";
    text += "numbering row-major-from-origin\n";

    for (int p = 1; p <= g.point_count(); ++p) {
        for (Actuator a : kAllActuators) {
            text += "curve " + std::to_string(p) + " " + to_string(a);
            const auto c = map.curve(p, a);
            for (int k = 0; k < c.size(); ++k) {
                text += ' ';
                append_double(text, c[k]);
            }
            text += '\n';
        }
    }
    out << text;
    if (!out) throw ParseError("write to '" + path + "' failed");
}

VibrationMap load_map(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open map file '" + path + "'");

    std::string line;
    auto next_line = [&](const char* what) {
        if (!std::getline(in, line)) throw ParseError(std::string("map file truncated before ") + what);
        return std::istringstream(line);
    };

    {
        auto s = next_line("format line");
        std::string magic, version;
        s >> magic >> version;
        if (magic != "vibmap" || version != "v1")
            throw ParseError("map file '" + path + "' has unknown format line '" + line + "'");
    }

    GridSpec grid;
    FreqAxis axis;
    std::string provenance;
    auto read_kv = [&](const char* key, auto&... values) {
        auto s = next_line(key);
        std::string k;
        s >> k;
        ((s >> values), ...);
        if (k != key || s.fail())
            throw ParseError(std::string("expected header '") + key + " ...', got '" + line + "'");
    };
    read_kv("rows", grid.rows);
    read_kv("cols", grid.cols);
    read_kv("spacing_mm", grid.spacing_mm);
    read_kv("origin_mm", grid.origin_x_mm, grid.origin_y_mm);
    read_kv("axis_hz", axis.start_hz, axis.step_hz, axis.count);
    read_kv("provenance", provenance);
    {
        auto s = next_line("numbering");
        std::string k, scheme;
        s >> k >> scheme;
        if (k != "numbering" || scheme != "row-major-from-origin")
            throw ParseError("unsupported numbering scheme in '" + line + "'");
    }

    VibrationMap map(grid, axis, provenance);
    int loaded = 0;
    Eigen::ArrayXd values(axis.count);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const char* ptr = line.data();
        const char* end = line.data() + line.size();
        auto skip_ws = [&] { while (ptr < end && *ptr == ' ') ++ptr; };
        auto token = [&]() -> std::string {
            skip_ws();
            const char* start = ptr;
            while (ptr < end && *ptr != ' ') ++ptr;
            return std::string(start, ptr);
        };
        if (token() != "curve") throw ParseError("expected 'curve' record, got '" + line + "'");
        const std::string index_text = token();
        int point_index = 0;
        if (auto [p, ec] = std::from_chars(index_text.data(), index_text.data() + index_text.size(), point_index);
            ec != std::errc{})
            throw ParseError("bad point index '" + index_text + "'");
        const Actuator a = actuator_from_string(token());
        for (int k = 0; k < axis.count; ++k) {
            skip_ws();
            char* parsed_end = nullptr;
            values[k] = std::strtod(ptr, &parsed_end);
            if (parsed_end == ptr)
                throw ParseError("curve (" + std::to_string(point_index) + ", " + to_string(a) +
                                 ") has " + std::to_string(k) + " magnitudes, axis needs " +
                                 std::to_string(axis.count));
            ptr = parsed_end;
        }
        skip_ws();
        if (ptr != end)
            throw ParseError("curve (" + std::to_string(point_index) + ", " + to_string(a) +
                             ") has more magnitudes than the axis length " + std::to_string(axis.count));
        map.set_curve(point_index, a, values);
        ++loaded;
    }
    const int expected = grid.point_count() * kActuatorCount;
    if (loaded != expected)
        throw ParseError("map file declares " + std::to_string(grid.rows) + "x" +
                         std::to_string(grid.cols) + " grid (" + std::to_string(expected) +
                         " curves) but contains " + std::to_string(loaded));
    return map;
}

VibrationMap fixture_map() {
    GridSpec grid; // 7x12 at 60 mm
    grid.origin_x_mm = 41.73;
    grid.origin_y_mm = 43.645;
    FreqAxis axis{0.0, 1.0, 626};
    VibrationMap map(grid, axis, "fixture");

    // Flat per-curve baselines keep the file small and every argmax unambiguous.
    Eigen::ArrayXd curve(axis.count);
    for (int p = 1; p <= grid.point_count(); ++p) {
        for (Actuator a : kAllActuators) {
            const int k = (p * 7 + static_cast<int>(a)) % 10;
            curve.setConstant(0.02 + 0.001 * k);
            map.set_curve(p, a, curve);
        }
    }

    // Engineered mid-surface pair: points 51 and 52 are adjacent in x.
    curve = map.curve(51, Actuator::PA);
    curve[465] = 0.201;
    map.set_curve(51, Actuator::PA, curve);
    curve = map.curve(52, Actuator::PA);
    curve[465] = 0.0;
    map.set_curve(52, Actuator::PA, curve);

    curve = map.curve(52, Actuator::PALL);
    curve[428] = 1.607;
    map.set_curve(52, Actuator::PALL, curve);
    curve = map.curve(51, Actuator::PALL);
    curve[428] = 0.0;
    map.set_curve(51, Actuator::PALL, curve);
    return map;
}

} // namespace hapsurf::vibmap
