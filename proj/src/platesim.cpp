#include "hapsurf/platesim.hpp"

#include "hapsurf/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace hapsurf::platesim {

using vibmap::Actuator;
using vibmap::FreqAxis;
using vibmap::FrfCurve;
using vibmap::GridSpec;
using vibmap::VibrationMap;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kMmToM = 1e-3;
constexpr double kMToUm = 1e6;
} // namespace

void PlateSpec::validate() const {
    if (!(length_x_mm > 0.0) || !(length_y_mm > 0.0) || !(thickness_mm > 0.0))
        throw ConfigError("plate dimensions must be strictly positive");
    if (!(bending_stiffness_nm > 0.0)) throw ConfigError("bending stiffness must be positive");
    if (!(areal_density_kg_m2 > 0.0)) throw ConfigError("areal density must be positive");
    if (mode_count_m < 1 || mode_count_n < 1) throw ConfigError("mode counts must be >= 1");
    if (!(damping_ratio > 0.0 && damping_ratio < 1.0))
        throw ConfigError("damping ratio must lie in (0, 1)");
    if (!modal_damping.empty()) {
        if (static_cast<int>(modal_damping.size()) != mode_count_m * mode_count_n)
            throw ConfigError("modal_damping must have mode_count_m*mode_count_n entries");
        for (double z : modal_damping)
            if (!(z > 0.0 && z < 1.0)) throw ConfigError("modal damping ratios must lie in (0, 1)");
    }
    if (!(sweep_limit_hz > 0.0)) throw ConfigError("sweep limit must be positive");
}

double PlateSpec::damping_for(int m, int n) const {
    if (modal_damping.empty()) return damping_ratio;
    return modal_damping[static_cast<std::size_t>(m - 1) * mode_count_n + (n - 1)];
}

void PatchSpec::validate(const PlateSpec& plate) const {
    if (!(force_scale_n_per_v > 0.0)) throw ConfigError("patch force scale must be positive");
    if (!(width_mm > 0.0) || !(height_mm > 0.0)) throw ConfigError("patch size must be positive");
    const double x0 = center_x_mm - width_mm / 2.0;
    const double x1 = center_x_mm + width_mm / 2.0;
    const double y0 = center_y_mm - height_mm / 2.0;
    const double y1 = center_y_mm + height_mm / 2.0;
    if (x0 < 0.0 || y0 < 0.0 || x1 > plate.length_x_mm || y1 > plate.length_y_mm)
        throw ConfigError("patch " + vibmap::to_string(id) + " extends outside the plate");
}

double modal_frequency(const PlateSpec& spec, int m, int n) {
    spec.validate();
    if (m < 1 || m > spec.mode_count_m || n < 1 || n > spec.mode_count_n)
        throw std::out_of_range("mode index (" + std::to_string(m) + ", " + std::to_string(n) +
                                ") outside 1..(" + std::to_string(spec.mode_count_m) + ", " +
                                std::to_string(spec.mode_count_n) + ")");
    const double a = spec.length_x_mm * kMmToM;
    const double b = spec.length_y_mm * kMmToM;
    const double omega = kPi * kPi *
                         std::sqrt(spec.bending_stiffness_nm / spec.areal_density_kg_m2) *
                         (static_cast<double>(m) * m / (a * a) + static_cast<double>(n) * n / (b * b));
    return omega / (2.0 * kPi);
}

namespace {

// Integral of sin(m*pi*x/a) over [x0, x1], divided by the patch width: the
// 1-D factor of the uniform-pressure modal projection.
double mode_line_integral(int m, double a, double x0, double x1) {
    const double c = a / (m * kPi);
    return c * (std::cos(m * kPi * x0 / a) - std::cos(m * kPi * x1 / a));
}

struct ModeBasis {
    Eigen::ArrayXd omega;      // rad/s per mode
    Eigen::ArrayXd zeta;       // damping per mode
    Eigen::ArrayXd shape;      // phi_mn(point)
    Eigen::ArrayXXd patch_q;   // modes x patches: F_mn / M_mn (per volt)
};

ModeBasis build_basis(const PlateSpec& spec, const std::vector<PatchSpec>& patches,
                      double x_mm, double y_mm) {
    const double a = spec.length_x_mm * kMmToM;
    const double b = spec.length_y_mm * kMmToM;
    const double x = x_mm * kMmToM;
    const double y = y_mm * kMmToM;
    const int mode_count = spec.mode_count_m * spec.mode_count_n;
    const double modal_mass = spec.areal_density_kg_m2 * a * b / 4.0;

    ModeBasis basis;
    basis.omega.resize(mode_count);
    basis.zeta.resize(mode_count);
    basis.shape.resize(mode_count);
    basis.patch_q.resize(mode_count, static_cast<Eigen::Index>(patches.size()));

    int k = 0;
    for (int m = 1; m <= spec.mode_count_m; ++m) {
        for (int n = 1; n <= spec.mode_count_n; ++n, ++k) {
            basis.omega[k] = 2.0 * kPi * modal_frequency(spec, m, n);
            basis.zeta[k] = spec.damping_for(m, n);
            basis.shape[k] = std::sin(m * kPi * x / a) * std::sin(n * kPi * y / b);
            for (std::size_t p = 0; p < patches.size(); ++p) {
                const PatchSpec& patch = patches[p];
                const double px0 = (patch.center_x_mm - patch.width_mm / 2.0) * kMmToM;
                const double px1 = (patch.center_x_mm + patch.width_mm / 2.0) * kMmToM;
                const double py0 = (patch.center_y_mm - patch.height_mm / 2.0) * kMmToM;
                const double py1 = (patch.center_y_mm + patch.height_mm / 2.0) * kMmToM;
                const double area = (px1 - px0) * (py1 - py0);
                const double pressure = patch.force_scale_n_per_v / area; // N/m^2 per volt
                const double force = pressure * mode_line_integral(m, a, px0, px1) *
                                     mode_line_integral(n, b, py0, py1);
                basis.patch_q(k, static_cast<Eigen::Index>(p)) = force / modal_mass;
            }
        }
    }
    return basis;
}

void validate_inputs(const PlateSpec& spec, const std::vector<PatchSpec>& patches,
                     const FreqAxis& axis) {
    spec.validate();
    for (const PatchSpec& p : patches) p.validate(spec);
    for (std::size_t i = 0; i < patches.size(); ++i)
        for (std::size_t j = i + 1; j < patches.size(); ++j)
            if (patches[i].id == patches[j].id)
                throw ConfigError("duplicate patch id " + vibmap::to_string(patches[i].id));
    if (axis.count < 1 || !(axis.step_hz > 0.0))
        throw ConfigError("frequency axis must be ascending and non-empty");
    if (axis.frequency(axis.count - 1) > spec.sweep_limit_hz + 1e-9)
        throw ConfigError("frequency axis exceeds the sweep limit of " +
                          std::to_string(spec.sweep_limit_hz) + " Hz");
}

// Complex response of the modal sum for a per-mode generalized force column.
void accumulate_response(const ModeBasis& basis, const Eigen::ArrayXd& q,
                         const Eigen::ArrayXd& omega_axis, Eigen::ArrayXd& re,
                         Eigen::ArrayXd& im) {
    re.setZero(omega_axis.size());
    im.setZero(omega_axis.size());
    for (Eigen::Index k = 0; k < basis.omega.size(); ++k) {
        const double num = basis.shape[k] * q[k];
        if (num == 0.0) continue;
        const double w_k = basis.omega[k];
        const Eigen::ArrayXd dr = w_k * w_k - omega_axis.square();
        const Eigen::ArrayXd di = 2.0 * basis.zeta[k] * w_k * omega_axis;
        const Eigen::ArrayXd denom = dr.square() + di.square();
        re += num * dr / denom;
        im += -num * di / denom;
    }
}

Eigen::ArrayXd frf_magnitudes(const PlateSpec& spec, const std::vector<PatchSpec>& patches,
                              double x_mm, double y_mm, Actuator actuator, const FreqAxis& axis) {
    if (x_mm < 0.0 || x_mm > spec.length_x_mm || y_mm < 0.0 || y_mm > spec.length_y_mm)
        throw GeometryError("response point (" + std::to_string(x_mm) + ", " +
                            std::to_string(y_mm) + ") mm lies outside the plate");

    std::vector<const PatchSpec*> driven;
    if (actuator == Actuator::PALL) {
        if (patches.empty()) throw ConfigError("PALL requested with an empty patch list");
        for (const PatchSpec& p : patches) driven.push_back(&p);
    } else {
        for (const PatchSpec& p : patches)
            if (p.id == actuator) driven.push_back(&p);
        if (driven.empty())
            throw ConfigError("no patch with id " + vibmap::to_string(actuator) + " in the layout");
    }

    std::vector<PatchSpec> subset;
    subset.reserve(driven.size());
    for (const PatchSpec* p : driven) subset.push_back(*p);
    const ModeBasis basis = build_basis(spec, subset, x_mm, y_mm);

    // Parallel drive sums the generalized forces; denominators are shared,
    // so this equals the coherent sum of the individual patch responses.
    const Eigen::ArrayXd q = basis.patch_q.rowwise().sum();
    const Eigen::ArrayXd omega_axis = 2.0 * kPi * axis.frequencies();
    Eigen::ArrayXd re, im;
    accumulate_response(basis, q, omega_axis, re, im);
    return kMToUm * (re.square() + im.square()).sqrt();
}

} // namespace

FrfCurve synthesize_frf(const PlateSpec& spec, const std::vector<PatchSpec>& patches, double x_mm,
                        double y_mm, Actuator actuator, const FreqAxis& axis) {
    validate_inputs(spec, patches, axis);
    return FrfCurve{axis, frf_magnitudes(spec, patches, x_mm, y_mm, actuator, axis)};
}

VibrationMap generate_vibration_map(const PlateSpec& spec, const std::vector<PatchSpec>& patches,
                                    const GridSpec& grid, const FreqAxis& axis) {
    validate_inputs(spec, patches, axis);
    grid.validate();
    if (patches.empty()) throw ConfigError("vibration map needs at least one patch");

    const double max_x = grid.origin_x_mm + grid.width_mm();
    const double max_y = grid.origin_y_mm + grid.height_mm();
    if (grid.origin_x_mm < 0.0 || grid.origin_y_mm < 0.0 || max_x > spec.length_x_mm ||
        max_y > spec.length_y_mm)
        throw GeometryError("measurement grid does not fit the plate");

    VibrationMap map(grid, axis, "synthetic");
    const Eigen::ArrayXd omega_axis = 2.0 * kPi * axis.frequencies();
    Eigen::ArrayXd re, im, re_sum, im_sum;

    for (int index = 1; index <= grid.point_count(); ++index) {
        const auto [x, y] = point_coordinates(grid, index);
        const ModeBasis basis = build_basis(spec, patches, x, y);
        re_sum.setZero(axis.count);
        im_sum.setZero(axis.count);
        for (std::size_t p = 0; p < patches.size(); ++p) {
            accumulate_response(basis, basis.patch_q.col(static_cast<Eigen::Index>(p)), omega_axis,
                                re, im);
            map.set_curve(index, patches[p].id, kMToUm * (re.square() + im.square()).sqrt());
            re_sum += re;
            im_sum += im;
        }
        map.set_curve(index, Actuator::PALL,
                      kMToUm * (re_sum.square() + im_sum.square()).sqrt());
    }
    return map;
}

PlateSpec default_plate() { return PlateSpec{}; }

std::vector<PatchSpec> default_patches() {
    const PlateSpec plate = default_plate();
    const double inset = 12.0;
    std::vector<PatchSpec> patches(4);
    // Long patch edge runs along the plate edge it hugs.
    patches[0] = {Actuator::PA, inset + 35.0 / 2.0, plate.length_y_mm / 2.0, 35.0, 61.0, 15.0};
    patches[1] = {Actuator::PB, plate.length_x_mm / 2.0, inset + 35.0 / 2.0, 61.0, 35.0, 15.0};
    patches[2] = {Actuator::PC, plate.length_x_mm - inset - 35.0 / 2.0, plate.length_y_mm / 2.0,
                  35.0, 61.0, 15.0};
    patches[3] = {Actuator::PD, plate.length_x_mm / 2.0, plate.length_y_mm - inset - 35.0 / 2.0,
                  61.0, 35.0, 15.0};
    return patches;
}

GridSpec default_grid(const PlateSpec& spec) {
    GridSpec grid;
    grid.origin_x_mm = (spec.length_x_mm - grid.width_mm()) / 2.0;
    grid.origin_y_mm = (spec.length_y_mm - grid.height_mm()) / 2.0;
    return grid;
}

Layout randomized_layout(std::uint64_t seed) {
    Rng rng(seed);
    Layout layout{default_plate(), default_patches()};
    layout.plate.bending_stiffness_nm *= rng.uniform(0.8, 1.25);
    layout.plate.areal_density_kg_m2 *= rng.uniform(0.9, 1.1);
    layout.plate.damping_ratio = rng.uniform(0.008, 0.02);
    for (PatchSpec& patch : layout.patches) {
        const bool vertical = patch.height_mm > patch.width_mm; // left/right edge patches
        const double slide = rng.uniform(-40.0, 40.0);
        if (vertical)
            patch.center_y_mm += slide;
        else
            patch.center_x_mm += slide;
        patch.force_scale_n_per_v *= rng.uniform(0.7, 1.4);
    }
    return layout;
}

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError("config file '" + path + "': " + e.what());
    }
    return j;
}

} // namespace

PlateConfig load_plate_config(const std::string& path) {
    const json j = load_json(path);
    PlateConfig config{default_plate(), default_patches(), {}};
    config.grid = default_grid(config.plate);
    try {
        if (j.contains("plate")) {
            const json& p = j.at("plate");
            PlateSpec& s = config.plate;
            s.length_x_mm = p.value("length_x_mm", s.length_x_mm);
            s.length_y_mm = p.value("length_y_mm", s.length_y_mm);
            s.thickness_mm = p.value("thickness_mm", s.thickness_mm);
            s.bending_stiffness_nm = p.value("bending_stiffness_nm", s.bending_stiffness_nm);
            s.areal_density_kg_m2 = p.value("areal_density_kg_m2", s.areal_density_kg_m2);
            s.damping_ratio = p.value("damping_ratio", s.damping_ratio);
            s.mode_count_m = p.value("mode_count_m", s.mode_count_m);
            s.mode_count_n = p.value("mode_count_n", s.mode_count_n);
            s.sweep_limit_hz = p.value("sweep_limit_hz", s.sweep_limit_hz);
            if (p.contains("modal_damping"))
                s.modal_damping = p.at("modal_damping").get<std::vector<double>>();
        }
        if (j.contains("patches")) {
            config.patches.clear();
            for (const json& pj : j.at("patches")) {
                PatchSpec patch;
                patch.id = vibmap::actuator_from_string(pj.at("id").get<std::string>());
                patch.center_x_mm = pj.at("center_mm").at(0).get<double>();
                patch.center_y_mm = pj.at("center_mm").at(1).get<double>();
                patch.width_mm = pj.at("size_mm").at(0).get<double>();
                patch.height_mm = pj.at("size_mm").at(1).get<double>();
                patch.force_scale_n_per_v = pj.value("force_scale_n_per_v", 15.0);
                config.patches.push_back(patch);
            }
        }
        if (j.contains("grid")) {
            const json& g = j.at("grid");
            config.grid.rows = g.value("rows", config.grid.rows);
            config.grid.cols = g.value("cols", config.grid.cols);
            config.grid.spacing_mm = g.value("spacing_mm", config.grid.spacing_mm);
            if (g.contains("origin_mm")) {
                config.grid.origin_x_mm = g.at("origin_mm").at(0).get<double>();
                config.grid.origin_y_mm = g.at("origin_mm").at(1).get<double>();
            } else {
                // Center the grid when no origin is given.
                config.grid.origin_x_mm = (config.plate.length_x_mm - config.grid.width_mm()) / 2.0;
                config.grid.origin_y_mm = (config.plate.length_y_mm - config.grid.height_mm()) / 2.0;
            }
        }
    } catch (const json::exception& e) {
        throw ParseError("config file '" + path + "': " + e.what());
    }
    config.plate.validate();
    for (const PatchSpec& p : config.patches) p.validate(config.plate);
    config.grid.validate();
    return config;
}

} // namespace hapsurf::platesim
