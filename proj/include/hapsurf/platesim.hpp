#pragma once

#include "hapsurf/rng.hpp"
#include "hapsurf/vibmap.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace hapsurf::platesim {

/// Thin rectangular plate, simply supported on all edges. Bending stiffness
/// and areal density are given directly so no material model is needed.
struct PlateSpec {
    double length_x_mm = 743.46;
    double length_y_mm = 447.29;
    double thickness_mm = 3.18;
    double bending_stiffness_nm = 197.0; // D
    double areal_density_kg_m2 = 7.95;   // rho * h
    double damping_ratio = 0.01;         // uniform zeta unless modal_damping set
    std::vector<double> modal_damping;   // optional, (m-1)*mode_count_n + (n-1)
    int mode_count_m = 12;
    int mode_count_n = 8;
    double sweep_limit_hz = 625.0;
    double truncation_tol = 0.01;

    void validate() const; // throws ConfigError
    double damping_for(int m, int n) const;
};

/// Rectangular piezo patch footprint driven by a uniform pressure; the
/// electromechanical path collapses into one force-per-volt constant.
struct PatchSpec {
    vibmap::Actuator id = vibmap::Actuator::PA;
    double center_x_mm = 0.0;
    double center_y_mm = 0.0;
    double width_mm = 61.0;
    double height_mm = 35.0;
    double force_scale_n_per_v = 15.0;

    void validate(const PlateSpec& plate) const; // throws ConfigError
};

/// Natural frequency in Hz of mode (m, n); strictly increasing in each index.
/// Throws std::out_of_range when the indices exceed the spec's truncation.
double modal_frequency(const PlateSpec& spec, int m, int n);

/// Magnitude FRF in um/Vp at one surface point for one excitation case.
/// PALL is the coherent complex sum over all patches, not a sum of
/// magnitudes. Throws GeometryError for points off the plate and
/// ConfigError when the requested patch is missing.
vibmap::FrfCurve synthesize_frf(const PlateSpec& spec, const std::vector<PatchSpec>& patches,
                                double x_mm, double y_mm, vibmap::Actuator actuator,
                                const vibmap::FreqAxis& axis);

/// Full map: one curve per (grid point, excitation case). Deterministic for
/// identical inputs.
vibmap::VibrationMap generate_vibration_map(const PlateSpec& spec,
                                            const std::vector<PatchSpec>& patches,
                                            const vibmap::GridSpec& grid,
                                            const vibmap::FreqAxis& axis);

PlateSpec default_plate();

/// Four patches hugging the edge midpoints: PA/PC mirror each other in x,
/// PB/PD in y.
std::vector<PatchSpec> default_patches();

vibmap::GridSpec default_grid(const PlateSpec& spec);

/// Deterministic jitter of stiffness, damping, patch placement and drive
/// gains; seeds the synthetic-map corpus used by tests and the CLI.
struct Layout {
    PlateSpec plate;
    std::vector<PatchSpec> patches;
};
Layout randomized_layout(std::uint64_t seed);

/// Reads {"plate": {...}, "patches": [...], "grid": {...}} with defaults for
/// missing fields. Throws ParseError on malformed JSON.
struct PlateConfig {
    PlateSpec plate;
    std::vector<PatchSpec> patches;
    vibmap::GridSpec grid;
};
PlateConfig load_plate_config(const std::string& path);

} // namespace hapsurf::platesim
