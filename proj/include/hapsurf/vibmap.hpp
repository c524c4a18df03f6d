#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>

namespace hapsurf::vibmap {

/// Excitation cases: the four piezo patches driven individually, plus all
/// four driven together in parallel. Enumerator order is the tie-break
/// order used by lookup construction.
enum class Actuator : int { PA = 0, PB = 1, PC = 2, PD = 3, PALL = 4 };

inline constexpr int kActuatorCount = 5;
inline constexpr std::array<Actuator, kActuatorCount> kAllActuators{
    Actuator::PA, Actuator::PB, Actuator::PC, Actuator::PD, Actuator::PALL};

std::string to_string(Actuator a);
Actuator actuator_from_string(const std::string& name);

/// Uniform frequency axis in Hz.
struct FreqAxis {
    double start_hz = 0.0;
    double step_hz = 1.0;
    int count = 626;

    double frequency(int bin) const { return start_hz + step_hz * bin; }
    Eigen::ArrayXd frequencies() const {
        return start_hz + step_hz * Eigen::ArrayXd::LinSpaced(count, 0.0, count - 1.0);
    }
    bool operator==(const FreqAxis&) const = default;
};

/// Rectangular measurement grid. Point indices are row-major starting at 1:
/// index 1 sits at the origin, indices increase along columns (x) first,
/// then rows (y).
struct GridSpec {
    int rows = 7;
    int cols = 12;
    double spacing_mm = 60.0;
    double origin_x_mm = 0.0;
    double origin_y_mm = 0.0;

    int point_count() const { return rows * cols; }
    double width_mm() const { return (cols - 1) * spacing_mm; }
    double height_mm() const { return (rows - 1) * spacing_mm; }

    void validate() const; // throws ConfigError
    bool operator==(const GridSpec&) const = default;
};

/// Magnitude response in micrometers per volt-peak over a shared axis.
struct FrfCurve {
    FreqAxis axis;
    Eigen::ArrayXd magnitudes_um_per_vp;
};

using CurveMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One FRF per (grid point, excitation case); the measurement-campaign
/// product everything downstream consumes.
class VibrationMap {
public:
    VibrationMap() = default;
    VibrationMap(GridSpec grid, FreqAxis axis, std::string provenance);

    const GridSpec& grid() const { return grid_; }
    const FreqAxis& axis() const { return axis_; }
    const std::string& provenance() const { return provenance_; }

    /// Row of the backing matrix for (point_index, actuator); writable form
    /// used during construction.
    Eigen::Ref<const Eigen::ArrayXd> curve(int point_index, Actuator a) const;
    void set_curve(int point_index, Actuator a, const Eigen::ArrayXd& magnitudes);

    /// All curves as a (points*5) x bins matrix, one row per curve.
    const CurveMatrix& data() const { return data_; }

    int point_count() const { return grid_.point_count(); }

    bool inside_grid(double x_mm, double y_mm) const;

private:
    GridSpec grid_;
    FreqAxis axis_;
    std::string provenance_ = "synthetic";
    CurveMatrix data_; // (rows*cols*5) x axis.count
};

/// Coordinates in mm of a 1-based grid point index.
std::pair<double, double> point_coordinates(const GridSpec& grid, int index);

/// Inverse of point_coordinates for exact grid nodes; -1 if (x, y) is not
/// within tol of a node.
int point_index_at(const GridSpec& grid, double x_mm, double y_mm, double tol_mm = 1e-9);

/// Per-bin bilinear blend of the four grid curves surrounding (x, y) for one
/// excitation case. Exact pass-through at grid nodes. Throws GeometryError
/// outside the grid rectangle; no extrapolation.
Eigen::ArrayXd interpolate_frf(const VibrationMap& map, double x_mm, double y_mm, Actuator a);

/// Self-describing text format; full-precision decimals so save/load
/// round-trips are bit-exact.
void save_map(const VibrationMap& map, const std::string& path);
VibrationMap load_map(const std::string& path);

/// Hand-authored demonstration map with engineered lookup results for the
/// mid-surface pair 51/52: (51->52) resolves to 0.201 um/Vp at 465 Hz on PA
/// and (52->51) to 1.607 um/Vp at 428 Hz on PALL. Provenance "fixture".
VibrationMap fixture_map();

} // namespace hapsurf::vibmap
