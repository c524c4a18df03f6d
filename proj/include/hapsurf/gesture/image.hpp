#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace hapsurf::gesture {

/// Grayscale frame, row-major, 0..255.
using GrayImage = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Binary occupancy, row-major; nonzero means contact.
using Mask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ContactFrame {
    int width = 640;
    int height = 480;
    Mask mask; // height x width
    double timestamp_s = 0.0;

    bool empty() const { return mask.size() == 0 || !(mask.array() != 0).any(); }
};

ContactFrame make_frame(Mask mask, double timestamp_s = 0.0);

struct PreprocessOptions {
    double threshold = 25.0;   // on the 0..255 scale, applied after the high-pass
    int highpass_radius = 64;  // box half-width of the background estimate
    bool keep_largest_only = true;
};

/// Background subtraction, high-pass (signal minus a wide box blur, which
/// strips slow illumination gradients), fixed threshold, then the largest
/// connected component. Throws ConfigError on dimension mismatch.
ContactFrame preprocess(const GrayImage& raw, const GrayImage& background,
                        const PreprocessOptions& options = {}, double timestamp_s = 0.0);

/// Two box-blur passes of half-width `radius`, reflected borders.
GrayImage box_blur(const GrayImage& image, int radius);

struct Blob {
    int area = 0;
    double centroid_x = 0.0;
    double centroid_y = 0.0;
    int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
    int label = 0;
};

/// 8-connected components, labels written to `labels` (0 = background),
/// blobs ordered by descending area.
std::vector<Blob> connected_components(const Mask& mask, Eigen::MatrixXi* labels = nullptr);

Mask largest_component(const Mask& mask);

/// Ordered outer boundary of the largest component (Moore neighbor trace),
/// pixel coordinates (x = column, y = row). Throws GeometryError on an
/// empty mask.
std::vector<Eigen::Vector2d> trace_contour(const Mask& mask);

struct MaskStats {
    double area = 0.0;
    double centroid_x = 0.0;
    double centroid_y = 0.0;
    double orientation_deg = 0.0; // principal axis, [0, 180)
};
MaskStats mask_stats(const Mask& mask);

/// PGM (P5 or P2) and plain 0/1 CSV mask formats.
GrayImage read_pgm(const std::string& path);
void write_pgm(const GrayImage& image, const std::string& path);
Mask read_mask_csv(const std::string& path);
void write_mask_csv(const Mask& mask, const std::string& path);

inline Mask mask_from_gray(const GrayImage& image, double threshold = 127.0) {
    return (image.array() > static_cast<float>(threshold)).cast<std::uint8_t>().matrix();
}

inline GrayImage gray_from_mask(const Mask& mask) {
    return (mask.array() != 0).select(GrayImage::Constant(mask.rows(), mask.cols(), 255.0f),
                                      GrayImage::Zero(mask.rows(), mask.cols()));
}

} // namespace hapsurf::gesture
