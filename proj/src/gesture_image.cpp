#include "hapsurf/gesture/image.hpp"

#include "hapsurf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace hapsurf::gesture {

ContactFrame make_frame(Mask mask, double timestamp_s) {
    ContactFrame frame;
    frame.height = static_cast<int>(mask.rows());
    frame.width = static_cast<int>(mask.cols());
    frame.mask = std::move(mask);
    frame.timestamp_s = timestamp_s;
    return frame;
}

GrayImage box_blur(const GrayImage& image, int radius) {
    if (radius < 1) return image;
    const int rows = static_cast<int>(image.rows());
    const int cols = static_cast<int>(image.cols());
    const auto reflect = [](int i, int n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - i - 1;
        return std::clamp(i, 0, n - 1);
    };

    GrayImage tmp(rows, cols), out(rows, cols);
    const float norm = 1.0f / static_cast<float>(2 * radius + 1);
    // Horizontal running sum.
    for (int r = 0; r < rows; ++r) {
        float sum = 0.0f;
        for (int k = -radius; k <= radius; ++k) sum += image(r, reflect(k, cols));
        for (int c = 0; c < cols; ++c) {
            tmp(r, c) = sum * norm;
            sum += image(r, reflect(c + radius + 1, cols)) - image(r, reflect(c - radius, cols));
        }
    }
    // Vertical running sum.
    for (int c = 0; c < cols; ++c) {
        float sum = 0.0f;
        for (int k = -radius; k <= radius; ++k) sum += tmp(reflect(k, rows), c);
        for (int r = 0; r < rows; ++r) {
            out(r, c) = sum * norm;
            sum += tmp(reflect(r + radius + 1, rows), c) - tmp(reflect(r - radius, rows), c);
        }
    }
    return out;
}

ContactFrame preprocess(const GrayImage& raw, const GrayImage& background,
                        const PreprocessOptions& options, double timestamp_s) {
    if (raw.rows() != background.rows() || raw.cols() != background.cols())
        throw ConfigError("raw and background frame dimensions differ");
    GrayImage diff = (raw - background).cwiseMax(0.0f);
    const GrayImage low = box_blur(box_blur(diff, options.highpass_radius), options.highpass_radius);
    diff -= low;
    Mask mask = (diff.array() > static_cast<float>(options.threshold)).cast<std::uint8_t>().matrix();
    if (options.keep_largest_only && (mask.array() != 0).any()) mask = largest_component(mask);
    return make_frame(std::move(mask), timestamp_s);
}

std::vector<Blob> connected_components(const Mask& mask, Eigen::MatrixXi* labels_out) {
    const int rows = static_cast<int>(mask.rows());
    const int cols = static_cast<int>(mask.cols());
    Eigen::MatrixXi labels = Eigen::MatrixXi::Zero(rows, cols);
    std::vector<Blob> blobs;
    std::vector<std::pair<int, int>> stack;

    int next_label = 0;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (!mask(r, c) || labels(r, c)) continue;
            ++next_label;
            Blob blob;
            blob.label = next_label;
            blob.min_x = blob.max_x = c;
            blob.min_y = blob.max_y = r;
            double sum_x = 0.0, sum_y = 0.0;
            stack.clear();
            stack.emplace_back(r, c);
            labels(r, c) = next_label;
            while (!stack.empty()) {
                const auto [y, x] = stack.back();
                stack.pop_back();
                ++blob.area;
                sum_x += x;
                sum_y += y;
                blob.min_x = std::min(blob.min_x, x);
                blob.max_x = std::max(blob.max_x, x);
                blob.min_y = std::min(blob.min_y, y);
                blob.max_y = std::max(blob.max_y, y);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int ny = y + dy;
                        const int nx = x + dx;
                        if (ny < 0 || ny >= rows || nx < 0 || nx >= cols) continue;
                        if (!mask(ny, nx) || labels(ny, nx)) continue;
                        labels(ny, nx) = next_label;
                        stack.emplace_back(ny, nx);
                    }
                }
            }
            blob.centroid_x = sum_x / blob.area;
            blob.centroid_y = sum_y / blob.area;
            blobs.push_back(blob);
        }
    }
    std::sort(blobs.begin(), blobs.end(), [](const Blob& a, const Blob& b) {
        return a.area != b.area ? a.area > b.area : a.label < b.label;
    });
    if (labels_out) *labels_out = std::move(labels);
    return blobs;
}

Mask largest_component(const Mask& mask) {
    Eigen::MatrixXi labels;
    const std::vector<Blob> blobs = connected_components(mask, &labels);
    Mask out = Mask::Zero(mask.rows(), mask.cols());
    if (blobs.empty()) return out;
    const int keep = blobs.front().label;
    for (int r = 0; r < mask.rows(); ++r)
        for (int c = 0; c < mask.cols(); ++c)
            if (labels(r, c) == keep) out(r, c) = 1;
    return out;
}

std::vector<Eigen::Vector2d> trace_contour(const Mask& mask) {
    Eigen::MatrixXi labels;
    const std::vector<Blob> blobs = connected_components(mask, &labels);
    if (blobs.empty()) throw GeometryError("cannot trace the contour of an empty mask");
    const int target = blobs.front().label;
    const int rows = static_cast<int>(mask.rows());
    const int cols = static_cast<int>(mask.cols());

    // Top-left pixel of the component.
    int start_r = -1, start_c = -1;
    for (int r = 0; r < rows && start_r < 0; ++r)
        for (int c = 0; c < cols; ++c)
            if (labels(r, c) == target) {
                start_r = r;
                start_c = c;
                break;
            }

    const auto filled = [&](int r, int c) {
        return r >= 0 && r < rows && c >= 0 && c < cols && labels(r, c) == target;
    };

    // Moore neighborhood, clockwise starting from "west".
    static constexpr int kDr[8] = {0, -1, -1, -1, 0, 1, 1, 1};
    static constexpr int kDc[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

    std::vector<Eigen::Vector2d> contour;
    int r = start_r, c = start_c;
    int backtrack = 0; // came from the west on entry
    contour.emplace_back(c, r);
    const std::size_t guard =
        static_cast<std::size_t>(blobs.front().area) * 4 + 16; // boundary upper bound
    while (contour.size() < guard) {
        bool moved = false;
        for (int k = 0; k < 8; ++k) {
            const int dir = (backtrack + 1 + k) % 8;
            const int nr = r + kDr[dir];
            const int nc = c + kDc[dir];
            if (filled(nr, nc)) {
                r = nr;
                c = nc;
                backtrack = (dir + 4) % 8;
                moved = true;
                break;
            }
        }
        if (!moved) break; // isolated pixel
        if (r == start_r && c == start_c) break;
        contour.emplace_back(c, r);
    }
    return contour;
}

MaskStats mask_stats(const Mask& mask) {
    MaskStats stats;
    double sum_x = 0.0, sum_y = 0.0;
    for (int r = 0; r < mask.rows(); ++r)
        for (int c = 0; c < mask.cols(); ++c)
            if (mask(r, c)) {
                stats.area += 1.0;
                sum_x += c;
                sum_y += r;
            }
    if (stats.area == 0.0) return stats;
    stats.centroid_x = sum_x / stats.area;
    stats.centroid_y = sum_y / stats.area;

    double mxx = 0.0, myy = 0.0, mxy = 0.0;
    for (int r = 0; r < mask.rows(); ++r)
        for (int c = 0; c < mask.cols(); ++c)
            if (mask(r, c)) {
                const double dx = c - stats.centroid_x;
                const double dy = r - stats.centroid_y;
                mxx += dx * dx;
                myy += dy * dy;
                mxy += dx * dy;
            }
    double angle = 0.5 * std::atan2(2.0 * mxy, mxx - myy) * 180.0 / std::numbers::pi;
    if (angle < 0.0) angle += 180.0;
    stats.orientation_deg = angle;
    return stats;
}

GrayImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open image '" + path + "'");
    std::string magic;
    in >> magic;
    if (magic != "P5" && magic != "P2")
        throw ParseError("image '" + path + "' is not a P2/P5 PGM file");

    const auto next_int = [&]() {
        int value;
        while (true) {
            in >> std::ws;
            if (in.peek() == '#') {
                std::string comment;
                std::getline(in, comment);
                continue;
            }
            if (!(in >> value)) throw ParseError("image '" + path + "' has a truncated header");
            return value;
        }
    };
    const int width = next_int();
    const int height = next_int();
    const int maxval = next_int();
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255)
        throw ParseError("image '" + path + "' has unsupported dimensions or depth");

    GrayImage image(height, width);
    if (magic == "P5") {
        in.get(); // single whitespace after maxval
        std::vector<unsigned char> row(static_cast<std::size_t>(width));
        for (int r = 0; r < height; ++r) {
            in.read(reinterpret_cast<char*>(row.data()), width);
            if (!in) throw ParseError("image '" + path + "' has truncated pixel data");
            for (int c = 0; c < width; ++c) image(r, c) = static_cast<float>(row[c]);
        }
    } else {
        for (int r = 0; r < height; ++r)
            for (int c = 0; c < width; ++c) image(r, c) = static_cast<float>(next_int());
    }
    return image;
}

void write_pgm(const GrayImage& image, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    out << "P5\n" << image.cols() << " " << image.rows() << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(image.cols()));
    for (int r = 0; r < image.rows(); ++r) {
        for (int c = 0; c < image.cols(); ++c)
            row[static_cast<std::size_t>(c)] =
                static_cast<unsigned char>(std::clamp(image(r, c), 0.0f, 255.0f));
        out.write(reinterpret_cast<const char*>(row.data()), image.cols());
    }
    if (!out) throw ParseError("write to '" + path + "' failed");
}

Mask read_mask_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open mask '" + path + "'");
    std::vector<std::vector<std::uint8_t>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::uint8_t> row;
        std::istringstream s(line);
        std::string cell;
        while (std::getline(s, cell, ',')) row.push_back(cell.find('1') != std::string::npos);
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError("mask '" + path + "' has ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("mask '" + path + "' is empty");
    Mask mask(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            mask(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return mask;
}

void write_mask_csv(const Mask& mask, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    for (int r = 0; r < mask.rows(); ++r) {
        for (int c = 0; c < mask.cols(); ++c) {
            if (c) out << ',';
            out << (mask(r, c) ? '1' : '0');
        }
        out << '\n';
    }
    if (!out) throw ParseError("write to '" + path + "' failed");
}

} // namespace hapsurf::gesture
