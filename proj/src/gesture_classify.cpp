#include "hapsurf/gesture/classify.hpp"

#include "hapsurf/errors.hpp"
#include "hapsurf/gesture/efd.hpp"
#include "hapsurf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace hapsurf::gesture {

namespace fs = std::filesystem;

std::string to_string(GestureLabel label) {
    switch (label) {
        case GestureLabel::OneFinger: return "1-finger";
        case GestureLabel::TwoFinger: return "2-finger";
        case GestureLabel::LShape: return "l-shape";
        case GestureLabel::ClosedHand: return "closed-hand";
        case GestureLabel::OpenHand: return "open-hand";
        case GestureLabel::Drag: return "drag";
        case GestureLabel::Rotate: return "rotate";
        case GestureLabel::SpreadPile: return "spread-pile";
        case GestureLabel::Wipe: return "wipe";
        case GestureLabel::Zoom: return "zoom";
    }
    throw ConfigError("unknown gesture label enum value");
}

GestureLabel label_from_string(const std::string& name) {
    for (GestureKind kind : {GestureKind::Static, GestureKind::Dynamic})
        for (GestureLabel label : labels_of(kind))
            if (to_string(label) == name) return label;
    throw ParseError("unknown gesture label '" + name + "'");
}

bool is_static(GestureLabel label) { return static_cast<int>(label) < 5; }

std::vector<GestureLabel> labels_of(GestureKind kind) {
    if (kind == GestureKind::Static)
        return {GestureLabel::OneFinger, GestureLabel::TwoFinger, GestureLabel::LShape,
                GestureLabel::ClosedHand, GestureLabel::OpenHand};
    return {GestureLabel::Drag, GestureLabel::Rotate, GestureLabel::SpreadPile,
            GestureLabel::Wipe, GestureLabel::Zoom};
}

GestureKind gate(const std::vector<ContactFrame>& window, const GateOptions& options) {
    if (window.size() < 2) throw ConfigError("gate needs a window of at least 2 frames");

    const ContactFrame* first = nullptr;
    const ContactFrame* last = nullptr;
    for (const ContactFrame& frame : window) {
        if (frame.empty()) continue;
        if (!first) first = &frame;
        last = &frame;
    }
    if (!first || first == last) return GestureKind::Static;

    const MaskStats a = mask_stats(first->mask);
    const MaskStats b = mask_stats(last->mask);
    const double displacement =
        std::hypot(b.centroid_x - a.centroid_x, b.centroid_y - a.centroid_y);
    double turn = std::abs(b.orientation_deg - a.orientation_deg);
    if (turn > 90.0) turn = 180.0 - turn; // principal axis is modulo 180
    if (displacement > options.min_displacement_px || turn > options.min_rotation_deg)
        return GestureKind::Dynamic;
    return GestureKind::Static;
}

Eigen::VectorXd extract_static_features(const ContactFrame& frame,
                                        const FeatureOptions& options) {
    const CanonicalPose canonical = canonicalize(frame, options.pose);
    if (!(canonical.mask.array() != 0).any())
        throw GeometryError("canonical pose is empty after wrist removal");
    const std::vector<Eigen::Vector2d> contour = trace_contour(canonical.mask);
    return efd_descriptor(contour, options.harmonics);
}

int count_fingertips(const ContactFrame& frame, const FeatureOptions& options) {
    int count = 0;
    for (const Blob& blob : connected_components(frame.mask))
        if (blob.area >= options.fingertip_area_min_px && blob.area <= options.fingertip_area_max_px)
            ++count;
    return count;
}

namespace {

struct ContactTrack {
    std::vector<Eigen::Vector2d> displacements; // matched steps
    std::vector<double> radial_change;          // vs the global centroid
    std::vector<double> rotation_deg;           // about the global centroid
};

double wrap_deg(double d) {
    while (d > 180.0) d -= 360.0;
    while (d < -180.0) d += 360.0;
    return d;
}

} // namespace

Eigen::VectorXd extract_dynamic_features(const std::vector<ContactFrame>& frames,
                                         const FeatureOptions& options) {
    if (frames.size() != 4)
        throw ConfigError("dynamic gestures are classified from exactly the first four frames, got " +
                          std::to_string(frames.size()));

    // Shape of the initial contact.
    Eigen::VectorXd shape;
    if (!frames[0].empty()) {
        const std::vector<Eigen::Vector2d> contour = trace_contour(frames[0].mask);
        shape = efd_descriptor(contour, options.dynamic_harmonics);
    } else {
        shape = Eigen::VectorXd::Zero(options.dynamic_harmonics * 4);
    }

    std::array<std::vector<Blob>, 4> blobs;
    for (std::size_t i = 0; i < 4; ++i) blobs[i] = connected_components(frames[i].mask);

    ContactTrack track;
    double mean_count = 0.0;
    for (const auto& frame_blobs : blobs) mean_count += static_cast<double>(frame_blobs.size());
    mean_count /= 4.0;

    for (std::size_t step = 0; step + 1 < 4; ++step) {
        const std::vector<Blob>& now = blobs[step];
        const std::vector<Blob>& next = blobs[step + 1];
        if (now.empty() || next.empty()) continue;

        Eigen::Vector2d centroid(0.0, 0.0);
        for (const Blob& b : now) centroid += Eigen::Vector2d(b.centroid_x, b.centroid_y);
        centroid /= static_cast<double>(now.size());

        std::vector<char> used(next.size(), 0);
        for (const Blob& b : now) {
            int best = -1;
            double best_dist = 1e30;
            for (std::size_t j = 0; j < next.size(); ++j) {
                if (used[j]) continue;
                const double dist = std::hypot(next[j].centroid_x - b.centroid_x,
                                               next[j].centroid_y - b.centroid_y);
                if (dist < best_dist) {
                    best_dist = dist;
                    best = static_cast<int>(j);
                }
            }
            if (best < 0) break;
            used[static_cast<std::size_t>(best)] = 1;
            const Eigen::Vector2d from(b.centroid_x, b.centroid_y);
            const Eigen::Vector2d to(next[static_cast<std::size_t>(best)].centroid_x,
                                     next[static_cast<std::size_t>(best)].centroid_y);
            track.displacements.push_back(to - from);
            track.radial_change.push_back((to - centroid).norm() - (from - centroid).norm());
            const double angle_from =
                std::atan2(from.y() - centroid.y(), from.x() - centroid.x()) * 180.0 /
                std::numbers::pi;
            const double angle_to = std::atan2(to.y() - centroid.y(), to.x() - centroid.x()) *
                                    180.0 / std::numbers::pi;
            if ((from - centroid).norm() > 1e-6 && (to - centroid).norm() > 1e-6)
                track.rotation_deg.push_back(wrap_deg(angle_to - angle_from));
        }
    }

    double mean_speed = 0.0, speed_sq = 0.0, coherence = 0.0, rotation = 0.0, radial = 0.0;
    if (!track.displacements.empty()) {
        Eigen::Vector2d direction_sum(0.0, 0.0);
        for (const Eigen::Vector2d& d : track.displacements) {
            const double mag = d.norm();
            mean_speed += mag;
            speed_sq += mag * mag;
            if (mag > 1e-9) direction_sum += d / mag;
        }
        const double n = static_cast<double>(track.displacements.size());
        mean_speed /= n;
        speed_sq = std::sqrt(std::max(0.0, speed_sq / n - mean_speed * mean_speed));
        coherence = direction_sum.norm() / n;
        for (double r : track.radial_change) radial += r;
        radial /= static_cast<double>(track.radial_change.size());
        if (!track.rotation_deg.empty()) {
            for (double r : track.rotation_deg) rotation += r;
            rotation /= static_cast<double>(track.rotation_deg.size());
        }
    }

    const double fingertips = static_cast<double>(count_fingertips(frames[0], options));
    double total_area = 0.0;
    for (const Blob& b : blobs[0]) total_area += static_cast<double>(b.area);

    Eigen::VectorXd features(shape.size() + 8);
    features.head(shape.size()) = shape;
    Eigen::Index k = shape.size();
    features[k++] = fingertips;
    features[k++] = mean_count;
    features[k++] = total_area / 1000.0;
    features[k++] = mean_speed;
    features[k++] = speed_sq;
    features[k++] = coherence;
    features[k++] = std::abs(rotation);
    features[k++] = radial;
    return features;
}

Eigen::VectorXd LinearModel::scores(const Eigen::VectorXd& features) const {
    if (!trained()) throw ConfigError("model has not been trained");
    if (features.size() != weights.cols())
        throw ConfigError("feature vector length " + std::to_string(features.size()) +
                          " does not match model dimensionality " + std::to_string(weights.cols()));
    const Eigen::VectorXd standardized =
        (features - feature_mean).cwiseQuotient(feature_scale);
    return weights * standardized + bias;
}

namespace {

Prediction predict(const Eigen::VectorXd& features, const LinearModel& model) {
    Prediction p;
    p.scores = model.scores(features);
    Eigen::Index best = 0;
    p.scores.maxCoeff(&best);
    p.label = model.labels[static_cast<std::size_t>(best)];
    p.score = p.scores[best];
    return p;
}

} // namespace

Prediction classify_static(const Eigen::VectorXd& descriptor, const LinearModel& model) {
    if (model.kind != GestureKind::Static)
        throw ConfigError("static classification requires a static model");
    return predict(descriptor, model);
}

Prediction classify_dynamic(const std::vector<ContactFrame>& first_four_frames,
                            const LinearModel& model, const FeatureOptions& options) {
    if (model.kind != GestureKind::Dynamic)
        throw ConfigError("dynamic classification requires a dynamic model");
    return predict(extract_dynamic_features(first_four_frames, options), model);
}

namespace {

LinearModel fit(const std::vector<Example>& examples, const std::vector<GestureLabel>& labels,
                GestureKind kind, const TrainOptions& options) {
    const Eigen::Index dims = examples.front().features.size();
    const int classes = static_cast<int>(labels.size());

    LinearModel model;
    model.kind = kind;
    model.labels = labels;
    model.feature_mean = Eigen::VectorXd::Zero(dims);
    for (const Example& e : examples) model.feature_mean += e.features;
    model.feature_mean /= static_cast<double>(examples.size());
    Eigen::VectorXd var = Eigen::VectorXd::Zero(dims);
    for (const Example& e : examples)
        var += (e.features - model.feature_mean).cwiseAbs2();
    var /= static_cast<double>(examples.size());
    model.feature_scale = var.cwiseSqrt().cwiseMax(1e-9);

    std::vector<Eigen::VectorXd> standardized;
    standardized.reserve(examples.size());
    for (const Example& e : examples)
        standardized.push_back(
            (e.features - model.feature_mean).cwiseQuotient(model.feature_scale));

    model.weights = Eigen::MatrixXd::Zero(classes, dims);
    model.bias = Eigen::VectorXd::Zero(classes);

    // Pegasos-style subgradient descent, one binary margin per class.
    Rng rng(options.seed);
    std::vector<std::size_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int c = 0; c < classes; ++c) {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(dims);
        double b = 0.0;
        long long t = 0;
        for (int epoch = 0; epoch < options.epochs; ++epoch) {
            rng.shuffle(order);
            for (std::size_t idx : order) {
                ++t;
                const double eta = 1.0 / (options.lambda * static_cast<double>(t));
                const double y = examples[idx].label_index == c ? 1.0 : -1.0;
                const Eigen::VectorXd& x = standardized[idx];
                if (y * (w.dot(x) + b) < 1.0) {
                    w = (1.0 - eta * options.lambda) * w + (eta * y) * x;
                    b += eta * y;
                } else {
                    w *= (1.0 - eta * options.lambda);
                }
            }
        }
        model.weights.row(c) = w.transpose();
        model.bias[c] = b;
    }
    return model;
}

} // namespace

TrainResult train(const std::vector<Example>& examples, const std::vector<GestureLabel>& labels,
                  GestureKind kind, const TrainOptions& options) {
    if (examples.empty()) throw ConfigError("training corpus is empty");
    const int classes = static_cast<int>(labels.size());
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(classes));
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const int c = examples[i].label_index;
        if (c < 0 || c >= classes) throw ConfigError("example label index out of range");
        by_class[static_cast<std::size_t>(c)].push_back(i);
    }
    for (int c = 0; c < classes; ++c)
        if (by_class[static_cast<std::size_t>(c)].size() < 2)
            throw ConfigError("class '" + to_string(labels[static_cast<std::size_t>(c)]) +
                              "' needs at least 2 examples for two-fold cross validation");

    // Stratified two-fold split.
    Rng rng(options.seed);
    std::vector<int> fold_of(examples.size(), 0);
    for (int c = 0; c < classes; ++c) {
        std::vector<std::size_t>& members = by_class[static_cast<std::size_t>(c)];
        rng.shuffle(members);
        for (std::size_t k = 0; k < members.size(); ++k)
            fold_of[members[k]] = static_cast<int>(k % 2);
    }

    TrainResult result;
    result.cv.confusion = Eigen::MatrixXi::Zero(classes, classes);
    int correct = 0;
    for (int held_out = 0; held_out < 2; ++held_out) {
        std::vector<Example> fit_set;
        for (std::size_t i = 0; i < examples.size(); ++i)
            if (fold_of[i] != held_out) fit_set.push_back(examples[i]);
        const LinearModel fold_model = fit(fit_set, labels, kind, options);
        for (std::size_t i = 0; i < examples.size(); ++i) {
            if (fold_of[i] != held_out) continue;
            const Eigen::VectorXd scores = fold_model.scores(examples[i].features);
            Eigen::Index predicted = 0;
            scores.maxCoeff(&predicted);
            result.cv.confusion(examples[i].label_index, predicted) += 1;
            if (predicted == examples[i].label_index) ++correct;
        }
    }
    result.cv.accuracy = static_cast<double>(correct) / static_cast<double>(examples.size());
    result.model = fit(examples, labels, kind, options);
    return result;
}

void save_model(const LinearModel& model, const std::string& path) {
    if (!model.trained()) throw ConfigError("refusing to save an untrained model");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    out << "gesture-model v1\n";
    out << "kind " << (model.kind == GestureKind::Static ? "static" : "dynamic") << "\n";
    out << "labels";
    for (GestureLabel label : model.labels) out << " " << to_string(label);
    out << "\ndims " << model.weights.cols() << "\n";
    out.precision(17);
    out << "mean";
    for (Eigen::Index i = 0; i < model.feature_mean.size(); ++i) out << " " << model.feature_mean[i];
    out << "\nscale";
    for (Eigen::Index i = 0; i < model.feature_scale.size(); ++i)
        out << " " << model.feature_scale[i];
    out << "\n";
    for (std::size_t c = 0; c < model.labels.size(); ++c) {
        out << "class " << to_string(model.labels[c]) << " " << model.bias[static_cast<int>(c)];
        for (Eigen::Index i = 0; i < model.weights.cols(); ++i)
            out << " " << model.weights(static_cast<int>(c), i);
        out << "\n";
    }
    if (!out) throw ParseError("write to '" + path + "' failed");
}

LinearModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != "gesture-model v1")
        throw ParseError("model file '" + path + "' has an unknown format line");

    LinearModel model;
    std::string token;
    in >> token;
    if (token != "kind") throw ParseError("model file: expected 'kind'");
    in >> token;
    model.kind = token == "static" ? GestureKind::Static : GestureKind::Dynamic;

    in >> token;
    if (token != "labels") throw ParseError("model file: expected 'labels'");
    for (GestureLabel expected : labels_of(model.kind)) {
        in >> token;
        model.labels.push_back(label_from_string(token));
        (void)expected;
    }
    Eigen::Index dims = 0;
    in >> token >> dims;
    if (token != "dims" || dims <= 0) throw ParseError("model file: bad 'dims' header");

    model.feature_mean.resize(dims);
    model.feature_scale.resize(dims);
    in >> token;
    if (token != "mean") throw ParseError("model file: expected 'mean'");
    for (Eigen::Index i = 0; i < dims; ++i) in >> model.feature_mean[i];
    in >> token;
    if (token != "scale") throw ParseError("model file: expected 'scale'");
    for (Eigen::Index i = 0; i < dims; ++i) in >> model.feature_scale[i];

    const int classes = static_cast<int>(model.labels.size());
    model.weights.resize(classes, dims);
    model.bias.resize(classes);
    for (int c = 0; c < classes; ++c) {
        in >> token;
        if (token != "class") throw ParseError("model file: expected 'class' record");
        in >> token; // label, already known from the header order
        in >> model.bias[c];
        for (Eigen::Index i = 0; i < dims; ++i) in >> model.weights(c, i);
    }
    if (in.fail()) throw ParseError("model file '" + path + "' is truncated");
    return model;
}

Corpus load_corpus(const std::string& directory) {
    const fs::path dir(directory);
    const fs::path manifest = dir / "manifest.txt";
    std::ifstream in(manifest);
    if (!in) throw ParseError("cannot open corpus manifest '" + manifest.string() + "'");

    Corpus corpus;
    bool kind_known = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream s(line);
        std::string label_name;
        s >> label_name;
        CorpusItem item;
        item.label = label_from_string(label_name);

        std::string frame_path;
        while (s >> frame_path) {
            const fs::path full = dir / frame_path;
            Mask mask;
            if (full.extension() == ".csv")
                mask = read_mask_csv(full.string());
            else
                mask = mask_from_gray(read_pgm(full.string()));
            item.frames.push_back(make_frame(std::move(mask)));
        }
        if (item.frames.empty())
            throw ParseError("corpus manifest line " + std::to_string(line_no) +
                             " names no frames");
        const GestureKind kind = is_static(item.label) ? GestureKind::Static : GestureKind::Dynamic;
        if (!kind_known) {
            corpus.kind = kind;
            kind_known = true;
        } else if (corpus.kind != kind) {
            throw ParseError("corpus mixes static and dynamic gesture labels");
        }
        corpus.items.push_back(std::move(item));
    }
    if (corpus.items.empty()) throw ParseError("corpus manifest lists no items");
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& directory) {
    const fs::path dir(directory);
    fs::create_directories(dir);
    std::ofstream manifest(dir / "manifest.txt", std::ios::binary);
    if (!manifest) throw ParseError("cannot write corpus manifest in '" + directory + "'");
    int item_no = 0;
    for (const CorpusItem& item : corpus.items) {
        manifest << to_string(item.label);
        int frame_no = 0;
        for (const ContactFrame& frame : item.frames) {
            char name[64];
            std::snprintf(name, sizeof name, "item%04d_f%d.pgm", item_no, frame_no++);
            write_pgm(gray_from_mask(frame.mask), (dir / name).string());
            manifest << " " << name;
        }
        manifest << "\n";
        ++item_no;
    }
    if (!manifest) throw ParseError("write of corpus manifest failed");
}

std::vector<Example> corpus_features(const Corpus& corpus, const FeatureOptions& options) {
    const std::vector<GestureLabel> labels = labels_of(corpus.kind);
    std::vector<Example> examples;
    examples.reserve(corpus.items.size());
    for (const CorpusItem& item : corpus.items) {
        Example e;
        const auto it = std::find(labels.begin(), labels.end(), item.label);
        e.label_index = static_cast<int>(it - labels.begin());
        if (corpus.kind == GestureKind::Static)
            e.features = extract_static_features(item.frames.front(), options);
        else
            e.features = extract_dynamic_features(item.frames, options);
        examples.push_back(std::move(e));
    }
    return examples;
}

} // namespace hapsurf::gesture
