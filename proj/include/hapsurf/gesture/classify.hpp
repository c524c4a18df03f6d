#pragma once

#include "hapsurf/gesture/image.hpp"
#include "hapsurf/gesture/pose.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace hapsurf::gesture {

enum class GestureLabel {
    OneFinger,
    TwoFinger,
    LShape,
    ClosedHand,
    OpenHand,
    Drag,
    Rotate,
    SpreadPile,
    Wipe,
    Zoom,
};

enum class GestureKind { Static, Dynamic };

std::string to_string(GestureLabel label);
GestureLabel label_from_string(const std::string& name);
bool is_static(GestureLabel label);
std::vector<GestureLabel> labels_of(GestureKind kind);

struct GateOptions {
    double min_displacement_px = 5.0;
    double min_rotation_deg = 5.0;
};

/// Static/dynamic split over a sliding window of >= 2 frames: dynamic when
/// the contact centroid travels farther than min_displacement_px or the
/// principal axis turns more than min_rotation_deg across the window.
GestureKind gate(const std::vector<ContactFrame>& window, const GateOptions& options = {});

struct FeatureOptions {
    int harmonics = 10;
    int dynamic_harmonics = 6;
    double fingertip_area_min_px = 60.0;
    double fingertip_area_max_px = 1300.0;
    PoseOptions pose;
};

/// Normalized contour descriptor of the canonicalized (wrist-free) pose.
Eigen::VectorXd extract_static_features(const ContactFrame& frame,
                                        const FeatureOptions& options = {});

/// Descriptor of the first frame plus contact counts and a per-contact
/// trajectory summary (displacement coherence, rotation, radial growth).
Eigen::VectorXd extract_dynamic_features(const std::vector<ContactFrame>& frames,
                                         const FeatureOptions& options = {});

int count_fingertips(const ContactFrame& frame, const FeatureOptions& options = {});

/// One-vs-rest linear maximum-margin model with per-feature standardization.
struct LinearModel {
    GestureKind kind = GestureKind::Static;
    std::vector<GestureLabel> labels;
    Eigen::MatrixXd weights; // classes x dims
    Eigen::VectorXd bias;
    Eigen::VectorXd feature_mean;
    Eigen::VectorXd feature_scale;

    bool trained() const { return weights.size() > 0; }
    Eigen::VectorXd scores(const Eigen::VectorXd& features) const;
};

struct Prediction {
    GestureLabel label = GestureLabel::OneFinger;
    double score = 0.0;
    Eigen::VectorXd scores;
};

Prediction classify_static(const Eigen::VectorXd& descriptor, const LinearModel& model);
Prediction classify_dynamic(const std::vector<ContactFrame>& first_four_frames,
                            const LinearModel& model, const FeatureOptions& options = {});

struct Example {
    Eigen::VectorXd features;
    int label_index = 0;
};

struct TrainOptions {
    int epochs = 150;
    double lambda = 1e-3;
    std::uint64_t seed = 1;
};

struct CvReport {
    double accuracy = 0.0;
    Eigen::MatrixXi confusion; // rows true, cols predicted
};

struct TrainResult {
    LinearModel model;
    CvReport cv;
};

/// Deterministic subgradient training with a two-fold cross-validated
/// accuracy report; the returned model is fit on the full set. Throws
/// ConfigError when any class has fewer than two examples.
TrainResult train(const std::vector<Example>& examples, const std::vector<GestureLabel>& labels,
                  GestureKind kind, const TrainOptions& options = {});

void save_model(const LinearModel& model, const std::string& path);
LinearModel load_model(const std::string& path);

/// A corpus directory holds frame images plus manifest.txt with one line
/// per item: "<label> <frame.pgm> [frame2 frame3 frame4]".
struct CorpusItem {
    GestureLabel label = GestureLabel::OneFinger;
    std::vector<ContactFrame> frames;
};

struct Corpus {
    GestureKind kind = GestureKind::Static;
    std::vector<CorpusItem> items;
};

Corpus load_corpus(const std::string& directory);
void save_corpus(const Corpus& corpus, const std::string& directory);

/// Feature extraction over a whole corpus, in item order.
std::vector<Example> corpus_features(const Corpus& corpus, const FeatureOptions& options = {});

} // namespace hapsurf::gesture
