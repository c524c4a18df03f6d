#pragma once

#include "hapsurf/gesture/classify.hpp"
#include "hapsurf/gesture/image.hpp"
#include "hapsurf/rng.hpp"

#include <cstdint>
#include <vector>

namespace hapsurf::gesture {

/// Parameterized silhouette generator standing in for camera-collected
/// data: posed hand shapes (palm, fingers, forearm reaching the bounding
/// circle) under random rigid transforms plus scale, and four-frame contact
/// sequences with the defining motion of each dynamic class.
struct SynthOptions {
    int width = 640;
    int height = 480;
    std::uint64_t seed = 1;
    int per_class = 30;
};

ContactFrame make_static_frame(Rng& rng, GestureLabel label, int width = 640, int height = 480);
std::vector<ContactFrame> make_dynamic_sequence(Rng& rng, GestureLabel label, int width = 640,
                                                int height = 480);

Corpus make_static_corpus(const SynthOptions& options);
Corpus make_dynamic_corpus(const SynthOptions& options);

} // namespace hapsurf::gesture
