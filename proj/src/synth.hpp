#pragma once

#include <cstdint>
#include <vector>

#include "field.hpp"
#include "model.hpp"
#include "warp_spec.hpp"

namespace unireg {

// Band-limited random texture: a seeded sum of Gaussian blobs, min-max
// normalized to [0,1].
ScalarField random_texture(const std::vector<int>& extents, uint64_t seed);

struct PairSample {
    ScalarField fixed;
    ScalarField transformed;
    GroundTruthWarp warp;
};

enum class PairModality { same, remap };

// transformed(x) = fixed(warp.map(x)) + noise; `remap` additionally applies
// the monotone intensity remap 1 - sqrt(v) (pseudo second modality).
PairSample generate_pair(const GroundTruthWarp& warp, uint64_t texture_seed,
                         PairModality modality, double noise_level);

// Preset rigid motion levels 1..4: translations {2, 5, 10, 18}% of width,
// rotations {0, 2, 5, 10} degrees, direction/sign drawn from the seed.
GroundTruthWarp rigid_level_preset(int level, const std::vector<int>& extents, uint64_t seed);

// 2-3 random ellipsoids labelled 1..count over background 0.
LabelField ellipsoid_labels(const std::vector<int>& extents, uint64_t seed, int count = 3);

}  // namespace unireg
