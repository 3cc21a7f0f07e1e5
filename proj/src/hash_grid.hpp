#pragma once

#include <cstdint>
#include <vector>

namespace unireg {

struct HashGridConfig {
    int dimension = 2;            // d, 2 or 3
    int levels = 8;               // N
    int features_per_level = 2;   // F
    int table_size = 1 << 14;     // T, power of two
    int base_resolution = 2;      // n_min, cells per axis
    int finest_resolution = 64;   // n_max, cells per axis

    int feature_dim() const { return levels * features_per_level; }
    // Throws std::invalid_argument on violated invariants.
    void validate() const;
};

// floor(n_min * b^i) with b chosen so level N-1 lands on n_max.
int resolution_at_level(const HashGridConfig& config, int level);

// Dense row-major index when (res+1)^d fits in the table, spatial hash
// (XOR of per-axis coordinate * prime, axis 0 prime = 1) otherwise.
uint32_t cell_index(const int* vertex, int dimension, int resolution, int table_size);

struct HashGridParams {
    std::vector<double> tables;  // levels * table_size * features_per_level

    // Uniform init in [-1e-4, 1e-4].
    static HashGridParams init(const HashGridConfig& config, uint64_t seed);
};

struct LevelWeights {
    std::vector<double> w;  // one per level, in [0,1], non-increasing

    static LevelWeights ones(int levels) { return LevelWeights{std::vector<double>(levels, 1.0)}; }
};

// coord is in [0,1]^d (clamped internally); out has feature_dim() entries,
// level blocks concatenated coarse to fine, each scaled by its weight.
void grid_encode(const double* coord, const HashGridConfig& config, const HashGridParams& params,
                 const LevelWeights& weights, double* out);

// Accumulates table gradients into table_grad (same layout as params.tables)
// and writes the gradient with respect to coord into coord_grad (d entries).
// coord_grad is zero on axes where the coordinate was clamped.
void grid_encode_backward(const double* coord, const HashGridConfig& config,
                          const HashGridParams& params, const LevelWeights& weights,
                          const double* upstream, double* table_grad, double* coord_grad);

}  // namespace unireg
