#include "hash_grid.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace unireg {

namespace {

constexpr uint32_t kHashPrimes[3] = {1u, 2654435761u, 805459861u};
constexpr int kMaxDim = 3;

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

bool dense_fits(int dimension, int resolution, int table_size) {
    long vertices = 1;
    for (int a = 0; a < dimension; ++a) {
        vertices *= resolution + 1;
        if (vertices > table_size) return false;
    }
    return true;
}

}  // namespace

void HashGridConfig::validate() const {
    if (dimension != 2 && dimension != 3) throw std::invalid_argument("grid dimension must be 2 or 3");
    if (levels < 1) throw std::invalid_argument("grid levels must be >= 1");
    if (features_per_level < 1) throw std::invalid_argument("features_per_level must be >= 1");
    if (!is_power_of_two(table_size)) throw std::invalid_argument("table_size must be a power of two");
    if (base_resolution < 1) throw std::invalid_argument("base_resolution must be >= 1");
    if (finest_resolution < base_resolution)
        throw std::invalid_argument("finest_resolution must be >= base_resolution");
    if (levels == 1 && finest_resolution != base_resolution)
        throw std::invalid_argument("a single-level grid requires finest == base resolution");
}

int resolution_at_level(const HashGridConfig& config, int level) {
    if (config.levels == 1 || config.finest_resolution == config.base_resolution)
        return config.base_resolution;
    const double b = std::exp((std::log(static_cast<double>(config.finest_resolution)) -
                               std::log(static_cast<double>(config.base_resolution))) /
                              (config.levels - 1));
    const double r = config.base_resolution * std::pow(b, level);
    int res = static_cast<int>(std::floor(r + 1e-9));
    return std::clamp(res, config.base_resolution, config.finest_resolution);
}

uint32_t cell_index(const int* vertex, int dimension, int resolution, int table_size) {
    if (dense_fits(dimension, resolution, table_size)) {
        uint32_t idx = 0;
        for (int a = 0; a < dimension; ++a)
            idx = idx * static_cast<uint32_t>(resolution + 1) + static_cast<uint32_t>(vertex[a]);
        return idx;
    }
    uint32_t h = 0;
    for (int a = 0; a < dimension; ++a) h ^= static_cast<uint32_t>(vertex[a]) * kHashPrimes[a];
    return h & static_cast<uint32_t>(table_size - 1);
}

HashGridParams HashGridParams::init(const HashGridConfig& config, uint64_t seed) {
    config.validate();
    HashGridParams params;
    params.tables.resize(static_cast<size_t>(config.levels) * config.table_size *
                         config.features_per_level);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1e-4, 1e-4);
    for (double& v : params.tables) v = dist(rng);
    return params;
}

void grid_encode(const double* coord, const HashGridConfig& config, const HashGridParams& params,
                 const LevelWeights& weights, double* out) {
    const int d = config.dimension;
    const int F = config.features_per_level;
    double x[kMaxDim];
    for (int a = 0; a < d; ++a) x[a] = std::clamp(coord[a], 0.0, 1.0);

    std::fill(out, out + config.feature_dim(), 0.0);
    for (int level = 0; level < config.levels; ++level) {
        const double wl = weights.w[level];
        if (wl == 0.0) continue;
        const int res = resolution_at_level(config, level);
        int cell[kMaxDim];
        double frac[kMaxDim];
        for (int a = 0; a < d; ++a) {
            const double p = x[a] * res;
            cell[a] = std::min(static_cast<int>(p), res - 1);
            frac[a] = p - cell[a];
        }
        const double* table = params.tables.data() +
                              static_cast<size_t>(level) * config.table_size * F;
        double* block = out + static_cast<size_t>(level) * F;
        for (int corner = 0; corner < (1 << d); ++corner) {
            int vert[kMaxDim];
            double w = wl;
            for (int a = 0; a < d; ++a) {
                const bool hi = (corner >> a) & 1;
                vert[a] = cell[a] + (hi ? 1 : 0);
                w *= hi ? frac[a] : 1.0 - frac[a];
            }
            const double* row = table + static_cast<size_t>(cell_index(vert, d, res, config.table_size)) * F;
            for (int f = 0; f < F; ++f) block[f] += w * row[f];
        }
    }
}

void grid_encode_backward(const double* coord, const HashGridConfig& config,
                          const HashGridParams& params, const LevelWeights& weights,
                          const double* upstream, double* table_grad, double* coord_grad) {
    const int d = config.dimension;
    const int F = config.features_per_level;
    double x[kMaxDim];
    bool clamped[kMaxDim];
    for (int a = 0; a < d; ++a) {
        clamped[a] = coord[a] < 0.0 || coord[a] > 1.0;
        x[a] = std::clamp(coord[a], 0.0, 1.0);
    }

    if (coord_grad) std::fill(coord_grad, coord_grad + d, 0.0);
    for (int level = 0; level < config.levels; ++level) {
        const double wl = weights.w[level];
        if (wl == 0.0) continue;
        const int res = resolution_at_level(config, level);
        int cell[kMaxDim];
        double frac[kMaxDim];
        for (int a = 0; a < d; ++a) {
            const double p = x[a] * res;
            cell[a] = std::min(static_cast<int>(p), res - 1);
            frac[a] = p - cell[a];
        }
        const double* table = params.tables.data() +
                              static_cast<size_t>(level) * config.table_size * F;
        double* tgrad = table_grad ? table_grad + static_cast<size_t>(level) * config.table_size * F
                                   : nullptr;
        const double* up = upstream + static_cast<size_t>(level) * F;
        for (int corner = 0; corner < (1 << d); ++corner) {
            int vert[kMaxDim];
            double w = 1.0;
            for (int a = 0; a < d; ++a) {
                const bool hi = (corner >> a) & 1;
                vert[a] = cell[a] + (hi ? 1 : 0);
                w *= hi ? frac[a] : 1.0 - frac[a];
            }
            const size_t row = static_cast<size_t>(cell_index(vert, d, res, config.table_size)) * F;
            double dot = 0.0;
            for (int f = 0; f < F; ++f) {
                dot += table[row + f] * up[f];
                if (tgrad) tgrad[row + f] += wl * w * up[f];
            }
            if (coord_grad) {
                for (int a = 0; a < d; ++a) {
                    if (clamped[a]) continue;
                    // d(weight)/d(frac_a) = +/- product of the other axes' factors.
                    double dw = 1.0;
                    for (int b2 = 0; b2 < d; ++b2) {
                        if (b2 == a) continue;
                        dw *= ((corner >> b2) & 1) ? frac[b2] : 1.0 - frac[b2];
                    }
                    const double sign = ((corner >> a) & 1) ? 1.0 : -1.0;
                    coord_grad[a] += wl * res * sign * dw * dot;
                }
            }
        }
    }
}

}  // namespace unireg
