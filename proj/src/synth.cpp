#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace unireg {

ScalarField random_texture(const std::vector<int>& extents, uint64_t seed) {
    ScalarField field(extents);
    const int d = field.dim();
    const long n = field.count();
    const int min_extent = *std::min_element(extents.begin(), extents.end());

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int blobs = std::max(12, static_cast<int>(n / (d == 2 ? 120 : 600)));
    std::vector<std::vector<double>> centers(blobs, std::vector<double>(d));
    std::vector<double> sigmas(blobs), amps(blobs);
    for (int b = 0; b < blobs; ++b) {
        for (int a = 0; a < d; ++a) centers[b][a] = unit(rng) * (extents[a] - 1);
        sigmas[b] = (0.03 + 0.12 * unit(rng)) * min_extent;
        amps[b] = 2.0 * unit(rng) - 1.0;
    }

    std::vector<int> idx(d, 0);
    for (long lin = 0; lin < n; ++lin) {
        double v = 0.0;
        for (int b = 0; b < blobs; ++b) {
            double r2 = 0.0;
            for (int a = 0; a < d; ++a) {
                const double dd = idx[a] - centers[b][a];
                r2 += dd * dd;
            }
            v += amps[b] * std::exp(-r2 / (2.0 * sigmas[b] * sigmas[b]));
        }
        field.values[lin] = v;
        for (int a = d - 1; a >= 0; --a) {
            if (++idx[a] < extents[a]) break;
            idx[a] = 0;
        }
    }

    const auto [lo_it, hi_it] = std::minmax_element(field.values.begin(), field.values.end());
    const double lo = *lo_it, span = *hi_it - *lo_it;
    if (span <= 0.0) {
        std::fill(field.values.begin(), field.values.end(), 0.5);
        return field;
    }
    for (double& v : field.values) v = (v - lo) / span;
    return field;
}

PairSample generate_pair(const GroundTruthWarp& warp, uint64_t texture_seed,
                         PairModality modality, double noise_level) {
    warp.validate();
    PairSample pair;
    pair.warp = warp;
    pair.fixed = random_texture(warp.extents, texture_seed);
    pair.fixed.spacing = warp.spacing;
    pair.transformed = ScalarField(warp.extents);
    pair.transformed.spacing = warp.spacing;

    const bool identity = warp.kind == GroundTruthWarp::Kind::rigid &&
                          warp.rotation_deg == 0.0 && warp.scale == 1.0 &&
                          std::all_of(warp.translation_px.begin(), warp.translation_px.end(),
                                      [](double t) { return t == 0.0; });
    const int d = pair.fixed.dim();
    const long n = pair.fixed.count();
    std::mt19937_64 rng(texture_seed ^ 0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> noise(0.0, 1.0);

    std::vector<int> idx(d, 0);
    std::vector<double> point(d);
    for (long lin = 0; lin < n; ++lin) {
        double v;
        if (identity) {
            v = pair.fixed.values[lin];
        } else {
            for (int a = 0; a < d; ++a) point[a] = idx[a];
            v = pair.fixed.sample_linear(warp.map(point));
        }
        if (noise_level > 0.0) v = std::clamp(v + noise_level * noise(rng), 0.0, 1.0);
        if (modality == PairModality::remap) v = 1.0 - std::sqrt(std::max(v, 0.0));
        pair.transformed.values[lin] = v;
        for (int a = d - 1; a >= 0; --a) {
            if (++idx[a] < warp.extents[a]) break;
            idx[a] = 0;
        }
    }
    return pair;
}

GroundTruthWarp rigid_level_preset(int level, const std::vector<int>& extents, uint64_t seed) {
    if (level < 1 || level > 4) throw std::invalid_argument("rigid level must be in 1..4");
    static const double kTranslationPct[4] = {2.0, 5.0, 10.0, 18.0};
    static const double kRotationDeg[4] = {0.0, 2.0, 5.0, 10.0};

    const int d = static_cast<int>(extents.size());
    const double width = extents[d - 1];
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    GroundTruthWarp w;
    w.kind = GroundTruthWarp::Kind::rigid;
    w.extents = extents;
    w.spacing.assign(d, 1.0);
    w.translation_px.assign(d, 0.0);
    const double mag = kTranslationPct[level - 1] / 100.0 * width;
    if (d == 2) {
        const double theta = 2.0 * M_PI * unit(rng);
        w.translation_px[0] = mag * std::sin(theta);
        w.translation_px[1] = mag * std::cos(theta);
    } else {
        double norm2 = 0.0;
        for (int a = 0; a < d; ++a) {
            w.translation_px[a] = 2.0 * unit(rng) - 1.0;
            norm2 += w.translation_px[a] * w.translation_px[a];
        }
        const double norm = std::sqrt(std::max(norm2, 1e-12));
        for (int a = 0; a < d; ++a) w.translation_px[a] *= mag / norm;
    }
    w.rotation_deg = (unit(rng) < 0.5 ? -1.0 : 1.0) * kRotationDeg[level - 1];
    w.scale = 1.0;
    return w;
}

LabelField ellipsoid_labels(const std::vector<int>& extents, uint64_t seed, int count) {
    LabelField labels(extents);
    const int d = labels.dim();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<std::vector<double>> centers(count, std::vector<double>(d));
    std::vector<std::vector<double>> semi(count, std::vector<double>(d));
    for (int k = 0; k < count; ++k) {
        for (int a = 0; a < d; ++a) {
            centers[k][a] = (0.25 + 0.5 * unit(rng)) * (extents[a] - 1);
            semi[k][a] = (0.08 + 0.12 * unit(rng)) * (extents[a] - 1);
        }
    }

    std::vector<int> idx(d, 0);
    const long n = labels.count();
    for (long lin = 0; lin < n; ++lin) {
        for (int k = 0; k < count; ++k) {
            double q = 0.0;
            for (int a = 0; a < d; ++a) {
                const double dd = (idx[a] - centers[k][a]) / semi[k][a];
                q += dd * dd;
            }
            if (q <= 1.0) labels.values[lin] = k + 1;
        }
        for (int a = d - 1; a >= 0; --a) {
            if (++idx[a] < extents[a]) break;
            idx[a] = 0;
        }
    }
    return labels;
}

}  // namespace unireg
