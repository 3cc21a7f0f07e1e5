#include "field.hpp"

#include <algorithm>
#include <cmath>

namespace unireg {

namespace {

// Enumerates the 2^d corners of the cell containing pos and their weights.
template <typename Fn>
void for_each_corner(const std::vector<int>& extents, const std::vector<double>& pos, Fn&& fn) {
    const int d = static_cast<int>(extents.size());
    std::vector<int> lo(d);
    std::vector<double> frac(d);
    for (int a = 0; a < d; ++a) {
        double p = std::clamp(pos[a], 0.0, static_cast<double>(extents[a] - 1));
        int c = static_cast<int>(std::floor(p));
        c = std::min(c, extents[a] - 2);
        c = std::max(c, 0);
        lo[a] = c;
        frac[a] = (extents[a] == 1) ? 0.0 : p - c;
    }
    std::vector<int> idx(d);
    for (int corner = 0; corner < (1 << d); ++corner) {
        double w = 1.0;
        for (int a = 0; a < d; ++a) {
            const bool hi = (corner >> a) & 1;
            idx[a] = lo[a] + (hi ? 1 : 0);
            if (idx[a] > extents[a] - 1) idx[a] = extents[a] - 1;
            w *= hi ? frac[a] : 1.0 - frac[a];
        }
        fn(idx, w);
    }
}

}  // namespace

double ScalarField::sample_linear(const std::vector<double>& pos) const {
    double acc = 0.0;
    for_each_corner(extents, pos, [&](const std::vector<int>& idx, double w) {
        acc += w * values[linear_index(extents, idx)];
    });
    return acc;
}

double ScalarField::sample_nearest(const std::vector<double>& pos, double background) const {
    std::vector<int> idx(extents.size());
    for (size_t a = 0; a < extents.size(); ++a) {
        long r = std::lround(pos[a]);
        if (r < 0 || r > extents[a] - 1) return background;
        idx[a] = static_cast<int>(r);
    }
    return values[linear_index(extents, idx)];
}

int32_t LabelField::sample_nearest(const std::vector<double>& pos, int32_t background) const {
    std::vector<int> idx(extents.size());
    for (size_t a = 0; a < extents.size(); ++a) {
        long r = std::lround(pos[a]);
        if (r < 0 || r > extents[a] - 1) return background;
        idx[a] = static_cast<int>(r);
    }
    return values[linear_index(extents, idx)];
}

ScalarField normalize_intensity(const ScalarField& field) {
    ScalarField out = field;
    std::vector<double> sorted = field.values;
    std::sort(sorted.begin(), sorted.end());
    const auto percentile = [&](double p) {
        const double t = p / 100.0 * (sorted.size() - 1);
        const size_t lo = static_cast<size_t>(std::floor(t));
        const size_t hi = std::min(lo + 1, sorted.size() - 1);
        return sorted[lo] + (t - lo) * (sorted[hi] - sorted[lo]);
    };
    const double lo = percentile(0.5);
    const double hi = percentile(99.5);
    if (hi <= lo) {
        std::fill(out.values.begin(), out.values.end(), 0.5);
        return out;
    }
    for (double& v : out.values) v = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
    return out;
}

}  // namespace unireg
