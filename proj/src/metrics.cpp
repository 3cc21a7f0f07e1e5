#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace unireg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> sample_displacement(const DisplacementField& field,
                                        const std::vector<double>& pos) {
    const int d = field.dim();
    std::vector<int> lo(d);
    std::vector<double> frac(d);
    for (int a = 0; a < d; ++a) {
        double p = std::clamp(pos[a], 0.0, static_cast<double>(field.extents[a] - 1));
        int c = std::clamp(static_cast<int>(std::floor(p)), 0, std::max(field.extents[a] - 2, 0));
        lo[a] = c;
        frac[a] = (field.extents[a] == 1) ? 0.0 : p - c;
    }
    std::vector<double> out(d, 0.0);
    std::vector<int> idx(d);
    for (int corner = 0; corner < (1 << d); ++corner) {
        double w = 1.0;
        for (int a = 0; a < d; ++a) {
            const bool hi = (corner >> a) & 1;
            idx[a] = std::min(lo[a] + (hi ? 1 : 0), field.extents[a] - 1);
            w *= hi ? frac[a] : 1.0 - frac[a];
        }
        const double* dv = field.at(linear_index(field.extents, idx));
        for (int a = 0; a < d; ++a) out[a] += w * dv[a];
    }
    return out;
}

std::vector<bool> boundary_mask(const LabelField& mask) {
    const int d = mask.dim();
    const long n = mask.count();
    std::vector<bool> boundary(n, false);
    std::vector<int> idx(d, 0);
    for (long lin = 0; lin < n; ++lin) {
        if (mask.values[lin] != 0) {
            bool edge = false;
            for (int a = 0; a < d && !edge; ++a) {
                for (int dir = -1; dir <= 1 && !edge; dir += 2) {
                    const int nb = idx[a] + dir;
                    if (nb < 0 || nb >= mask.extents[a]) {
                        edge = true;
                        break;
                    }
                    std::vector<int> nidx = idx;
                    nidx[a] = nb;
                    if (mask.values[linear_index(mask.extents, nidx)] == 0) edge = true;
                }
            }
            boundary[lin] = edge;
        }
        for (int a = d - 1; a >= 0; --a) {
            if (++idx[a] < mask.extents[a]) break;
            idx[a] = 0;
        }
    }
    return boundary;
}

// Exceeds any reachable squared distance; a parabola rooted this high never
// wins inside the grid, so the plain lower-envelope algorithm stays exact.
constexpr double kFar = 1e15;

// 1-D squared-distance transform over samples at positions i*s (Felzenszwalb
// & Huttenlocher lower-envelope algorithm).
void dt1d(std::vector<double>& f, double s) {
    const int n = static_cast<int>(f.size());
    if (n == 1) return;
    std::vector<int> v(n, 0);
    std::vector<double> z(n + 1, 0.0);
    std::vector<double> out(n);
    int k = 0;
    z[0] = -kInf;
    z[1] = kInf;
    const auto intersect = [&](int q, int p) {
        const double qp = q * s, pp = p * s;
        return ((f[q] + qp * qp) - (f[p] + pp * pp)) / (2.0 * qp - 2.0 * pp);
    };
    for (int q = 1; q < n; ++q) {
        double inter = intersect(q, v[k]);
        while (k > 0 && inter <= z[k]) {
            --k;
            inter = intersect(q, v[k]);
        }
        if (k == 0 && inter <= z[0]) {
            v[0] = q;
        } else {
            ++k;
            v[k] = q;
            z[k] = inter;
        }
        z[k + 1] = kInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        const double qp = q * s;
        while (z[k + 1] < qp) ++k;
        const double diff = qp - v[k] * s;
        out[q] = diff * diff + f[v[k]];
    }
    f = out;
}

// Exact Euclidean squared-distance transform with anisotropic spacing.
std::vector<double> squared_edt(const std::vector<bool>& seeds, const std::vector<int>& extents,
                                const std::vector<double>& spacing) {
    const int d = static_cast<int>(extents.size());
    const long n = element_count(extents);
    std::vector<double> dist2(n);
    for (long i = 0; i < n; ++i) dist2[i] = seeds[i] ? 0.0 : kFar;

    for (int axis = 0; axis < d; ++axis) {
        long stride = 1;
        for (int a = axis + 1; a < d; ++a) stride *= extents[a];
        const long len = extents[axis];
        const long lines = n / len;
        std::vector<double> line(len);
        for (long l = 0; l < lines; ++l) {
            // base index of this line: decompose l over the non-axis extents
            long rem = l;
            long base = 0;
            for (int a = d - 1; a >= 0; --a) {
                if (a == axis) continue;
                const long coord = rem % extents[a];
                rem /= extents[a];
                long astride = 1;
                for (int b = a + 1; b < d; ++b) astride *= extents[b];
                base += coord * astride;
            }
            for (long i = 0; i < len; ++i) line[i] = dist2[base + i * stride];
            dt1d(line, spacing[axis]);
            for (long i = 0; i < len; ++i) dist2[base + i * stride] = line[i];
        }
    }
    return dist2;
}

double percentile(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    const double t = p / 100.0 * (values.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(t));
    const size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (t - lo) * (values[hi] - values[lo]);
}

}  // namespace

PointMap point_map_from_warp(const GroundTruthWarp& warp) {
    return [warp](const std::vector<double>& p) { return warp.map(p); };
}

PointMap point_map_from_field(const DisplacementField& field) {
    return [field](const std::vector<double>& p) {
        std::vector<double> disp = sample_displacement(field, p);
        std::vector<double> out(p.size());
        for (size_t a = 0; a < p.size(); ++a) out[a] = p[a] + disp[a];
        return out;
    };
}

double corner_relative_distance(const PointMap& estimated, const PointMap& ground_truth,
                                const std::vector<int>& extents) {
    if (extents.size() != 2)
        throw std::invalid_argument("corner_relative_distance expects 2D extents");
    const double h = extents[0] - 1, w = extents[1] - 1;
    const std::vector<std::vector<double>> corners = {
        {0.0, 0.0}, {0.0, w}, {h, 0.0}, {h, w}};
    double sum = 0.0;
    for (const auto& c : corners) {
        const std::vector<double> pe = estimated(c);
        const std::vector<double> pg = ground_truth(c);
        double d2 = 0.0;
        for (size_t a = 0; a < pe.size(); ++a) d2 += (pe[a] - pg[a]) * (pe[a] - pg[a]);
        sum += std::sqrt(d2);
    }
    const double side = std::max(extents[0], extents[1]);
    return 100.0 * (sum / 4.0) / side;
}

double success_rate(const std::vector<double>& distances, double threshold) {
    if (distances.empty()) throw std::invalid_argument("success_rate: empty distance list");
    if (threshold <= 0.0) throw std::invalid_argument("success_rate: threshold must be > 0");
    long hits = 0;
    for (double d : distances)
        if (d < threshold) ++hits;
    return static_cast<double>(hits) / distances.size();
}

double dice(const LabelField& a, const LabelField& b) {
    if (a.extents != b.extents) throw std::invalid_argument("dice: geometry mismatch");
    long na = 0, nb = 0, inter = 0;
    for (long i = 0; i < a.count(); ++i) {
        const bool ia = a.values[i] != 0, ib = b.values[i] != 0;
        na += ia;
        nb += ib;
        inter += ia && ib;
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * inter / static_cast<double>(na + nb);
}

double dice_label(const LabelField& a, const LabelField& b, int32_t label) {
    if (a.extents != b.extents) throw std::invalid_argument("dice: geometry mismatch");
    long na = 0, nb = 0, inter = 0;
    for (long i = 0; i < a.count(); ++i) {
        const bool ia = a.values[i] == label, ib = b.values[i] == label;
        na += ia;
        nb += ib;
        inter += ia && ib;
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * inter / static_cast<double>(na + nb);
}

double weighted_dice(const std::vector<double>& per_label_dice,
                     const std::vector<long>& per_label_counts) {
    if (per_label_dice.size() != per_label_counts.size())
        throw std::invalid_argument("weighted_dice: size mismatch");
    double num = 0.0;
    long denom = 0;
    for (size_t i = 0; i < per_label_dice.size(); ++i) {
        num += per_label_counts[i] * per_label_dice[i];
        denom += per_label_counts[i];
    }
    if (denom == 0) throw std::invalid_argument("weighted_dice: zero total count");
    return num / denom;
}

double hd95(const LabelField& a, const LabelField& b, const std::vector<double>& spacing) {
    if (a.extents != b.extents) throw std::invalid_argument("hd95: geometry mismatch");
    if (spacing.size() != a.extents.size()) throw std::invalid_argument("hd95: spacing mismatch");
    const std::vector<bool> ba = boundary_mask(a);
    const std::vector<bool> bb = boundary_mask(b);
    const bool any_a = std::find(ba.begin(), ba.end(), true) != ba.end();
    const bool any_b = std::find(bb.begin(), bb.end(), true) != bb.end();
    if (!any_a || !any_b) throw std::invalid_argument("hd95: empty mask");

    const std::vector<double> da = squared_edt(ba, a.extents, spacing);
    const std::vector<double> db = squared_edt(bb, a.extents, spacing);

    std::vector<double> pooled;
    for (long i = 0; i < a.count(); ++i) {
        if (ba[i]) pooled.push_back(std::sqrt(db[i]));
        if (bb[i]) pooled.push_back(std::sqrt(da[i]));
    }
    return percentile(std::move(pooled), 95.0);
}

Aggregate aggregate(const std::vector<double>& values) {
    Aggregate agg;
    if (values.empty()) return agg;
    for (double v : values) agg.mean += v;
    agg.mean /= values.size();
    double var = 0.0;
    for (double v : values) var += (v - agg.mean) * (v - agg.mean);
    agg.stddev = std::sqrt(var / values.size());
    return agg;
}

}  // namespace unireg
