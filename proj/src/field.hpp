#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace unireg {

// Row-major, axis 0 slowest. 2D fields use extents {rows, cols}.
inline long element_count(const std::vector<int>& extents) {
    long n = 1;
    for (int e : extents) {
        if (e < 1) throw std::invalid_argument("extent must be >= 1");
        n *= e;
    }
    return n;
}

inline long linear_index(const std::vector<int>& extents, const std::vector<int>& idx) {
    long lin = 0;
    for (size_t a = 0; a < extents.size(); ++a) lin = lin * extents[a] + idx[a];
    return lin;
}

struct ScalarField {
    std::vector<int> extents;
    std::vector<double> spacing;  // mm/voxel per axis
    std::vector<double> values;

    ScalarField() = default;
    ScalarField(std::vector<int> ext, double fill = 0.0)
        : extents(std::move(ext)),
          spacing(extents.size(), 1.0),
          values(element_count(extents), fill) {}

    int dim() const { return static_cast<int>(extents.size()); }
    long count() const { return static_cast<long>(values.size()); }

    double& at(const std::vector<int>& idx) { return values[linear_index(extents, idx)]; }
    double at(const std::vector<int>& idx) const { return values[linear_index(extents, idx)]; }

    // Multi-linear interpolation at a voxel-unit position; clamped at the borders.
    double sample_linear(const std::vector<double>& pos) const;
    // Nearest-neighbor sample; returns `background` when out of bounds.
    double sample_nearest(const std::vector<double>& pos, double background = 0.0) const;
};

struct LabelField {
    std::vector<int> extents;
    std::vector<double> spacing;
    std::vector<int32_t> values;  // 0 = background

    LabelField() = default;
    explicit LabelField(std::vector<int> ext)
        : extents(std::move(ext)),
          spacing(extents.size(), 1.0),
          values(element_count(extents), 0) {}

    int dim() const { return static_cast<int>(extents.size()); }
    long count() const { return static_cast<long>(values.size()); }

    int32_t& at(const std::vector<int>& idx) { return values[linear_index(extents, idx)]; }
    int32_t at(const std::vector<int>& idx) const { return values[linear_index(extents, idx)]; }

    int32_t sample_nearest(const std::vector<double>& pos, int32_t background = 0) const;
};

// Dense per-voxel displacement, components in voxel units, stored
// voxel-major: field.values[lin * d + axis].
struct DisplacementField {
    std::vector<int> extents;
    int components = 0;
    std::vector<double> values;

    DisplacementField() = default;
    DisplacementField(std::vector<int> ext, int comps)
        : extents(std::move(ext)),
          components(comps),
          values(element_count(extents) * comps, 0.0) {}

    int dim() const { return static_cast<int>(extents.size()); }

    double* at(long lin) { return values.data() + lin * components; }
    const double* at(long lin) const { return values.data() + lin * components; }
};

// Percentile clip to [p0.5, p99.5] then min-max to [0,1].
// A constant field maps to all 0.5.
ScalarField normalize_intensity(const ScalarField& field);

}  // namespace unireg
