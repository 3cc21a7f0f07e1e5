#pragma once

#include <functional>
#include <vector>

#include "field.hpp"
#include "warp_spec.hpp"

namespace unireg {

// Maps a transformed-frame voxel coordinate (px) into the fixed frame.
using PointMap = std::function<std::vector<double>(const std::vector<double>&)>;

PointMap point_map_from_warp(const GroundTruthWarp& warp);
// x -> x + field(x) with multi-linear sampling of the displacement field.
PointMap point_map_from_field(const DisplacementField& field);

// Mean corner error divided by max(height, width), in percent (2D only).
double corner_relative_distance(const PointMap& estimated, const PointMap& ground_truth,
                                const std::vector<int>& extents);

// Fraction of distances strictly below the threshold.
double success_rate(const std::vector<double>& distances, double threshold = 2.0);

// 2|A intersect B| / (|A|+|B|) over nonzero voxels; 1.0 when both are empty.
double dice(const LabelField& a, const LabelField& b);
// Dice of the single-label masks a==label, b==label.
double dice_label(const LabelField& a, const LabelField& b, int32_t label);

// Sum_l count_l * dice_l / sum_l count_l.
double weighted_dice(const std::vector<double>& per_label_dice,
                     const std::vector<long>& per_label_counts);

// 95th percentile (linear-interpolated) of the pooled symmetric boundary
// distances between the two nonzero masks, in mm.
double hd95(const LabelField& a, const LabelField& b, const std::vector<double>& spacing);

struct Aggregate {
    double mean = 0.0;
    double stddev = 0.0;
};

Aggregate aggregate(const std::vector<double>& values);

}  // namespace unireg
