#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "field.hpp"
#include "model.hpp"

namespace unireg {

struct EarlyStopConfig {
    int window = 50;
    double rel_tol = 1e-4;
};

struct RunConfig {
    int epochs = 0;        // 0 = auto: 500 for 2D, 300 for 3D
    int target_epoch = 0;  // e_g; 0 = auto: 0.4 * epochs
    int batch_size = 4096;
    int steps_per_epoch = 0;  // 0 = full-grid enumeration
    uint64_t seed = 1;
    bool deterministic = true;
    std::optional<EarlyStopConfig> early_stop;
    Granularity granularity = Granularity::rigid;
    Modality modality = Modality::single;
    bool schedule_enabled = true;
    // Per-network overrides for the coarse-to-fine reweighting.
    bool schedule_motion = true;
    bool schedule_image = true;

    // finest_resolution 0 = auto (max extent for the image grid; rigid mode
    // pins the motion grid to base == finest).
    HashGridConfig motion_grid;
    HashGridConfig image_grid;
    std::vector<int> motion_hidden = {64, 64};
    std::vector<int> image_hidden = {64, 64};
    double motion_lr = 2e-3;
    double image_lr = 1e-2;
    double displacement_scale = 1.0;
};

RunConfig default_run_config(Granularity granularity, Modality modality);

// Fills the auto (zero) fields from the pair geometry.
void resolve_run_config(RunConfig& config, const std::vector<int>& extents);

// Image grid capped at 1/15 of the resolution (floor, clamped to >= 2).
RunConfig capacity_restricted_preset(RunConfig config, const std::vector<int>& extents);

struct RegistrationResult {
    RegistrationModel model;
    DisplacementField field;
    std::vector<LossTerms> loss_history;  // epoch means
    double wall_seconds = 0.0;
    int epochs_run = 0;
    RunConfig resolved_config;
};

struct NumericalAbort : std::runtime_error {
    int epoch, step;
    NumericalAbort(int e, int s)
        : std::runtime_error("non-finite loss at epoch " + std::to_string(e) + ", step " +
                             std::to_string(s)),
          epoch(e),
          step(s) {}
};

// B voxel linear indices drawn uniformly with replacement.
std::vector<long> sample_voxels(const std::vector<int>& extents, int batch, std::mt19937_64& rng);

// Normalized coordinate of a voxel: index / (extent - 1) per axis.
void voxel_to_coord(const std::vector<int>& extents, long lin, double* coord);

RegistrationResult register_pair(const ScalarField& fixed, const ScalarField& transformed,
                                 RunConfig config);

}  // namespace unireg
