#pragma once

#include <cstdint>
#include <vector>

#include "field.hpp"
#include "hash_grid.hpp"
#include "mlp.hpp"

namespace unireg {

// w_i = clip(N*alpha - i, 0, 1), alpha = min(1, e/e_g).
struct CoarseToFineSchedule {
    int target_epoch = 1;  // e_g
    bool enabled = true;
};

LevelWeights level_weights(int epoch, int levels, const CoarseToFineSchedule& schedule);

enum class Granularity { rigid, deformable };
enum class Modality { single, multi };

// Motion network (coordinate -> displacement) paired with an image network
// (coordinate -> intensity per channel), each behind its own hash grid.
struct RegistrationModel {
    int dim = 2;
    int channels = 1;  // 1 single-modal, 2 multi-modal
    double displacement_scale = 1.0;

    HashGridConfig motion_grid_config, image_grid_config;
    HashGridParams motion_grid, image_grid;
    MlpParams motion_mlp, image_mlp;

    void validate() const;
};

RegistrationModel make_model(int dim, int channels, const HashGridConfig& motion_grid,
                             const HashGridConfig& image_grid,
                             const std::vector<int>& motion_hidden,
                             const std::vector<int>& image_hidden, uint64_t seed,
                             double displacement_scale = 1.0);

struct ModelWeights {
    LevelWeights motion, image;

    static ModelWeights ones(const RegistrationModel& m) {
        return {LevelWeights::ones(m.motion_grid_config.levels),
                LevelWeights::ones(m.image_grid_config.levels)};
    }
};

// Displacement in normalized units at a normalized coordinate.
void displacement(const RegistrationModel& model, const double* coord,
                  const LevelWeights& motion_weights, double* out);

// Image network at the unwarped coordinate, channel 0.
double predict_fixed(const RegistrationModel& model, const double* coord,
                     const LevelWeights& image_weights);

// Image network at coord + displacement(coord); channel 0 if C=1, channel 1 if C=2.
double predict_transformed(const RegistrationModel& model, const double* coord,
                           const ModelWeights& weights);

struct LossTerms {
    double fixed_term = 0.0;
    double trans_term = 0.0;
    double total() const { return fixed_term + trans_term; }
};

struct ModelGrads {
    std::vector<double> motion_tables, image_tables, motion_mlp, image_mlp;

    void resize_like(const RegistrationModel& model);
    void zero();
};

// Mean over the batch of |predict_fixed - ref|^2 + |predict_transformed - trans|^2.
// Gradients are accumulated into *grads when non-null. coords is B x d flat.
LossTerms loss_and_grads(const RegistrationModel& model, const std::vector<double>& coords,
                         const std::vector<double>& ref, const std::vector<double>& trans,
                         const ModelWeights& weights, ModelGrads* grads);

// Dense displacement at every voxel center, converted to voxel units.
DisplacementField export_displacement_field(const RegistrationModel& model,
                                            const std::vector<int>& extents,
                                            const LevelWeights& motion_weights);

enum class Interp { linear, nearest };

// output(x) = input(x + disp(x)); out-of-bounds positions take background 0.
ScalarField warp_field(const ScalarField& input, const DisplacementField& disp, Interp interp);
// Labels must use nearest interpolation; linear is rejected.
LabelField warp_field(const LabelField& input, const DisplacementField& disp, Interp interp);

}  // namespace unireg
