#pragma once

#include <string>
#include <vector>

#include "field.hpp"
#include "model.hpp"

namespace unireg {

struct Checkpoint {
    RegistrationModel model;
    int epoch = 0;         // schedule state: epochs executed
    int target_epoch = 1;  // e_g
    bool schedule_enabled = true;
};

// Binary little-endian: magic, version, d, C, both grids (config, then per
// level its resolution and T x F float32 values), both MLPs (layer count,
// dims, row-major float32 weights), schedule state.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Binary little-endian: magic, version, d, extents, float32 components.
void save_displacement_field(const std::string& path, const DisplacementField& field);
DisplacementField load_displacement_field(const std::string& path);

// Columns: epoch, loss_fixed_term, loss_trans_term, total.
void save_loss_csv(const std::string& path, const std::vector<LossTerms>& history);
std::vector<LossTerms> load_loss_csv(const std::string& path);

}  // namespace unireg
