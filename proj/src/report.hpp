#pragma once

#include <string>
#include <vector>

#include "field.hpp"
#include "model.hpp"

namespace unireg {

// Loss curve with one point per epoch, log-scaled y axis.
void write_loss_svg(const std::string& path, const std::vector<LossTerms>& history);

// Alternating blocks of a and b (2D fields sharing geometry).
ScalarField checkerboard(const ScalarField& a, const ScalarField& b, int block = 8);

// red/green two-channel PNG (blue = 0).
void write_overlay_png(const std::string& path, const ScalarField& red, const ScalarField& green);

// Middle slice along axis 0 for 3D fields; identity for 2D.
ScalarField middle_slice(const ScalarField& field);

}  // namespace unireg
