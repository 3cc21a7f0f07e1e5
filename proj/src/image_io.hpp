#pragma once

#include <string>

#include "field.hpp"

namespace unireg {

enum class ChannelSelector { gray, red, green, blue, luma };

// PNG or PGM, 8/16-bit. Values scaled linearly to [0,1] by the bit depth.
// luma = 0.299 r + 0.587 g + 0.114 b.
ScalarField load_image_2d(const std::string& path, ChannelSelector selector = ChannelSelector::gray);

// 16-bit grayscale PNG (lossless for values quantized to 16 bits).
void save_image_png16(const std::string& path, const ScalarField& field);

// 8-bit RGB PNG from three fields sharing geometry (values clamped to [0,1]).
void save_image_rgb8(const std::string& path, const ScalarField& r, const ScalarField& g,
                     const ScalarField& b);

void save_image_pgm(const std::string& path, const ScalarField& field, int bits = 16);

}  // namespace unireg
