#pragma once

#include <string>

#include "field.hpp"

namespace unireg {

struct Volume {
    enum class Kind { scalar, label };
    Kind kind = Kind::scalar;
    ScalarField scalar;
    LabelField label;
};

// Accepts a raw little-endian array (with a JSON sidecar naming extents,
// spacing, dtype and kind) or an uncompressed single-file NIfTI-1 volume.
Volume load_volume(const std::string& path);

// Writes `<stem>.raw` plus `<stem>.json`; dtype float32 for scalars,
// int32 for labels.
void save_volume_raw(const std::string& stem, const ScalarField& field);
void save_volume_raw(const std::string& stem, const LabelField& field);

}  // namespace unireg
