#include "volume_io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace unireg {

namespace {

using nlohmann::json;

std::vector<char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("cannot open volume: " + path);
    const std::streamsize size = in.tellg();
    in.seekg(0);
    std::vector<char> data(static_cast<size_t>(size));
    in.read(data.data(), size);
    if (!in) throw std::runtime_error("failed to read volume: " + path);
    return data;
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string swap_suffix(const std::string& path, const std::string& from, const std::string& to) {
    return path.substr(0, path.size() - from.size()) + to;
}

size_t dtype_size(const std::string& dtype) {
    if (dtype == "uint8") return 1;
    if (dtype == "uint16" || dtype == "int16") return 2;
    if (dtype == "int32" || dtype == "float32") return 4;
    if (dtype == "float64") return 8;
    throw std::runtime_error("unsupported dtype: " + dtype);
}

double decode_value(const std::string& dtype, const char* p) {
    if (dtype == "uint8") return *reinterpret_cast<const uint8_t*>(p);
    if (dtype == "uint16") {
        uint16_t v;
        std::memcpy(&v, p, 2);
        return v;
    }
    if (dtype == "int16") {
        int16_t v;
        std::memcpy(&v, p, 2);
        return v;
    }
    if (dtype == "int32") {
        int32_t v;
        std::memcpy(&v, p, 4);
        return v;
    }
    if (dtype == "float32") {
        float v;
        std::memcpy(&v, p, 4);
        return v;
    }
    double v;
    std::memcpy(&v, p, 8);
    return v;
}

Volume load_raw_with_sidecar(const std::string& raw_path, const std::string& sidecar_path) {
    std::ifstream side(sidecar_path);
    if (!side) throw std::runtime_error("cannot open volume sidecar: " + sidecar_path);
    const json meta = json::parse(side);
    for (const auto& item : meta.items()) {
        const std::string& key = item.key();
        if (key != "extents" && key != "spacing" && key != "dtype" && key != "kind")
            throw std::runtime_error("unknown sidecar key '" + key + "' in " + sidecar_path);
    }
    const std::vector<int> extents = meta.at("extents").get<std::vector<int>>();
    const std::string dtype = meta.at("dtype").get<std::string>();
    const std::string kind = meta.value("kind", "scalar");
    std::vector<double> spacing = meta.value("spacing", std::vector<double>(extents.size(), 1.0));
    if (spacing.size() != extents.size())
        throw std::runtime_error("sidecar spacing size mismatch in " + sidecar_path);

    const std::vector<char> payload = read_file(raw_path);
    const long n = element_count(extents);
    const size_t expected = static_cast<size_t>(n) * dtype_size(dtype);
    if (payload.size() != expected)
        throw std::runtime_error("volume size mismatch: sidecar expects " +
                                 std::to_string(expected) + " bytes, file has " +
                                 std::to_string(payload.size()) + " (" + raw_path + ")");

    Volume vol;
    if (kind == "label") {
        vol.kind = Volume::Kind::label;
        vol.label = LabelField(extents);
        vol.label.spacing = spacing;
        for (long i = 0; i < n; ++i)
            vol.label.values[i] =
                static_cast<int32_t>(decode_value(dtype, payload.data() + i * dtype_size(dtype)));
    } else if (kind == "scalar") {
        vol.scalar = ScalarField(extents);
        vol.scalar.spacing = spacing;
        for (long i = 0; i < n; ++i)
            vol.scalar.values[i] = decode_value(dtype, payload.data() + i * dtype_size(dtype));
    } else {
        throw std::runtime_error("unknown volume kind '" + kind + "' in " + sidecar_path);
    }
    return vol;
}

// Minimal NIfTI-1 reader: single uncompressed .nii, canonical orientation.
Volume load_nifti(const std::string& path) {
    const std::vector<char> data = read_file(path);
    if (data.size() < 352) throw std::runtime_error("NIfTI file too short: " + path);

    int32_t sizeof_hdr;
    std::memcpy(&sizeof_hdr, data.data(), 4);
    if (sizeof_hdr != 348) throw std::runtime_error("not a NIfTI-1 file (bad header size): " + path);
    if (std::strncmp(data.data() + 344, "n+1", 3) != 0)
        throw std::runtime_error("not a single-file NIfTI-1 volume: " + path);

    int16_t dim[8];
    std::memcpy(dim, data.data() + 40, sizeof(dim));
    const int nd = dim[0];
    if (nd < 2 || nd > 3) throw std::runtime_error("NIfTI reader supports 2D/3D only: " + path);

    int16_t datatype, bitpix;
    std::memcpy(&datatype, data.data() + 70, 2);
    std::memcpy(&bitpix, data.data() + 72, 2);
    float pixdim[8];
    std::memcpy(pixdim, data.data() + 76, sizeof(pixdim));
    float vox_offset;
    std::memcpy(&vox_offset, data.data() + 108, 4);

    std::string dtype;
    switch (datatype) {
        case 2: dtype = "uint8"; break;
        case 4: dtype = "int16"; break;
        case 8: dtype = "int32"; break;
        case 16: dtype = "float32"; break;
        case 64: dtype = "float64"; break;
        case 512: dtype = "uint16"; break;
        default:
            throw std::runtime_error("unsupported NIfTI datatype " + std::to_string(datatype) +
                                     ": " + path);
    }

    // NIfTI stores x fastest; our fields are row-major with axis 0 slowest,
    // so extents are reversed relative to dim[].
    std::vector<int> extents(nd);
    std::vector<double> spacing(nd);
    for (int a = 0; a < nd; ++a) {
        extents[a] = dim[nd - a];
        spacing[a] = pixdim[nd - a];
        if (extents[a] < 1) throw std::runtime_error("invalid NIfTI dims: " + path);
    }

    const long n = element_count(extents);
    const size_t offset = static_cast<size_t>(vox_offset);
    const size_t expected = offset + static_cast<size_t>(n) * dtype_size(dtype);
    if (data.size() < expected)
        throw std::runtime_error("NIfTI payload too short: expected " + std::to_string(expected) +
                                 " bytes, file has " + std::to_string(data.size()) + " (" + path +
                                 ")");

    Volume vol;
    vol.scalar = ScalarField(extents);
    vol.scalar.spacing = spacing;
    const size_t sz = dtype_size(dtype);
    for (long i = 0; i < n; ++i)
        vol.scalar.values[i] = decode_value(dtype, data.data() + offset + i * sz);
    return vol;
}

void write_sidecar(const std::string& stem, const std::vector<int>& extents,
                   const std::vector<double>& spacing, const std::string& dtype,
                   const std::string& kind) {
    json meta;
    meta["extents"] = extents;
    meta["spacing"] = spacing;
    meta["dtype"] = dtype;
    meta["kind"] = kind;
    std::ofstream out(stem + ".json");
    if (!out) throw std::runtime_error("cannot write sidecar: " + stem + ".json");
    out << meta.dump(2) << "\n";
}

}  // namespace

Volume load_volume(const std::string& path) {
    if (has_suffix(path, ".nii")) return load_nifti(path);
    if (has_suffix(path, ".raw"))
        return load_raw_with_sidecar(path, swap_suffix(path, ".raw", ".json"));
    if (has_suffix(path, ".json"))
        return load_raw_with_sidecar(swap_suffix(path, ".json", ".raw"), path);
    throw std::runtime_error("unsupported volume format (expect .nii, .raw or .json): " + path);
}

void save_volume_raw(const std::string& stem, const ScalarField& field) {
    std::ofstream out(stem + ".raw", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write volume: " + stem + ".raw");
    for (double vd : field.values) {
        const float v = static_cast<float>(vd);
        out.write(reinterpret_cast<const char*>(&v), 4);
    }
    write_sidecar(stem, field.extents, field.spacing, "float32", "scalar");
}

void save_volume_raw(const std::string& stem, const LabelField& field) {
    std::ofstream out(stem + ".raw", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write volume: " + stem + ".raw");
    for (int32_t v : field.values) out.write(reinterpret_cast<const char*>(&v), 4);
    write_sidecar(stem, field.extents, field.spacing, "int32", "label");
}

}  // namespace unireg
