#include "serialize.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace unireg {

namespace {

constexpr char kCheckpointMagic[4] = {'U', 'R', 'E', 'G'};
constexpr char kFieldMagic[4] = {'D', 'S', 'P', 'F'};
constexpr uint32_t kVersion = 1;

// Little-endian host assumed (asserted in CMake for the supported targets).
template <typename T>
void write_pod(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const std::string& path) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("truncated file: " + path);
    return v;
}

void write_f32_block(std::ostream& out, const std::vector<double>& values) {
    for (double vd : values) write_pod(out, static_cast<float>(vd));
}

void read_f32_block(std::istream& in, std::vector<double>& values, const std::string& path) {
    for (double& v : values) v = read_pod<float>(in, path);
}

void write_grid(std::ostream& out, const HashGridConfig& cfg, const HashGridParams& params) {
    write_pod<uint32_t>(out, cfg.levels);
    write_pod<uint32_t>(out, cfg.features_per_level);
    write_pod<uint32_t>(out, cfg.table_size);
    write_pod<uint32_t>(out, cfg.base_resolution);
    write_pod<uint32_t>(out, cfg.finest_resolution);
    const size_t per_level = static_cast<size_t>(cfg.table_size) * cfg.features_per_level;
    for (int level = 0; level < cfg.levels; ++level) {
        write_pod<uint32_t>(out, resolution_at_level(cfg, level));
        const double* block = params.tables.data() + level * per_level;
        for (size_t i = 0; i < per_level; ++i) write_pod(out, static_cast<float>(block[i]));
    }
}

void read_grid(std::istream& in, int dim, HashGridConfig& cfg, HashGridParams& params,
               const std::string& path) {
    cfg.dimension = dim;
    cfg.levels = read_pod<uint32_t>(in, path);
    cfg.features_per_level = read_pod<uint32_t>(in, path);
    cfg.table_size = read_pod<uint32_t>(in, path);
    cfg.base_resolution = read_pod<uint32_t>(in, path);
    cfg.finest_resolution = read_pod<uint32_t>(in, path);
    cfg.validate();
    const size_t per_level = static_cast<size_t>(cfg.table_size) * cfg.features_per_level;
    params.tables.resize(per_level * cfg.levels);
    for (int level = 0; level < cfg.levels; ++level) {
        const uint32_t res = read_pod<uint32_t>(in, path);
        if (static_cast<int>(res) != resolution_at_level(cfg, level))
            throw std::runtime_error("checkpoint level resolution mismatch: " + path);
        double* block = params.tables.data() + level * per_level;
        for (size_t i = 0; i < per_level; ++i) block[i] = read_pod<float>(in, path);
    }
}

void write_mlp(std::ostream& out, const MlpParams& mlp) {
    const MlpConfig& cfg = mlp.config;
    write_pod<uint32_t>(out, cfg.layer_count());
    write_pod<uint32_t>(out, cfg.input_dim);
    for (int w : cfg.hidden_widths) write_pod<uint32_t>(out, w);
    write_pod<uint32_t>(out, cfg.output_dim);
    write_pod<uint8_t>(out, cfg.activation == Activation::gelu ? 1 : 0);
    write_pod<uint8_t>(out, cfg.final_layer_zero_init ? 1 : 0);
    write_f32_block(out, mlp.data);
}

void read_mlp(std::istream& in, MlpParams& mlp, const std::string& path) {
    MlpConfig cfg;
    const uint32_t layers = read_pod<uint32_t>(in, path);
    if (layers < 2) throw std::runtime_error("checkpoint MLP needs >= 2 layers: " + path);
    cfg.input_dim = read_pod<uint32_t>(in, path);
    cfg.hidden_widths.resize(layers - 1);
    for (int& w : cfg.hidden_widths) w = read_pod<uint32_t>(in, path);
    cfg.output_dim = read_pod<uint32_t>(in, path);
    cfg.activation = read_pod<uint8_t>(in, path) ? Activation::gelu : Activation::relu;
    cfg.final_layer_zero_init = read_pod<uint8_t>(in, path) != 0;
    cfg.validate();
    mlp.config = cfg;
    mlp.data.resize(cfg.param_count());
    read_f32_block(in, mlp.data, path);
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kCheckpointMagic, 4);
    write_pod<uint32_t>(out, kVersion);
    write_pod<uint32_t>(out, ckpt.model.dim);
    write_pod<uint32_t>(out, ckpt.model.channels);
    write_pod<double>(out, ckpt.model.displacement_scale);
    write_grid(out, ckpt.model.motion_grid_config, ckpt.model.motion_grid);
    write_grid(out, ckpt.model.image_grid_config, ckpt.model.image_grid);
    write_mlp(out, ckpt.model.motion_mlp);
    write_mlp(out, ckpt.model.image_mlp);
    write_pod<uint32_t>(out, ckpt.epoch);
    write_pod<uint32_t>(out, ckpt.target_epoch);
    write_pod<uint8_t>(out, ckpt.schedule_enabled ? 1 : 0);
    if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw std::runtime_error("bad checkpoint magic: " + path);
    if (read_pod<uint32_t>(in, path) != kVersion)
        throw std::runtime_error("unsupported checkpoint version: " + path);

    Checkpoint ckpt;
    ckpt.model.dim = read_pod<uint32_t>(in, path);
    ckpt.model.channels = read_pod<uint32_t>(in, path);
    ckpt.model.displacement_scale = read_pod<double>(in, path);
    read_grid(in, ckpt.model.dim, ckpt.model.motion_grid_config, ckpt.model.motion_grid, path);
    read_grid(in, ckpt.model.dim, ckpt.model.image_grid_config, ckpt.model.image_grid, path);
    read_mlp(in, ckpt.model.motion_mlp, path);
    read_mlp(in, ckpt.model.image_mlp, path);
    ckpt.epoch = read_pod<uint32_t>(in, path);
    ckpt.target_epoch = read_pod<uint32_t>(in, path);
    ckpt.schedule_enabled = read_pod<uint8_t>(in, path) != 0;
    ckpt.model.validate();
    return ckpt;
}

void save_displacement_field(const std::string& path, const DisplacementField& field) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write displacement field: " + path);
    out.write(kFieldMagic, 4);
    write_pod<uint32_t>(out, kVersion);
    write_pod<uint32_t>(out, field.dim());
    for (int e : field.extents) write_pod<uint32_t>(out, e);
    write_f32_block(out, field.values);
    if (!out) throw std::runtime_error("failed writing displacement field: " + path);
}

DisplacementField load_displacement_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open displacement field: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kFieldMagic, 4) != 0)
        throw std::runtime_error("bad displacement field magic: " + path);
    if (read_pod<uint32_t>(in, path) != kVersion)
        throw std::runtime_error("unsupported displacement field version: " + path);
    const uint32_t d = read_pod<uint32_t>(in, path);
    if (d < 2 || d > 3) throw std::runtime_error("bad displacement field dimension: " + path);
    std::vector<int> extents(d);
    for (int& e : extents) e = read_pod<uint32_t>(in, path);
    DisplacementField field(extents, d);
    read_f32_block(in, field.values, path);
    return field;
}

void save_loss_csv(const std::string& path, const std::vector<LossTerms>& history) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write loss history: " + path);
    out << "epoch,loss_fixed_term,loss_trans_term,total\n";
    out.precision(17);
    for (size_t e = 0; e < history.size(); ++e)
        out << e + 1 << "," << history[e].fixed_term << "," << history[e].trans_term << ","
            << history[e].total() << "\n";
}

std::vector<LossTerms> load_loss_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open loss history: " + path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<LossTerms> history;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        LossTerms t;
        std::getline(ss, tok, ',');  // epoch
        std::getline(ss, tok, ',');
        t.fixed_term = std::stod(tok);
        std::getline(ss, tok, ',');
        t.trans_term = std::stod(tok);
        history.push_back(t);
    }
    return history;
}

}  // namespace unireg
