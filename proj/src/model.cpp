#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace unireg {

LevelWeights level_weights(int epoch, int levels, const CoarseToFineSchedule& schedule) {
    LevelWeights lw = LevelWeights::ones(levels);
    if (!schedule.enabled) return lw;
    if (schedule.target_epoch < 1) throw std::invalid_argument("target_epoch must be >= 1");
    const double alpha = std::min(1.0, static_cast<double>(epoch) / schedule.target_epoch);
    for (int i = 0; i < levels; ++i)
        lw.w[i] = std::clamp(levels * alpha - i, 0.0, 1.0);
    return lw;
}

void RegistrationModel::validate() const {
    motion_grid_config.validate();
    image_grid_config.validate();
    if (dim != motion_grid_config.dimension || dim != image_grid_config.dimension)
        throw std::invalid_argument("grid dimensions disagree with model dimension");
    if (channels != 1 && channels != 2)
        throw std::invalid_argument("channels must be 1 or 2");
    if (motion_mlp.config.output_dim != dim)
        throw std::invalid_argument("motion network must output one value per axis");
    if (image_mlp.config.output_dim != channels)
        throw std::invalid_argument("image network must output one value per channel");
    if (motion_mlp.config.input_dim != motion_grid_config.feature_dim())
        throw std::invalid_argument("motion network input must match its encoding size");
    if (image_mlp.config.input_dim != image_grid_config.feature_dim())
        throw std::invalid_argument("image network input must match its encoding size");
}

RegistrationModel make_model(int dim, int channels, const HashGridConfig& motion_grid,
                             const HashGridConfig& image_grid,
                             const std::vector<int>& motion_hidden,
                             const std::vector<int>& image_hidden, uint64_t seed,
                             double displacement_scale) {
    RegistrationModel m;
    m.dim = dim;
    m.channels = channels;
    m.displacement_scale = displacement_scale;
    m.motion_grid_config = motion_grid;
    m.image_grid_config = image_grid;
    m.motion_grid = HashGridParams::init(motion_grid, seed * 4 + 0);
    m.image_grid = HashGridParams::init(image_grid, seed * 4 + 1);

    MlpConfig mo_cfg;
    mo_cfg.input_dim = motion_grid.feature_dim();
    mo_cfg.hidden_widths = motion_hidden;
    mo_cfg.output_dim = dim;
    mo_cfg.final_layer_zero_init = true;  // identity warp at init
    m.motion_mlp = init_mlp(mo_cfg, seed * 4 + 2);

    MlpConfig im_cfg;
    im_cfg.input_dim = image_grid.feature_dim();
    im_cfg.hidden_widths = image_hidden;
    im_cfg.output_dim = channels;
    m.image_mlp = init_mlp(im_cfg, seed * 4 + 3);

    m.validate();
    return m;
}

void displacement(const RegistrationModel& model, const double* coord,
                  const LevelWeights& motion_weights, double* out) {
    std::vector<double> feat(model.motion_grid_config.feature_dim());
    grid_encode(coord, model.motion_grid_config, model.motion_grid, motion_weights, feat.data());
    mlp_forward(model.motion_mlp, feat.data(), out);
    for (int a = 0; a < model.dim; ++a) out[a] *= model.displacement_scale;
}

double predict_fixed(const RegistrationModel& model, const double* coord,
                     const LevelWeights& image_weights) {
    std::vector<double> feat(model.image_grid_config.feature_dim());
    std::vector<double> out(model.channels);
    grid_encode(coord, model.image_grid_config, model.image_grid, image_weights, feat.data());
    mlp_forward(model.image_mlp, feat.data(), out.data());
    return out[0];
}

double predict_transformed(const RegistrationModel& model, const double* coord,
                           const ModelWeights& weights) {
    std::vector<double> delta(model.dim), warped(model.dim);
    displacement(model, coord, weights.motion, delta.data());
    for (int a = 0; a < model.dim; ++a) warped[a] = coord[a] + delta[a];
    std::vector<double> feat(model.image_grid_config.feature_dim());
    std::vector<double> out(model.channels);
    grid_encode(warped.data(), model.image_grid_config, model.image_grid, weights.image,
                feat.data());
    mlp_forward(model.image_mlp, feat.data(), out.data());
    return out[model.channels - 1];
}

void ModelGrads::resize_like(const RegistrationModel& model) {
    motion_tables.assign(model.motion_grid.tables.size(), 0.0);
    image_tables.assign(model.image_grid.tables.size(), 0.0);
    motion_mlp.assign(model.motion_mlp.data.size(), 0.0);
    image_mlp.assign(model.image_mlp.data.size(), 0.0);
}

void ModelGrads::zero() {
    std::fill(motion_tables.begin(), motion_tables.end(), 0.0);
    std::fill(image_tables.begin(), image_tables.end(), 0.0);
    std::fill(motion_mlp.begin(), motion_mlp.end(), 0.0);
    std::fill(image_mlp.begin(), image_mlp.end(), 0.0);
}

LossTerms loss_and_grads(const RegistrationModel& model, const std::vector<double>& coords,
                         const std::vector<double>& ref, const std::vector<double>& trans,
                         const ModelWeights& weights, ModelGrads* grads) {
    const int d = model.dim;
    const long batch = static_cast<long>(ref.size());
    if (coords.size() != static_cast<size_t>(batch) * d || trans.size() != ref.size())
        throw std::invalid_argument("loss_and_grads: batch size mismatch");
    if (batch == 0) throw std::invalid_argument("loss_and_grads: empty batch");

    const int mo_feat = model.motion_grid_config.feature_dim();
    const int im_feat = model.image_grid_config.feature_dim();
    const int trans_channel = model.channels - 1;
    const double inv_batch = 1.0 / static_cast<double>(batch);

    std::vector<double> feat_m(mo_feat), feat_f(im_feat), feat_t(im_feat);
    std::vector<double> mo_out(d), im_out_f(model.channels), im_out_t(model.channels);
    std::vector<double> warped(d), up_im(model.channels);
    std::vector<double> grad_feat_f(im_feat), grad_feat_t(im_feat), grad_feat_m(mo_feat);
    std::vector<double> grad_q(d), up_mo(d);
    MlpWorkspace ws_m, ws_f, ws_t;

    LossTerms loss;
    for (long k = 0; k < batch; ++k) {
        const double* coord = coords.data() + k * d;

        // Fixed term: image network at the unwarped coordinate, channel 0.
        grid_encode(coord, model.image_grid_config, model.image_grid, weights.image,
                    feat_f.data());
        mlp_forward(model.image_mlp, feat_f.data(), im_out_f.data(), grads ? &ws_f : nullptr);
        const double r_f = im_out_f[0] - ref[k];
        loss.fixed_term += r_f * r_f * inv_batch;

        // Transformed term: image network at coord + displacement.
        grid_encode(coord, model.motion_grid_config, model.motion_grid, weights.motion,
                    feat_m.data());
        mlp_forward(model.motion_mlp, feat_m.data(), mo_out.data(), grads ? &ws_m : nullptr);
        for (int a = 0; a < d; ++a)
            warped[a] = coord[a] + model.displacement_scale * mo_out[a];
        grid_encode(warped.data(), model.image_grid_config, model.image_grid, weights.image,
                    feat_t.data());
        mlp_forward(model.image_mlp, feat_t.data(), im_out_t.data(), grads ? &ws_t : nullptr);
        const double r_t = im_out_t[trans_channel] - trans[k];
        loss.trans_term += r_t * r_t * inv_batch;

        if (!grads) continue;

        // Fixed term gradients reach only the image network.
        std::fill(up_im.begin(), up_im.end(), 0.0);
        up_im[0] = 2.0 * r_f * inv_batch;
        mlp_backward(model.image_mlp, ws_f, up_im.data(), grads->image_mlp.data(),
                     grad_feat_f.data());
        grid_encode_backward(coord, model.image_grid_config, model.image_grid, weights.image,
                             grad_feat_f.data(), grads->image_tables.data(), nullptr);

        // Transformed term gradients chain through the warped coordinate
        // into the motion network.
        std::fill(up_im.begin(), up_im.end(), 0.0);
        up_im[trans_channel] = 2.0 * r_t * inv_batch;
        mlp_backward(model.image_mlp, ws_t, up_im.data(), grads->image_mlp.data(),
                     grad_feat_t.data());
        grid_encode_backward(warped.data(), model.image_grid_config, model.image_grid,
                             weights.image, grad_feat_t.data(), grads->image_tables.data(),
                             grad_q.data());
        for (int a = 0; a < d; ++a) up_mo[a] = model.displacement_scale * grad_q[a];
        mlp_backward(model.motion_mlp, ws_m, up_mo.data(), grads->motion_mlp.data(),
                     grad_feat_m.data());
        grid_encode_backward(coord, model.motion_grid_config, model.motion_grid, weights.motion,
                             grad_feat_m.data(), grads->motion_tables.data(), nullptr);
    }
    return loss;
}

DisplacementField export_displacement_field(const RegistrationModel& model,
                                            const std::vector<int>& extents,
                                            const LevelWeights& motion_weights) {
    if (static_cast<int>(extents.size()) != model.dim)
        throw std::invalid_argument("export_displacement_field: dimension mismatch");
    DisplacementField field(extents, model.dim);
    const long n = element_count(extents);
    std::vector<int> idx(model.dim, 0);
    std::vector<double> coord(model.dim), delta(model.dim);
    for (long lin = 0; lin < n; ++lin) {
        for (int a = 0; a < model.dim; ++a)
            coord[a] = extents[a] > 1 ? static_cast<double>(idx[a]) / (extents[a] - 1) : 0.0;
        displacement(model, coord.data(), motion_weights, delta.data());
        double* out = field.at(lin);
        for (int a = 0; a < model.dim; ++a) out[a] = delta[a] * (extents[a] - 1);
        for (int a = model.dim - 1; a >= 0; --a) {
            if (++idx[a] < extents[a]) break;
            idx[a] = 0;
        }
    }
    return field;
}

namespace {

void check_warp_geometry(const std::vector<int>& a, const std::vector<int>& b, int comps,
                         int dim) {
    if (a != b) throw std::invalid_argument("warp_field: geometry mismatch");
    if (comps != dim) throw std::invalid_argument("warp_field: component count mismatch");
}

bool in_bounds(const std::vector<double>& pos, const std::vector<int>& extents) {
    for (size_t a = 0; a < extents.size(); ++a)
        if (pos[a] < 0.0 || pos[a] > extents[a] - 1) return false;
    return true;
}

}  // namespace

ScalarField warp_field(const ScalarField& input, const DisplacementField& disp, Interp interp) {
    check_warp_geometry(input.extents, disp.extents, disp.components, input.dim());
    ScalarField out = input;
    const long n = input.count();
    const int d = input.dim();
    std::vector<int> idx(d, 0);
    std::vector<double> pos(d);
    for (long lin = 0; lin < n; ++lin) {
        const double* dv = disp.at(lin);
        for (int a = 0; a < d; ++a) pos[a] = idx[a] + dv[a];
        if (interp == Interp::linear)
            out.values[lin] = in_bounds(pos, input.extents) ? input.sample_linear(pos) : 0.0;
        else
            out.values[lin] = input.sample_nearest(pos, 0.0);
        for (int a = d - 1; a >= 0; --a) {
            if (++idx[a] < input.extents[a]) break;
            idx[a] = 0;
        }
    }
    return out;
}

LabelField warp_field(const LabelField& input, const DisplacementField& disp, Interp interp) {
    if (interp == Interp::linear)
        throw std::invalid_argument("label fields must be warped with nearest interpolation");
    check_warp_geometry(input.extents, disp.extents, disp.components, input.dim());
    LabelField out = input;
    const long n = input.count();
    const int d = input.dim();
    std::vector<int> idx(d, 0);
    std::vector<double> pos(d);
    for (long lin = 0; lin < n; ++lin) {
        const double* dv = disp.at(lin);
        for (int a = 0; a < d; ++a) pos[a] = idx[a] + dv[a];
        out.values[lin] = input.sample_nearest(pos, 0);
        for (int a = d - 1; a >= 0; --a) {
            if (++idx[a] < input.extents[a]) break;
            idx[a] = 0;
        }
    }
    return out;
}

}  // namespace unireg
