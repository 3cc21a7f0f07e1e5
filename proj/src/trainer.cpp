#include "trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace unireg {

RunConfig default_run_config(Granularity granularity, Modality modality) {
    RunConfig cfg;
    cfg.granularity = granularity;
    cfg.modality = modality;

    cfg.motion_grid.levels = 8;
    cfg.motion_grid.features_per_level = 2;
    cfg.motion_grid.table_size = 1 << 14;
    cfg.motion_grid.base_resolution = 2;
    cfg.motion_grid.finest_resolution = granularity == Granularity::rigid ? 2 : 16;

    cfg.image_grid.levels = 8;
    cfg.image_grid.features_per_level = 2;
    cfg.image_grid.table_size = 1 << 14;
    cfg.image_grid.base_resolution = 2;
    cfg.image_grid.finest_resolution = 0;  // auto: max extent

    // In the multi-modal case the image network can absorb a misalignment
    // into its second channel (the loss has a null space), so the motion
    // network drifts if it moves as fast as the image fit. A slower motion
    // optimizer keeps it inside the basin the coarse-to-fine phase carves out.
    if (modality == Modality::multi) {
        cfg.motion_lr = 5e-4;
        cfg.image_lr = 2e-2;
    }
    return cfg;
}

void resolve_run_config(RunConfig& config, const std::vector<int>& extents) {
    const int d = static_cast<int>(extents.size());
    if (d != 2 && d != 3) throw std::invalid_argument("registration supports 2D and 3D only");
    const int max_extent = *std::max_element(extents.begin(), extents.end());

    if (config.epochs == 0) config.epochs = d == 2 ? 500 : 300;
    if (config.target_epoch == 0)
        config.target_epoch = std::max(1, static_cast<int>(0.4 * config.epochs));
    if (config.target_epoch > config.epochs)
        throw std::invalid_argument("target_epoch must not exceed epochs");

    config.motion_grid.dimension = d;
    config.image_grid.dimension = d;
    if (config.granularity == Granularity::rigid)
        config.motion_grid.finest_resolution = config.motion_grid.base_resolution;
    else if (config.motion_grid.finest_resolution == 0)
        config.motion_grid.finest_resolution = std::max(2, max_extent / 4);
    if (config.image_grid.finest_resolution == 0)
        config.image_grid.finest_resolution = std::max(config.image_grid.base_resolution,
                                                       max_extent);
    config.motion_grid.validate();
    config.image_grid.validate();

    if (config.steps_per_epoch == 0 && d == 3 && config.batch_size == 4096)
        config.batch_size = 1 << 16;
}

RunConfig capacity_restricted_preset(RunConfig config, const std::vector<int>& extents) {
    const int max_extent = *std::max_element(extents.begin(), extents.end());
    config.image_grid.finest_resolution = std::max(2, max_extent / 15);
    config.image_grid.base_resolution =
        std::min(config.image_grid.base_resolution, config.image_grid.finest_resolution);
    return config;
}

std::vector<long> sample_voxels(const std::vector<int>& extents, int batch, std::mt19937_64& rng) {
    const long n = element_count(extents);
    std::uniform_int_distribution<long> dist(0, n - 1);
    std::vector<long> out(batch);
    for (long& v : out) v = dist(rng);
    return out;
}

void voxel_to_coord(const std::vector<int>& extents, long lin, double* coord) {
    const int d = static_cast<int>(extents.size());
    for (int a = d - 1; a >= 0; --a) {
        const long idx = lin % extents[a];
        lin /= extents[a];
        coord[a] = extents[a] > 1 ? static_cast<double>(idx) / (extents[a] - 1) : 0.0;
    }
}

RegistrationResult register_pair(const ScalarField& fixed, const ScalarField& transformed,
                                 RunConfig config) {
    const auto t0 = std::chrono::steady_clock::now();
    if (fixed.extents != transformed.extents)
        throw std::invalid_argument("register_pair: the two fields must share geometry");
    resolve_run_config(config, fixed.extents);

    const int d = fixed.dim();
    const int channels = config.modality == Modality::multi ? 2 : 1;
    RegistrationModel model =
        make_model(d, channels, config.motion_grid, config.image_grid, config.motion_hidden,
                   config.image_hidden, config.seed, config.displacement_scale);

    AdamState adam_motion_tables(model.motion_grid.tables.size(), {config.motion_lr});
    AdamState adam_motion_mlp(model.motion_mlp.data.size(), {config.motion_lr});
    AdamState adam_image_tables(model.image_grid.tables.size(), {config.image_lr});
    AdamState adam_image_mlp(model.image_mlp.data.size(), {config.image_lr});

    ModelGrads grads;
    grads.resize_like(model);

    const long total_voxels = fixed.count();
    const long batch = std::min<long>(config.batch_size, total_voxels);
    const bool full_grid = config.steps_per_epoch == 0;
    const long steps = full_grid ? (total_voxels + batch - 1) / batch : config.steps_per_epoch;

    std::mt19937_64 rng(config.seed ^ 0xabcdef1234567890ull);
    const CoarseToFineSchedule schedule{config.target_epoch, config.schedule_enabled};
    const int motion_levels = config.motion_grid.levels;
    const int image_levels = config.image_grid.levels;

    RegistrationResult result;
    result.loss_history.reserve(config.epochs);

    std::vector<double> coords;
    std::vector<double> ref_vals, trans_vals;
    ModelWeights weights = ModelWeights::ones(model);

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const LevelWeights motion_w = config.schedule_motion
                                          ? level_weights(epoch, motion_levels, schedule)
                                          : LevelWeights::ones(motion_levels);
        const LevelWeights image_w = config.schedule_image
                                         ? level_weights(epoch, image_levels, schedule)
                                         : LevelWeights::ones(image_levels);
        weights = ModelWeights{motion_w, image_w};

        LossTerms epoch_loss;
        for (long step = 0; step < steps; ++step) {
            std::vector<long> voxels;
            if (full_grid) {
                const long begin = step * batch;
                const long end = std::min(begin + batch, total_voxels);
                voxels.resize(end - begin);
                for (long i = begin; i < end; ++i) voxels[i - begin] = i;
            } else {
                voxels = sample_voxels(fixed.extents, static_cast<int>(batch), rng);
            }
            const long b = static_cast<long>(voxels.size());
            coords.resize(b * d);
            ref_vals.resize(b);
            trans_vals.resize(b);
            for (long i = 0; i < b; ++i) {
                voxel_to_coord(fixed.extents, voxels[i], coords.data() + i * d);
                ref_vals[i] = fixed.values[voxels[i]];
                trans_vals[i] = transformed.values[voxels[i]];
            }

            grads.zero();
            const LossTerms loss = loss_and_grads(model, coords, ref_vals, trans_vals, weights,
                                                  &grads);
            if (!std::isfinite(loss.total()))
                throw NumericalAbort(epoch, static_cast<int>(step));

            adam_step(model.motion_grid.tables, grads.motion_tables, adam_motion_tables);
            adam_step(model.motion_mlp.data, grads.motion_mlp, adam_motion_mlp);
            adam_step(model.image_grid.tables, grads.image_tables, adam_image_tables);
            adam_step(model.image_mlp.data, grads.image_mlp, adam_image_mlp);

            const double w = static_cast<double>(b) / (full_grid ? total_voxels : b * steps);
            epoch_loss.fixed_term += loss.fixed_term * w;
            epoch_loss.trans_term += loss.trans_term * w;
        }
        result.loss_history.push_back(epoch_loss);
        result.epochs_run = epoch;

        if (config.early_stop && epoch > config.early_stop->window) {
            const double before =
                result.loss_history[epoch - config.early_stop->window - 1].total();
            const double now = epoch_loss.total();
            if (before > 0.0 && (before - now) / before < config.early_stop->rel_tol) break;
        }
    }

    result.field = export_displacement_field(model, fixed.extents, weights.motion);
    result.model = std::move(model);
    result.resolved_config = config;
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

}  // namespace unireg
