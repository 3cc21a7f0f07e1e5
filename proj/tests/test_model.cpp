#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "model.hpp"

using namespace unireg;

namespace {

HashGridConfig tiny_grid(int dim, int finest) {
    HashGridConfig cfg;
    cfg.dimension = dim;
    cfg.levels = 2;
    cfg.features_per_level = 2;
    cfg.table_size = 16;
    cfg.base_resolution = 2;
    cfg.finest_resolution = finest;
    return cfg;
}

RegistrationModel tiny_model(int channels, uint64_t seed) {
    return make_model(2, channels, tiny_grid(2, 2), tiny_grid(2, 4), {8}, {8}, seed);
}

std::vector<double> random_coords(int batch, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.05, 0.95);
    std::vector<double> coords(batch * 2);
    for (double& c : coords) c = unit(rng);
    return coords;
}

}  // namespace

TEST_CASE("level_weights formula") {
    const CoarseToFineSchedule sched{100, true};
    LevelWeights w = level_weights(100, 8, sched);
    for (double v : w.w) CHECK(v == 1.0);
    w = level_weights(250, 8, sched);
    for (double v : w.w) CHECK(v == 1.0);

    w = level_weights(50, 8, sched);  // alpha = 0.5
    for (int i = 0; i < 4; ++i) CHECK(w.w[i] == 1.0);
    for (int i = 4; i < 8; ++i) CHECK(w.w[i] == 0.0);

    w = level_weights(0, 8, sched);
    for (double v : w.w) CHECK(v == 0.0);

    const CoarseToFineSchedule off{100, false};
    w = level_weights(0, 8, off);
    for (double v : w.w) CHECK(v == 1.0);
}

TEST_CASE("level_weights monotonicity") {
    const CoarseToFineSchedule sched{37, true};
    std::vector<double> prev(6, -1.0);
    for (int e = 0; e <= 80; ++e) {
        LevelWeights w = level_weights(e, 6, sched);
        for (int i = 1; i < 6; ++i) CHECK(w.w[i] <= w.w[i - 1]);  // non-increasing in i
        for (int i = 0; i < 6; ++i) {
            CHECK(w.w[i] >= prev[i]);  // non-decreasing in e
            prev[i] = w.w[i];
        }
        if (e >= 37)
            for (double v : w.w) CHECK(v == 1.0);
    }
}

TEST_CASE("fresh model is an identity warp with near-zero image") {
    RegistrationModel m = tiny_model(1, 4);
    const ModelWeights w = ModelWeights::ones(m);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const double coord[2] = {unit(rng), unit(rng)};
        double delta[2];
        displacement(m, coord, w.motion, delta);
        CHECK(delta[0] == 0.0);
        CHECK(delta[1] == 0.0);
        const double pf = predict_fixed(m, coord, w.image);
        CHECK(std::abs(pf) < 1e-2);
        // identity composition: transformed equals fixed per channel, exactly
        CHECK(predict_transformed(m, coord, w) == pf);
    }
}

TEST_CASE("all-zero level weights give zero output at init") {
    RegistrationModel m = tiny_model(1, 5);
    const LevelWeights zero{std::vector<double>(2, 0.0)};
    const double coord[2] = {0.3, 0.7};
    double delta[2];
    displacement(m, coord, zero, delta);
    CHECK(delta[0] == 0.0);
    CHECK(delta[1] == 0.0);
}

TEST_CASE("multi-modal channel routing") {
    RegistrationModel m = tiny_model(2, 6);
    // make channels distinguishable: bias the image net output layer
    const MlpConfig& cfg = m.image_mlp.config;
    const size_t last = cfg.layer_offset(cfg.layer_count() - 1);
    const size_t bias = last + static_cast<size_t>(cfg.layer_out(cfg.layer_count() - 1)) *
                                   cfg.layer_in(cfg.layer_count() - 1);
    m.image_mlp.data[bias + 0] = 0.25;  // channel 0
    m.image_mlp.data[bias + 1] = 0.75;  // channel 1

    const ModelWeights w = ModelWeights::ones(m);
    const double coord[2] = {0.5, 0.5};
    CHECK(predict_fixed(m, coord, w.image) == doctest::Approx(0.25).epsilon(1e-2));
    CHECK(predict_transformed(m, coord, w) == doctest::Approx(0.75).epsilon(1e-2));
}

TEST_CASE("perfect reproduction gives zero loss and zero gradients") {
    RegistrationModel m = tiny_model(1, 7);
    const ModelWeights w = ModelWeights::ones(m);
    std::mt19937_64 rng(17);
    std::vector<double> coords = random_coords(12, rng);
    std::vector<double> ref(12), trans(12);
    for (int k = 0; k < 12; ++k) {
        ref[k] = predict_fixed(m, coords.data() + 2 * k, w.image);
        const double c[2] = {coords[2 * k], coords[2 * k + 1]};
        trans[k] = predict_transformed(m, c, w);
    }
    ModelGrads grads;
    grads.resize_like(m);
    const LossTerms loss = loss_and_grads(m, coords, ref, trans, w, &grads);
    CHECK(loss.total() == 0.0);
    for (double g : grads.motion_tables) CHECK(g == 0.0);
    for (double g : grads.image_tables) CHECK(g == 0.0);
    for (double g : grads.motion_mlp) CHECK(g == 0.0);
    for (double g : grads.image_mlp) CHECK(g == 0.0);
}

TEST_CASE("motion gradients vanish when the transformed term is satisfied") {
    RegistrationModel m = tiny_model(1, 9);
    // give the model a nontrivial state
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> unit(-0.2, 0.2);
    for (double& v : m.image_grid.tables) v = unit(rng);
    for (double& v : m.motion_grid.tables) v = unit(rng);
    m.motion_mlp = init_mlp([&] {
        MlpConfig c = m.motion_mlp.config;
        c.final_layer_zero_init = false;
        return c;
    }(), 99);

    const ModelWeights w = ModelWeights::ones(m);
    std::vector<double> coords = random_coords(10, rng);
    std::vector<double> ref(10, 0.5), trans(10);
    for (int k = 0; k < 10; ++k) {
        const double c[2] = {coords[2 * k], coords[2 * k + 1]};
        trans[k] = predict_transformed(m, c, w);  // second term residual = 0
    }
    ModelGrads grads;
    grads.resize_like(m);
    const LossTerms loss = loss_and_grads(m, coords, ref, trans, w, &grads);
    CHECK(loss.trans_term == 0.0);
    CHECK(loss.fixed_term > 0.0);
    for (double g : grads.motion_tables) CHECK(g == 0.0);
    for (double g : grads.motion_mlp) CHECK(g == 0.0);
    // the fixed term still drives the image network
    double image_norm = 0.0;
    for (double g : grads.image_mlp) image_norm += std::abs(g);
    CHECK(image_norm > 0.0);
}

TEST_CASE("full pipeline gradient check") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unit(-0.3, 0.3);
    std::uniform_real_distribution<double> sample(0.0, 1.0);

    RegistrationModel m = tiny_model(1, 33);
    // non-degenerate state everywhere, including a live motion path
    for (double& v : m.image_grid.tables) v = unit(rng);
    for (double& v : m.motion_grid.tables) v = 0.3 * unit(rng);
    m.motion_mlp = init_mlp([&] {
        MlpConfig c = m.motion_mlp.config;
        c.final_layer_zero_init = false;
        return c;
    }(), 55);
    for (double& v : m.motion_mlp.data) v *= 0.3;

    std::vector<double> coords = random_coords(6, rng);
    std::vector<double> ref(6), trans(6);
    for (double& v : ref) v = sample(rng);
    for (double& v : trans) v = sample(rng);

    const ModelWeights w{LevelWeights{{1.0, 0.8}}, LevelWeights{{1.0, 0.6}}};
    ModelGrads grads;
    grads.resize_like(m);
    loss_and_grads(m, coords, ref, trans, w, &grads);

    const auto loss_of = [&](const RegistrationModel& mm) {
        return loss_and_grads(mm, coords, ref, trans, w, nullptr).total();
    };
    const double step = 1e-5;
    const auto check_block = [&](std::vector<double> RegistrationModel::*unused,
                                 std::vector<double>& params, const std::vector<double>& grad) {
        (void)unused;
        for (size_t i = 0; i < params.size(); ++i) {
            const double saved = params[i];
            params[i] = saved + step;
            const double lp = loss_of(m);
            params[i] = saved - step;
            const double lm = loss_of(m);
            params[i] = saved;
            const double fd = (lp - lm) / (2 * step);
            const double denom = std::max(std::abs(fd), 1e-6);
            CHECK(std::abs(grad[i] - fd) / denom < 1e-3);
        }
    };
    check_block(nullptr, m.motion_grid.tables, grads.motion_tables);
    check_block(nullptr, m.image_grid.tables, grads.image_tables);
    check_block(nullptr, m.motion_mlp.data, grads.motion_mlp);
    check_block(nullptr, m.image_mlp.data, grads.image_mlp);
}

TEST_CASE("export_displacement_field shape and zero init") {
    RegistrationModel m = tiny_model(1, 44);
    const std::vector<int> extents = {5, 7};
    DisplacementField f = export_displacement_field(m, extents, LevelWeights::ones(2));
    CHECK(f.extents == extents);
    CHECK(f.components == 2);
    CHECK(f.values.size() == 5u * 7u * 2u);
    for (double v : f.values) CHECK(v == 0.0);
}

TEST_CASE("warp_field identity and constant shift") {
    ScalarField img({6, 8});
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (double& v : img.values) v = unit(rng);

    DisplacementField identity(img.extents, 2);
    ScalarField same_lin = warp_field(img, identity, Interp::linear);
    ScalarField same_nn = warp_field(img, identity, Interp::nearest);
    CHECK(same_nn.values == img.values);
    for (long i = 0; i < img.count(); ++i)
        CHECK(same_lin.values[i] == doctest::Approx(img.values[i]).epsilon(1e-12));

    // constant +3 px shift along axis 0: output(y,x) = input(y+3,x)
    DisplacementField shift(img.extents, 2);
    for (long i = 0; i < img.count(); ++i) shift.at(i)[0] = 3.0;
    ScalarField moved = warp_field(img, shift, Interp::linear);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 8; ++x) {
            const double got = moved.values[y * 8 + x];
            if (y + 3 <= 5)
                CHECK(got == doctest::Approx(img.values[(y + 3) * 8 + x]).epsilon(1e-12));
            else
                CHECK(got == 0.0);  // out of bounds takes background
        }
}

TEST_CASE("label warp preserves vocabulary and rejects linear") {
    LabelField labels({6, 6});
    for (long i = 0; i < labels.count(); ++i) labels.values[i] = (i % 7 == 0) ? 3 : (i % 3 == 0 ? 1 : 0);
    DisplacementField disp(labels.extents, 2);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(-2.0, 2.0);
    for (double& v : disp.values) v = unit(rng);

    CHECK_THROWS(warp_field(labels, disp, Interp::linear));
    LabelField warped = warp_field(labels, disp, Interp::nearest);
    for (int32_t v : warped.values) CHECK((v == 0 || v == 1 || v == 3));
}
