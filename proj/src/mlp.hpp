#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace unireg {

enum class Activation { relu, gelu };

struct MlpConfig {
    int input_dim = 1;
    std::vector<int> hidden_widths = {64, 64};
    int output_dim = 1;
    Activation activation = Activation::relu;
    bool final_layer_zero_init = false;

    void validate() const;
    int layer_count() const { return static_cast<int>(hidden_widths.size()) + 1; }
    int layer_in(int layer) const;
    int layer_out(int layer) const;
    // Flat parameter layout: [W0 (out x in, row-major), b0, W1, b1, ...].
    size_t param_count() const;
    size_t layer_offset(int layer) const;
};

struct MlpParams {
    MlpConfig config;
    std::vector<double> data;
};

// Hidden weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases 0.
// With final_layer_zero_init, the last layer's weights and bias are exactly 0.
MlpParams init_mlp(const MlpConfig& config, uint64_t seed);

// Per-layer activations cached by forward for use by backward.
struct MlpWorkspace {
    std::vector<double> input;
    std::vector<std::vector<double>> pre;   // pre-activation per layer
    std::vector<std::vector<double>> post;  // post-activation per hidden layer
};

void mlp_forward(const MlpParams& params, const double* input, double* output,
                 MlpWorkspace* ws = nullptr);

// Accumulates parameter gradients into param_grad (flat layout) and writes the
// gradient with respect to the input into input_grad (may be null).
void mlp_backward(const MlpParams& params, const MlpWorkspace& ws, const double* upstream,
                  double* param_grad, double* input_grad);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig config;
    std::vector<double> m, v;
    long t = 0;

    explicit AdamState(size_t n = 0, AdamConfig cfg = {})
        : config(cfg), m(n, 0.0), v(n, 0.0) {}
};

// Standard bias-corrected Adam update, in place.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

}  // namespace unireg
