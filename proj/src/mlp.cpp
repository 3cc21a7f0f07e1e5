#include "mlp.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace unireg {

namespace {

double activate(Activation act, double x) {
    switch (act) {
        case Activation::relu:
            return x > 0.0 ? x : 0.0;
        case Activation::gelu:
            return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
    }
    return x;
}

double activate_grad(Activation act, double x) {
    switch (act) {
        case Activation::relu:
            return x > 0.0 ? 1.0 : 0.0;
        case Activation::gelu: {
            const double cdf = 0.5 * (1.0 + std::erf(x / std::sqrt(2.0)));
            const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
            return cdf + x * pdf;
        }
    }
    return 1.0;
}

}  // namespace

void MlpConfig::validate() const {
    if (input_dim < 1 || output_dim < 1) throw std::invalid_argument("mlp dims must be >= 1");
    if (hidden_widths.empty()) throw std::invalid_argument("mlp needs at least one hidden layer");
    for (int w : hidden_widths)
        if (w < 1) throw std::invalid_argument("mlp hidden width must be >= 1");
}

int MlpConfig::layer_in(int layer) const {
    return layer == 0 ? input_dim : hidden_widths[layer - 1];
}

int MlpConfig::layer_out(int layer) const {
    return layer == static_cast<int>(hidden_widths.size()) ? output_dim : hidden_widths[layer];
}

size_t MlpConfig::param_count() const {
    size_t n = 0;
    for (int l = 0; l < layer_count(); ++l)
        n += static_cast<size_t>(layer_out(l)) * layer_in(l) + layer_out(l);
    return n;
}

size_t MlpConfig::layer_offset(int layer) const {
    size_t n = 0;
    for (int l = 0; l < layer; ++l)
        n += static_cast<size_t>(layer_out(l)) * layer_in(l) + layer_out(l);
    return n;
}

MlpParams init_mlp(const MlpConfig& config, uint64_t seed) {
    config.validate();
    MlpParams params{config, std::vector<double>(config.param_count(), 0.0)};
    std::mt19937_64 rng(seed);
    const int last = config.layer_count() - 1;
    for (int l = 0; l < config.layer_count(); ++l) {
        if (l == last && config.final_layer_zero_init) break;
        const int in = config.layer_in(l);
        const int out = config.layer_out(l);
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        double* w = params.data.data() + config.layer_offset(l);
        for (int i = 0; i < out * in; ++i) w[i] = dist(rng);
        // biases stay 0
    }
    return params;
}

void mlp_forward(const MlpParams& params, const double* input, double* output, MlpWorkspace* ws) {
    const MlpConfig& cfg = params.config;
    const int layers = cfg.layer_count();
    if (ws) {
        ws->input.assign(input, input + cfg.input_dim);
        ws->pre.resize(layers);
        ws->post.resize(layers - 1);
    }
    std::vector<double> cur(input, input + cfg.input_dim);
    std::vector<double> next;
    for (int l = 0; l < layers; ++l) {
        const int in = cfg.layer_in(l);
        const int out = cfg.layer_out(l);
        const double* w = params.data.data() + cfg.layer_offset(l);
        const double* b = w + static_cast<size_t>(out) * in;
        next.assign(out, 0.0);
        for (int j = 0; j < out; ++j) {
            double acc = b[j];
            const double* row = w + static_cast<size_t>(j) * in;
            for (int i = 0; i < in; ++i) acc += row[i] * cur[i];
            next[j] = acc;
        }
        if (ws) ws->pre[l] = next;
        if (l < layers - 1)
            for (double& v : next) v = activate(cfg.activation, v);
        if (ws && l < layers - 1) ws->post[l] = next;
        cur.swap(next);
    }
    std::copy(cur.begin(), cur.end(), output);
}

void mlp_backward(const MlpParams& params, const MlpWorkspace& ws, const double* upstream,
                  double* param_grad, double* input_grad) {
    const MlpConfig& cfg = params.config;
    const int layers = cfg.layer_count();
    std::vector<double> delta(upstream, upstream + cfg.output_dim);
    std::vector<double> prev_delta;
    for (int l = layers - 1; l >= 0; --l) {
        const int in = cfg.layer_in(l);
        const int out = cfg.layer_out(l);
        const double* w = params.data.data() + cfg.layer_offset(l);
        const double* x = (l == 0) ? ws.input.data() : ws.post[l - 1].data();
        if (param_grad) {
            double* gw = param_grad + cfg.layer_offset(l);
            double* gb = gw + static_cast<size_t>(out) * in;
            for (int j = 0; j < out; ++j) {
                const double dj = delta[j];
                double* grow = gw + static_cast<size_t>(j) * in;
                for (int i = 0; i < in; ++i) grow[i] += dj * x[i];
                gb[j] += dj;
            }
        }
        if (l == 0 && !input_grad) break;
        prev_delta.assign(in, 0.0);
        for (int j = 0; j < out; ++j) {
            const double dj = delta[j];
            const double* row = w + static_cast<size_t>(j) * in;
            for (int i = 0; i < in; ++i) prev_delta[i] += dj * row[i];
        }
        if (l > 0) {
            const std::vector<double>& pre = ws.pre[l - 1];
            for (int i = 0; i < in; ++i)
                prev_delta[i] *= activate_grad(cfg.activation, pre[i]);
        } else {
            std::copy(prev_delta.begin(), prev_delta.end(), input_grad);
        }
        delta.swap(prev_delta);
    }
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw std::invalid_argument("adam_step: size mismatch");
    const AdamConfig& c = state.config;
    state.t += 1;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
    for (size_t i = 0; i < params.size(); ++i) {
        state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * grads[i];
        state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
}

}  // namespace unireg
