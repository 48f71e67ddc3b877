#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "noneguard/nn/layer.hpp"
#include "noneguard/tensor.hpp"

namespace noneguard::nn {

/// Weight and bias of one layer. Both are empty for Flatten and MaxPool.
/// Dense weights are (out, in); Conv2D weights are (out_ch, in_ch, k, k).
struct LayerParams {
    Tensor weight;
    Tensor bias;

    friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

struct OptimizerSettings {
    double learning_rate = 0.01;
    double momentum = 0.9;
};

/// SGD with heavy-ball momentum: v <- momentum * v + g, p <- p - lr * v.
struct OptimizerState {
    OptimizerSettings settings;
    std::vector<LayerParams> velocity;

    friend bool operator==(const OptimizerState& a, const OptimizerState& b) {
        return a.settings.learning_rate == b.settings.learning_rate && a.settings.momentum == b.settings.momentum &&
               a.velocity == b.velocity;
    }
};

struct NetworkState {
    NetworkSpec spec;
    std::vector<LayerParams> params;  // one entry per layer
    OptimizerState optimizer;
    std::uint64_t rng_seed = 0;

    std::size_t class_count() const;
    std::vector<std::size_t> parameterized_layers() const;
    /// Output neurons of a Dense layer or output channels of a Conv2D layer.
    std::size_t neuron_count(std::size_t layer) const;

    friend bool operator==(const NetworkState& a, const NetworkState& b) {
        return a.params == b.params && a.optimizer == b.optimizer && a.rng_seed == b.rng_seed;
    }
};

/// Pre-activation values of one parameterized layer, sample-major:
/// value(s, n) = values[s * neurons + n]. Conv2D channels report the spatial maximum.
struct LayerActivations {
    std::size_t layer = 0;
    std::size_t neurons = 0;
    std::size_t samples = 0;
    std::vector<double> values;

    double value(std::size_t sample, std::size_t neuron) const { return values[sample * neurons + neuron]; }
};

struct ActivationRecord {
    std::vector<LayerActivations> layers;
};

struct ForwardResult {
    Tensor logits;
    std::optional<ActivationRecord> record;
};

struct Gradients {
    double loss = 0.0;
    std::vector<LayerParams> params;
};

NetworkState init_network(NetworkSpec spec, std::uint64_t seed, OptimizerSettings optimizer = {});

ForwardResult forward(const NetworkState& net, const Tensor& batch, bool record = false);

/// Argmax of the logits per sample.
std::vector<int> predict(const NetworkState& net, const Tensor& batch);

/// Mean softmax cross-entropy of the batch.
double evaluate_loss(const NetworkState& net, const Tensor& batch, std::span<const int> labels);

/// Loss and its gradient with respect to every parameter.
Gradients compute_gradients(const NetworkState& net, const Tensor& batch, std::span<const int> labels);

/// One SGD(+momentum) step. Returns the loss before the update.
double train_step(NetworkState& net, const Tensor& batch, std::span<const int> labels, double learning_rate);

/// Redraws the incoming weights and bias of one neuron (Dense) or output channel (Conv2D)
/// with the network's initializer and clears its momentum. Everything else is untouched.
void reinit_neuron(NetworkState& net, std::size_t layer, std::size_t neuron, std::uint64_t seed);

/// Bound of the fan-in scaled uniform initializer: sqrt(6 / fan_in).
double init_bound(std::size_t fan_in);

}  // namespace noneguard::nn
