#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <vector>

#include "noneguard/nn/network.hpp"
#include "noneguard/poison/dataset.hpp"

namespace noneguard::defense {

struct NeuronId {
    std::size_t layer = 0;
    std::size_t neuron = 0;

    friend auto operator<=>(const NeuronId&, const NeuronId&) = default;
};

/// Pre-activation values of one layer over a dataset, neuron-major:
/// values[neuron * samples + sample].
struct LayerProfile {
    std::size_t layer = 0;
    std::size_t neurons = 0;
    nn::Activation activation;
    std::vector<double> values;
};

/// Per-neuron activation vectors over every sample of a dataset, sample-index aligned.
struct ActivationProfile {
    std::size_t samples = 0;
    std::vector<LayerProfile> layers;
    std::vector<double> label_confidence;  // softmax probability of each sample's label
    std::vector<double> max_confidence;    // largest softmax probability of each sample

    std::span<const double> values(NeuronId id) const;
    const LayerProfile* find_layer(std::size_t layer) const;
    std::size_t neuron_total() const;
};

/// Runs the network over `d` and records every parameterized layer. Batches are
/// distributed over `threads` workers and merged by sample index, so the result does
/// not depend on the thread count. The network is not modified.
ActivationProfile collect_profile(const nn::NetworkState& net, const poison::LabeledDataset& d,
                                  std::size_t threads = 1, std::size_t batch_size = 256);

}  // namespace noneguard::defense
