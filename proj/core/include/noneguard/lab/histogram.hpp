#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "noneguard/defense/profile.hpp"
#include "noneguard/nn/network.hpp"
#include "noneguard/poison/dataset.hpp"
#include "noneguard/poison/trigger.hpp"

namespace noneguard::lab {

/// Pre-activation histograms of a neuron set over stamped and clean copies of a dataset.
/// Both share `edges` (bins + 1 values) and are normalized to unit mass.
struct PairedHistogram {
    std::vector<double> edges;
    std::vector<double> triggered;
    std::vector<double> benign;
    double triggered_nonnegative = 0.0;  // exact share of values >= 0
    double benign_nonnegative = 0.0;
    std::size_t values_per_side = 0;
};

/// Throws InputError for an empty neuron set or an unknown neuron. Stamping uses
/// mix_seed(seed, i) for sample i.
PairedHistogram activation_histogram(const nn::NetworkState& net, const poison::LabeledDataset& d,
                                     const poison::TriggerSpec& trig, const std::vector<defense::NeuronId>& neurons,
                                     std::size_t bins, std::uint64_t seed = 0, std::size_t threads = 1);

/// Columns bin_left,bin_right,triggered_mass,benign_mass.
void write_histogram_csv(const std::filesystem::path& path, const PairedHistogram& h);

}  // namespace noneguard::lab
