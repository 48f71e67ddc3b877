#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "noneguard/nn/network.hpp"
#include "noneguard/poison/dataset.hpp"
#include "noneguard/poison/poisoning.hpp"
#include "noneguard/poison/trigger.hpp"

namespace noneguard::harness {

/// Predicted labels for every sample, evaluated in batches.
std::vector<int> predict_dataset(const nn::NetworkState& net, const poison::LabeledDataset& d,
                                 std::size_t batch_size = 512);

/// Fraction of clean samples classified correctly.
double benign_accuracy(const nn::NetworkState& net, const poison::LabeledDataset& clean);

/// Stamps every clean sample whose label differs from its policy target and returns the
/// fraction predicted as that target. Throws InputError when no sample is eligible.
double attack_success_rate(const nn::NetworkState& net, const poison::LabeledDataset& clean,
                           const poison::TriggerSpec& trig, const poison::PoisonPolicy& policy);

struct PrecisionRecall {
    double precision = 1.0;
    double recall = 1.0;
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
    std::vector<std::string> warnings;
};

/// Flagged indices against ground truth. Precision is 1 (with a warning) when nothing is
/// flagged; recall is 1 when there is nothing to find.
PrecisionRecall precision_recall(std::span<const std::size_t> flagged, std::span<const std::uint8_t> truth);

}  // namespace noneguard::harness
