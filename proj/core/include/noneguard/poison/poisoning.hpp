#pragma once

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "noneguard/poison/dataset.hpp"
#include "noneguard/poison/trigger.hpp"

namespace noneguard::poison {

struct SingleTarget {
    int label = 0;
};

/// Class y is relabeled to (y + 1) mod K.
struct LabelSpecific {};

using Targeting = std::variant<SingleTarget, LabelSpecific>;

struct PoisonPolicy {
    double rate = 0.05;
    Targeting targeting = SingleTarget{};
    std::uint64_t seed = 0;

    int target_for(int label, int class_count) const;
};

/// floor(rate * n) samples drawn without replacement are stamped, relabeled and
/// flagged. Other samples and the sample order are left untouched.
LabeledDataset poison_dataset(const LabeledDataset& d, const TriggerSpec& trig, const PoisonPolicy& policy);

/// Number of samples `poison_dataset` will poison.
std::size_t poison_count(double rate, std::size_t n);

/// k isotropic 2-D Gaussians. Class c is centred at angle pi/2 + 2*pi*c/k on a circle of
/// radius 0.75; samples are clipped to [-1, 1]^2. Sample i belongs to class i mod k.
LabeledDataset make_blobs(std::size_t n_per_class, int k, double stddev, std::uint64_t seed);

std::vector<std::array<double, 2>> blob_centers(int k);

inline constexpr double kBlobRadius = 0.75;

}  // namespace noneguard::poison
