#include "noneguard/poison/poisoning.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "noneguard/error.hpp"
#include "noneguard/rng.hpp"

namespace noneguard::poison {

int PoisonPolicy::target_for(int label, int class_count) const {
    if (const auto* st = std::get_if<SingleTarget>(&targeting)) return st->label;
    return (label + 1) % class_count;
}

std::size_t poison_count(double rate, std::size_t n) {
    // The epsilon absorbs representation error, e.g. 0.05 * 60000.
    return static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 1e-9));
}

LabeledDataset poison_dataset(const LabeledDataset& d, const TriggerSpec& trig, const PoisonPolicy& policy) {
    d.validate();
    trig.validate();
    if (!(policy.rate >= 0.0) || policy.rate >= 1.0) {
        throw ConfigError("poisoning rate must lie in [0, 1), got " + std::to_string(policy.rate));
    }
    if (const auto* st = std::get_if<SingleTarget>(&policy.targeting)) {
        if (st->label < 0 || st->label >= d.class_count) throw ConfigError("target label outside the class range");
    }
    const std::size_t count = poison_count(policy.rate, d.size());
    if (count < 1) throw ConfigError("poisoning rate selects no samples");

    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(policy.seed, 0x504f49534f4eULL));
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = i + rng.below(order.size() - i);
        std::swap(order[i], order[j]);
    }

    LabeledDataset out = d;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t idx = order[i];
        out.inputs[idx] = stamp_trigger(d.inputs[idx], trig, mix_seed(policy.seed, idx));
        out.labels[idx] = policy.target_for(d.labels[idx], d.class_count);
        out.poison_flags[idx] = 1;
    }
    return out;
}

std::vector<std::array<double, 2>> blob_centers(int k) {
    std::vector<std::array<double, 2>> c(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        const double a = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * i / k;
        c[static_cast<std::size_t>(i)] = {kBlobRadius * std::cos(a), kBlobRadius * std::sin(a)};
    }
    return c;
}

LabeledDataset make_blobs(std::size_t n_per_class, int k, double stddev, std::uint64_t seed) {
    if (k < 2) throw ConfigError("blobs need at least two classes");
    if (!(stddev >= 0.0)) throw ConfigError("blob spread must be non-negative");
    const auto centers = blob_centers(k);
    Rng rng(mix_seed(seed, 0x424c4f42ULL));
    LabeledDataset d;
    d.class_count = k;
    const std::size_t n = n_per_class * static_cast<std::size_t>(k);
    d.inputs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % static_cast<std::size_t>(k));
        const auto& c = centers[static_cast<std::size_t>(label)];
        const double x1 = std::clamp(c[0] + stddev * rng.normal(), -1.0, 1.0);
        const double x2 = std::clamp(c[1] + stddev * rng.normal(), -1.0, 1.0);
        d.inputs.push_back(Tensor::from_values({x1, x2}));
        d.labels.push_back(label);
    }
    d.poison_flags.assign(n, 0);
    return d;
}

}  // namespace noneguard::poison
