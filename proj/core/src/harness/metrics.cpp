#include "noneguard/harness/metrics.hpp"

#include <algorithm>

#include "noneguard/error.hpp"
#include "noneguard/rng.hpp"

namespace noneguard::harness {

std::vector<int> predict_dataset(const nn::NetworkState& net, const poison::LabeledDataset& d, std::size_t batch_size) {
    std::vector<int> out;
    out.reserve(d.size());
    for (std::size_t begin = 0; begin < d.size(); begin += batch_size) {
        const std::size_t end = std::min(d.size(), begin + batch_size);
        const auto p = nn::predict(net, d.batch(begin, end));
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

double benign_accuracy(const nn::NetworkState& net, const poison::LabeledDataset& clean) {
    if (clean.empty()) throw InputError("benign accuracy of an empty dataset");
    const auto pred = predict_dataset(net, clean);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == clean.labels[i];
    return static_cast<double>(correct) / static_cast<double>(clean.size());
}

double attack_success_rate(const nn::NetworkState& net, const poison::LabeledDataset& clean,
                           const poison::TriggerSpec& trig, const poison::PoisonPolicy& policy) {
    if (clean.empty()) throw InputError("attack success rate of an empty dataset");
    poison::LabeledDataset stamped;
    stamped.class_count = clean.class_count;
    std::vector<int> targets;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        const int target = policy.target_for(clean.labels[i], clean.class_count);
        if (clean.labels[i] == target) continue;
        stamped.inputs.push_back(poison::stamp_trigger(clean.inputs[i], trig, mix_seed(policy.seed, 0x415352ULL, i)));
        stamped.labels.push_back(clean.labels[i]);
        stamped.poison_flags.push_back(1);
        targets.push_back(target);
    }
    if (stamped.empty()) throw InputError("no sample is eligible for the attack success rate");
    const auto pred = predict_dataset(net, stamped);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == targets[i];
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

PrecisionRecall precision_recall(std::span<const std::size_t> flagged, std::span<const std::uint8_t> truth) {
    PrecisionRecall pr;
    std::vector<std::uint8_t> hit(truth.size(), 0);
    for (auto i : flagged) {
        if (i >= truth.size()) throw InputError("flagged index " + std::to_string(i) + " out of range");
        hit[i] = 1;
    }
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (hit[i] && truth[i]) ++pr.true_positives;
        if (hit[i] && !truth[i]) ++pr.false_positives;
        if (!hit[i] && truth[i]) ++pr.false_negatives;
    }
    const std::size_t flagged_count = pr.true_positives + pr.false_positives;
    const std::size_t truth_count = pr.true_positives + pr.false_negatives;
    if (flagged_count == 0) {
        pr.precision = 1.0;
        pr.warnings.push_back("nothing flagged; precision defined as 1");
    } else {
        pr.precision = static_cast<double>(pr.true_positives) / static_cast<double>(flagged_count);
    }
    pr.recall = truth_count == 0 ? 1.0 : static_cast<double>(pr.true_positives) / static_cast<double>(truth_count);
    return pr;
}

}  // namespace noneguard::harness
