#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "noneguard/defense/detect.hpp"
#include "noneguard/nn/network.hpp"
#include "noneguard/poison/dataset.hpp"
#include "noneguard/poison/poisoning.hpp"
#include "noneguard/poison/trigger.hpp"
#include "noneguard/rng.hpp"

namespace noneguard::defense {

struct TrainSettings {
    std::size_t batch_size = 32;
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::size_t threads = 1;  // used for forward-only profiling
};

/// Optional clean test data and attack used to log BA / ASR while training.
struct EvalContext {
    const poison::LabeledDataset* clean = nullptr;
    const poison::TriggerSpec* trigger = nullptr;
    poison::PoisonPolicy policy;
};

struct EpochLog {
    std::size_t epoch = 0;  // 1-based
    double mean_loss = 0.0;
    std::size_t working_size = 0;
    std::optional<double> benign_accuracy;
    std::optional<double> attack_success_rate;
};

struct RoundLog {
    std::size_t round = 0;  // 1-based
    std::size_t epoch = 0;
    std::vector<CompromisedNeuron> compromised;
    std::vector<std::size_t> removed;  // original dataset indices, ascending
    std::vector<std::string> diagnostics;
    std::size_t working_size_after = 0;
    std::optional<double> benign_accuracy;
    std::optional<double> attack_success_rate;
    std::optional<double> validation_accuracy;
};

struct TrainingReport {
    std::vector<EpochLog> epochs;
    std::vector<RoundLog> rounds;
    std::vector<std::size_t> removed;  // every removed index, ascending
    bool stopped_early = false;

    std::vector<std::size_t> flagged_samples() const { return removed; }
};

struct TrainResult {
    nn::NetworkState net;
    TrainingReport report;
};

/// One pass over `working` (indices into d) in a seeded shuffled order. Returns the mean loss.
double train_epoch(nn::NetworkState& net, const poison::LabeledDataset& d, std::span<const std::size_t> working,
                   const TrainSettings& settings, Rng& shuffle_rng);

/// Standard training for `epochs` epochs.
TrainResult train_plain(const poison::LabeledDataset& d, const nn::NetworkSpec& spec, const TrainSettings& settings,
                        std::size_t epochs, std::uint64_t seed, const EvalContext* eval = nullptr);

/// Revised training loop: after each `cadence` epochs (never after the last epoch) the
/// working set is profiled, compromised neurons are identified, poisoned samples are
/// removed for good and the compromised neurons are re-initialized. Stops early after
/// two consecutive rounds without compromised neurons if validation accuracy improved
/// by less than 0.1 percentage points. Throws OverFilteringError if fewer than 10% of
/// the samples remain.
TrainResult train_none(const poison::LabeledDataset& d, const nn::NetworkSpec& spec, const DefenseConfig& cfg,
                       const TrainSettings& settings, std::uint64_t seed, const EvalContext* eval = nullptr,
                       const poison::LabeledDataset* validation = nullptr);

inline constexpr double kMinWorkingFraction = 0.10;
inline constexpr double kTerminationMinGain = 0.001;

}  // namespace noneguard::defense
