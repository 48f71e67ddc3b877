#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "noneguard/defense/training.hpp"
#include "noneguard/harness/config.hpp"
#include "noneguard/lab/histogram.hpp"
#include "noneguard/lab/region.hpp"
#include "noneguard/poison/dataset.hpp"
#include "noneguard/poison/poisoning.hpp"
#include "noneguard/poison/trigger.hpp"

namespace noneguard::harness {

inline constexpr const char* kReportSchema = "noneguard.report/1";

/// Training data, clean test data and the attack of one experiment.
struct ExperimentData {
    poison::LabeledDataset train;  // poisoned when the attack is enabled
    poison::LabeledDataset test;   // clean
    std::optional<poison::LabeledDataset> validation;
    poison::TriggerSpec trigger;
    poison::PoisonPolicy policy;
    nn::NetworkSpec model;
};

/// Deterministic in (config, seed). MNIST files are looked up under $NONEGUARD_DATA/mnist
/// when the variable is set, otherwise under cfg.mnist_root.
ExperimentData prepare_data(const ExperimentConfig& cfg);

struct RoundRecord {
    std::size_t round = 0;
    std::size_t epoch = 0;
    std::vector<defense::CompromisedNeuron> compromised;
    std::size_t flagged = 0;           // samples removed in this round
    std::optional<double> precision;   // cumulative removals against ground truth
    std::optional<double> recall;
    std::optional<double> benign_accuracy;
    std::optional<double> attack_success_rate;
    std::vector<std::string> diagnostics;
};

struct ExperimentReport {
    std::vector<std::pair<std::string, std::string>> config;
    std::uint64_t seed = 0;
    std::vector<defense::EpochLog> epochs;
    bool defense_enabled = false;
    std::vector<RoundRecord> rounds;
    std::size_t removed = 0;
    std::optional<double> precision;
    std::optional<double> recall;
    double benign_accuracy = 0.0;
    std::optional<double> attack_success_rate;
    std::optional<double> coverage;
    double wall_clock_seconds = 0.0;
    std::vector<std::string> notes;
};

/// Everything produced by one run, kept in memory for callers that inspect the model.
struct ExperimentOutcome {
    ExperimentReport report;
    nn::NetworkState net;
    std::vector<std::size_t> removed;
    std::optional<lab::LabelGrid> raster;
    std::optional<lab::PairedHistogram> histogram;
};

/// attack -> train (plain or defended) -> evaluate -> analyze. When `out_dir` is set the
/// report (report.json), epoch series (epochs.csv), per-round log (rounds.jsonl),
/// removed indices (removed.txt), checkpoint (model.ngck) and requested analysis
/// artifacts are written there.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& out_dir = {});
ExperimentOutcome run_experiment(const std::filesystem::path& config_path,
                                 const std::optional<std::filesystem::path>& out_dir = {});

/// Report as JSON text. Without the wall-clock field the text is a pure function of the config.
std::string report_json(const ExperimentReport& report, bool include_wall_clock = true);
std::string round_json_line(const RoundRecord& round);
void write_epochs_csv(const std::filesystem::path& path, const ExperimentReport& report);

}  // namespace noneguard::harness
