#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "noneguard/defense/profile.hpp"

namespace noneguard::defense {

enum class Detector {
    OtsuLinearity,  // fraction of non-negative pre-activations
    ConfidenceGap,  // activation gap between low- and high-confidence samples
};

std::string to_string(Detector d);
Detector parse_detector(const std::string& name);

struct DefenseConfig {
    double theta = 0.95;              // linearity threshold
    double reset_fraction = 0.03;     // per-layer cap on compromised neurons; 0 disables detection
    double selection_fraction = 0.10; // share of compromised neurons used to filter samples
    double lambda = 3.0;              // z-score threshold
    double lambda_low = 0.1;
    double lambda_high = 0.9;
    Detector detector = Detector::OtsuLinearity;
    std::size_t cadence = 1;          // epochs between detection rounds
    std::size_t max_epochs = 5;

    bool detection_enabled() const noexcept { return reset_fraction > 0.0; }
    /// Throws ConfigError when a value is out of range.
    void validate() const;
};

struct CompromisedNeuron {
    NeuronId id;
    double score = 0.0;  // linearity score, or activation gap for ConfidenceGap
};

/// Per layer, the top ceil(reset_fraction * n) neurons by score (ties: lower index).
/// OtsuLinearity additionally requires score >= theta. Layers without a nonlinearity
/// are skipped since they have no breakpoint.
std::vector<CompromisedNeuron> identify_compromised(const ActivationProfile& profile, const DefenseConfig& cfg);

struct PoisonFilterResult {
    std::vector<std::size_t> flagged;       // sample indices into the profiled dataset, ascending
    std::vector<NeuronId> neurons_used;     // selected, non-degenerate neurons
    std::vector<std::string> diagnostics;
};

/// Keeps the top ceil(selection_fraction * |compromised|) neurons by score, splits each
/// one's values with jenks_break and flags upper-cluster samples whose z-score against
/// the lower cluster reaches lambda on any selected neuron.
PoisonFilterResult identify_poisoned(const ActivationProfile& profile,
                                     const std::vector<CompromisedNeuron>& compromised, const DefenseConfig& cfg);

/// ceil(fraction * n) without representation error, e.g. 0.03 * 100 -> 3. At least 1 when fraction > 0.
std::size_t fraction_count(double fraction, std::size_t n);

}  // namespace noneguard::defense
