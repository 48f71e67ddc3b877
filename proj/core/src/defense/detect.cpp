#include "noneguard/defense/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "noneguard/defense/separation.hpp"
#include "noneguard/error.hpp"

namespace noneguard::defense {

std::string to_string(Detector d) { return d == Detector::OtsuLinearity ? "otsu_linearity" : "confidence_gap"; }

Detector parse_detector(const std::string& name) {
    if (name == "otsu_linearity" || name == "otsu") return Detector::OtsuLinearity;
    if (name == "confidence_gap" || name == "confidence") return Detector::ConfidenceGap;
    throw ConfigError("unknown detector '" + name + "'");
}

void DefenseConfig::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError("invalid defense config: " + what);
    };
    require(theta > 0.0 && theta <= 1.0, "theta must lie in (0, 1]");
    require(reset_fraction >= 0.0 && reset_fraction <= 1.0, "reset_fraction must lie in [0, 1]");
    require(selection_fraction > 0.0 && selection_fraction <= 1.0, "selection_fraction must lie in (0, 1]");
    require(lambda > 0.0, "lambda must be positive");
    require(lambda_low < lambda_high, "lambda_low must be below lambda_high");
    require(cadence >= 1, "cadence must be at least 1");
    require(max_epochs >= 1, "max_epochs must be at least 1");
}

std::size_t fraction_count(double fraction, std::size_t n) {
    if (fraction <= 0.0 || n == 0) return 0;
    const auto c = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
    return std::clamp<std::size_t>(c, 1, n);
}

namespace {

std::vector<double> confidence_gap_scores(const ActivationProfile& profile, const LayerProfile& lp,
                                          const DefenseConfig& cfg) {
    std::vector<std::size_t> low, high;
    for (std::size_t s = 0; s < profile.samples; ++s) {
        const double p = profile.label_confidence[s];
        if (p <= cfg.lambda_low) low.push_back(s);
        if (p >= cfg.lambda_high) high.push_back(s);
    }
    if (low.empty() || high.empty()) return {};
    std::vector<double> scores(lp.neurons);
    for (std::size_t j = 0; j < lp.neurons; ++j) {
        const double* v = lp.values.data() + j * profile.samples;
        double ml = 0.0, mh = 0.0;
        for (auto s : low) ml += v[s];
        for (auto s : high) mh += v[s];
        scores[j] = std::abs(mh / static_cast<double>(high.size()) - ml / static_cast<double>(low.size()));
    }
    return scores;
}

}  // namespace

std::vector<CompromisedNeuron> identify_compromised(const ActivationProfile& profile, const DefenseConfig& cfg) {
    cfg.validate();
    std::vector<CompromisedNeuron> out;
    if (!cfg.detection_enabled() || profile.samples == 0) return out;
    for (const auto& lp : profile.layers) {
        if (lp.activation.kind == nn::ActivationKind::None || lp.neurons == 0) continue;
        std::vector<double> scores;
        if (cfg.detector == Detector::OtsuLinearity) {
            scores.resize(lp.neurons);
            for (std::size_t j = 0; j < lp.neurons; ++j) {
                scores[j] = linearity_score({lp.values.data() + j * profile.samples, profile.samples});
            }
        } else {
            scores = confidence_gap_scores(profile, lp, cfg);
            if (scores.empty()) continue;
        }
        std::vector<std::size_t> order(lp.neurons);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
        const std::size_t cap = fraction_count(cfg.reset_fraction, lp.neurons);
        for (std::size_t r = 0; r < cap; ++r) {
            const std::size_t j = order[r];
            if (cfg.detector == Detector::OtsuLinearity && scores[j] < cfg.theta) break;
            out.push_back({{lp.layer, j}, scores[j]});
        }
    }
    return out;
}

PoisonFilterResult identify_poisoned(const ActivationProfile& profile,
                                     const std::vector<CompromisedNeuron>& compromised, const DefenseConfig& cfg) {
    cfg.validate();
    PoisonFilterResult result;
    if (compromised.empty()) {
        result.diagnostics.push_back("no compromised neurons; nothing to filter");
        return result;
    }
    std::vector<CompromisedNeuron> ranked = compromised;
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    ranked.resize(fraction_count(cfg.selection_fraction, ranked.size()));

    std::vector<std::uint8_t> flag(profile.samples, 0);
    for (const auto& c : ranked) {
        const auto values = profile.values(c.id);
        const Separation sep = jenks_break(values);
        if (sep.degenerate) {
            result.diagnostics.push_back("neuron (" + std::to_string(c.id.layer) + "," + std::to_string(c.id.neuron) +
                                         ") has identical activations; skipped");
            continue;
        }
        result.neurons_used.push_back(c.id);
        const Moments ref = moments(sep.lower);
        for (std::size_t s = 0; s < values.size(); ++s) {
            const double v = values[s];
            if (v <= sep.break_value) continue;
            const bool outlier = ref.stddev > 0.0 ? std::abs((v - ref.mean) / ref.stddev) >= cfg.lambda : v != ref.mean;
            if (outlier) flag[s] = 1;
        }
    }
    if (result.neurons_used.empty()) {
        result.diagnostics.push_back("every selected neuron was degenerate; no samples flagged");
    }
    for (std::size_t s = 0; s < flag.size(); ++s) {
        if (flag[s]) result.flagged.push_back(s);
    }
    return result;
}

}  // namespace noneguard::defense
