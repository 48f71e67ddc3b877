#include "noneguard/defense/training.hpp"

#include <algorithm>
#include <numeric>

#include "noneguard/defense/profile.hpp"
#include "noneguard/error.hpp"
#include "noneguard/harness/metrics.hpp"

namespace noneguard::defense {

namespace {

constexpr std::uint64_t kShuffleStream = 0x53485546ULL;
constexpr std::uint64_t kResetStream = 0x5245534554ULL;

void log_eval(const nn::NetworkState& net, const EvalContext* eval, std::optional<double>& ba,
              std::optional<double>& asr) {
    if (!eval || !eval->clean) return;
    ba = harness::benign_accuracy(net, *eval->clean);
    if (eval->trigger) asr = harness::attack_success_rate(net, *eval->clean, *eval->trigger, eval->policy);
}

nn::NetworkState fresh_network(const poison::LabeledDataset& d, const nn::NetworkSpec& spec,
                               const TrainSettings& settings, std::uint64_t seed) {
    d.validate();
    if (d.empty()) throw InputError("cannot train on an empty dataset");
    if (settings.batch_size == 0) throw ConfigError("batch size must be positive");
    nn::NetworkState net = nn::init_network(spec, seed, {settings.learning_rate, settings.momentum});
    if (d.sample_shape() != net.spec.input_shape) {
        throw InputError("dataset sample shape " + shape_to_string(d.sample_shape()) + " does not match network input " +
                         shape_to_string(net.spec.input_shape));
    }
    if (static_cast<std::size_t>(d.class_count) > net.class_count()) {
        throw ConfigError("network has fewer outputs than the dataset has classes");
    }
    return net;
}

}  // namespace

double train_epoch(nn::NetworkState& net, const poison::LabeledDataset& d, std::span<const std::size_t> working,
                   const TrainSettings& settings, Rng& shuffle_rng) {
    std::vector<std::size_t> order(working.begin(), working.end());
    shuffle_rng.shuffle(order.begin(), order.end());
    double total = 0.0;
    std::vector<int> labels;
    for (std::size_t begin = 0; begin < order.size(); begin += settings.batch_size) {
        const std::size_t end = std::min(order.size(), begin + settings.batch_size);
        const std::span<const std::size_t> idx(order.data() + begin, end - begin);
        labels.clear();
        for (auto i : idx) labels.push_back(d.labels[i]);
        total += nn::train_step(net, d.batch(idx), labels, settings.learning_rate) * static_cast<double>(idx.size());
    }
    return total / static_cast<double>(order.size());
}

TrainResult train_plain(const poison::LabeledDataset& d, const nn::NetworkSpec& spec, const TrainSettings& settings,
                        std::size_t epochs, std::uint64_t seed, const EvalContext* eval) {
    TrainResult result{fresh_network(d, spec, settings, seed), {}};
    std::vector<std::size_t> all(d.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    for (std::size_t e = 1; e <= epochs; ++e) {
        Rng rng(mix_seed(seed, kShuffleStream, e));
        EpochLog log{e, train_epoch(result.net, d, all, settings, rng), all.size(), {}, {}};
        log_eval(result.net, eval, log.benign_accuracy, log.attack_success_rate);
        result.report.epochs.push_back(log);
    }
    return result;
}

TrainResult train_none(const poison::LabeledDataset& d, const nn::NetworkSpec& spec, const DefenseConfig& cfg,
                       const TrainSettings& settings, std::uint64_t seed, const EvalContext* eval,
                       const poison::LabeledDataset* validation) {
    cfg.validate();
    TrainResult result{fresh_network(d, spec, settings, seed), {}};
    auto& net = result.net;
    auto& report = result.report;

    std::vector<std::size_t> working(d.size());
    std::iota(working.begin(), working.end(), std::size_t{0});
    std::size_t quiet_rounds = 0;
    std::optional<double> last_validation;

    for (std::size_t e = 1; e <= cfg.max_epochs; ++e) {
        Rng rng(mix_seed(seed, kShuffleStream, e));
        EpochLog elog{e, train_epoch(net, d, working, settings, rng), working.size(), {}, {}};
        log_eval(net, eval, elog.benign_accuracy, elog.attack_success_rate);
        report.epochs.push_back(elog);

        if (!cfg.detection_enabled() || e % cfg.cadence != 0 || e == cfg.max_epochs) continue;

        RoundLog round;
        round.round = report.rounds.size() + 1;
        round.epoch = e;
        const poison::LabeledDataset current = d.subset(working);
        const ActivationProfile profile = collect_profile(net, current, settings.threads);
        round.compromised = identify_compromised(profile, cfg);

        if (!round.compromised.empty()) {
            PoisonFilterResult filtered = identify_poisoned(profile, round.compromised, cfg);
            round.diagnostics = std::move(filtered.diagnostics);
            std::vector<std::uint8_t> drop(working.size(), 0);
            for (auto s : filtered.flagged) drop[s] = 1;
            std::vector<std::size_t> kept;
            kept.reserve(working.size());
            for (std::size_t k = 0; k < working.size(); ++k) {
                (drop[k] ? round.removed : kept).push_back(working[k]);
            }
            if (static_cast<double>(kept.size()) < kMinWorkingFraction * static_cast<double>(d.size())) {
                throw OverFilteringError("defense would keep " + std::to_string(kept.size()) + " of " +
                                         std::to_string(d.size()) + " samples in round " +
                                         std::to_string(round.round) + "; aborting (over-filtering)");
            }
            working = std::move(kept);
            for (const auto& c : round.compromised) {
                nn::reinit_neuron(net, c.id.layer, c.id.neuron, mix_seed(seed, kResetStream, round.round));
            }
        } else {
            round.diagnostics.push_back("no compromised neurons");
        }
        round.working_size_after = working.size();
        report.removed.insert(report.removed.end(), round.removed.begin(), round.removed.end());
        log_eval(net, eval, round.benign_accuracy, round.attack_success_rate);

        bool stop = false;
        if (validation) {
            round.validation_accuracy = harness::benign_accuracy(net, *validation);
            quiet_rounds = round.compromised.empty() ? quiet_rounds + 1 : 0;
            if (quiet_rounds >= 2 && last_validation &&
                *round.validation_accuracy - *last_validation < kTerminationMinGain) {
                stop = true;
            }
            last_validation = round.validation_accuracy;
        }
        report.rounds.push_back(std::move(round));
        if (stop) {
            report.stopped_early = true;
            break;
        }
    }
    std::sort(report.removed.begin(), report.removed.end());
    return result;
}

}  // namespace noneguard::defense
