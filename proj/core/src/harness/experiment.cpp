#include "noneguard/harness/experiment.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "noneguard/defense/profile.hpp"
#include "noneguard/error.hpp"
#include "noneguard/harness/metrics.hpp"
#include "noneguard/lab/hyperplane.hpp"
#include "noneguard/nn/checkpoint.hpp"
#include "noneguard/poison/io.hpp"
#include "noneguard/rng.hpp"

namespace noneguard::harness {

namespace {

using nlohmann::ordered_json;

constexpr std::uint64_t kDataStream = 0x44415441ULL;
constexpr std::uint64_t kPoisonStream = 0x504f4953ULL;

std::filesystem::path mnist_dir(const ExperimentConfig& cfg) {
    if (const char* env = std::getenv("NONEGUARD_DATA"); env && *env) return std::filesystem::path(env) / "mnist";
    return cfg.mnist_root;
}

poison::TriggerSpec make_trigger(const ExperimentConfig& cfg, const Shape& sample_shape) {
    switch (cfg.trigger) {
        case TriggerKind::Pixel:
            return poison::pixel_trigger(sample_shape, cfg.attack_value);
        case TriggerKind::Patch:
            return poison::patch_trigger(sample_shape, cfg.patch_size, cfg.attack_value, cfg.random_placement);
        case TriggerKind::Coordinate:
            break;
    }
    return poison::coordinate_trigger(element_count(sample_shape), cfg.attack_coordinate, cfg.attack_value);
}

nn::NetworkSpec make_model(const ExperimentConfig& cfg, const Shape& sample_shape, int classes) {
    const nn::Activation act{cfg.model_activation,
                             cfg.model_activation == nn::ActivationKind::LeakyReLU ? 0.01
                             : cfg.model_activation == nn::ActivationKind::ELU     ? 1.0
                                                                                   : 0.0};
    const auto k = static_cast<std::size_t>(classes);
    if (cfg.model == ModelKind::SmallConv) {
        if (sample_shape != Shape{1, 28, 28}) throw ConfigError("small_conv expects 1x28x28 inputs");
        return nn::small_conv_spec(k, act);
    }
    nn::NetworkSpec spec = nn::mlp_spec(element_count(sample_shape), cfg.model_width, cfg.model_depth, k, act);
    if (sample_shape.size() > 1) {
        spec.input_shape = sample_shape;
        spec.layers.insert(spec.layers.begin(), nn::flatten());
    }
    return spec;
}

ordered_json optional_number(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

ordered_json round_to_json(const RoundRecord& r) {
    ordered_json neurons = ordered_json::array();
    for (const auto& c : r.compromised) {
        neurons.push_back({{"layer", c.id.layer}, {"neuron", c.id.neuron}, {"score", c.score}});
    }
    return {{"round", r.round},
            {"epoch", r.epoch},
            {"compromised", neurons},
            {"flagged", r.flagged},
            {"precision", optional_number(r.precision)},
            {"recall", optional_number(r.recall)},
            {"benign_accuracy", optional_number(r.benign_accuracy)},
            {"attack_success_rate", optional_number(r.attack_success_rate)},
            {"diagnostics", r.diagnostics}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write", path.string());
    out << text;
    if (!out) throw IoError("short write", path.string());
}

}  // namespace

ExperimentData prepare_data(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentData data;
    poison::LabeledDataset train;
    if (cfg.dataset == DatasetKind::Blobs) {
        train = poison::make_blobs(cfg.blobs_per_class, cfg.blobs_classes, cfg.blobs_std,
                                   mix_seed(cfg.seed, kDataStream, 1));
        data.test = poison::make_blobs(cfg.blobs_test_per_class, cfg.blobs_classes, cfg.blobs_std,
                                       mix_seed(cfg.seed, kDataStream, 2));
    } else {
        const auto dir = mnist_dir(cfg);
        const auto tr = poison::mnist_files(dir, true), te = poison::mnist_files(dir, false);
        for (const auto& p : {tr.images, tr.labels, te.images, te.labels}) {
            if (!std::filesystem::exists(p)) throw IoError("missing MNIST file", p.string());
        }
        train = poison::load_idx(tr.images, tr.labels, cfg.mnist_train_limit);
        data.test = poison::load_idx(te.images, te.labels, cfg.mnist_test_limit);
    }
    if (cfg.validation_fraction > 0.0) {
        const auto held = static_cast<std::size_t>(cfg.validation_fraction * static_cast<double>(train.size()));
        if (held == 0 || held >= train.size()) throw ConfigError("validation_fraction leaves an empty split");
        std::vector<std::size_t> keep(train.size() - held), val(held);
        std::iota(keep.begin(), keep.end(), std::size_t{0});
        std::iota(val.begin(), val.end(), keep.size());
        data.validation = train.subset(val);
        train = train.subset(keep);
    }
    data.trigger = make_trigger(cfg, train.sample_shape());
    const poison::Targeting targeting =
        cfg.label_specific ? poison::Targeting{poison::LabelSpecific{}} : poison::Targeting{poison::SingleTarget{cfg.attack_target}};
    if (!cfg.label_specific && cfg.attack_target >= train.class_count) {
        throw ConfigError("attack.target " + std::to_string(cfg.attack_target) + " is not a class of the dataset");
    }
    data.policy = {cfg.attack_rate, targeting, mix_seed(cfg.seed, kPoisonStream)};
    data.train = cfg.attack_enabled ? poison::poison_dataset(train, data.trigger, data.policy) : std::move(train);
    data.model = make_model(cfg, data.train.sample_shape(), data.train.class_count);
    return data;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentData data = prepare_data(cfg);
    if (out_dir) std::filesystem::create_directories(*out_dir);

    defense::TrainSettings settings{cfg.batch_size, cfg.learning_rate, cfg.momentum, cfg.threads};
    const defense::EvalContext eval{&data.test, cfg.attack_enabled ? &data.trigger : nullptr, data.policy};
    const poison::LabeledDataset* validation = data.validation ? &*data.validation : nullptr;

    defense::TrainResult trained =
        cfg.defense_enabled
            ? defense::train_none(data.train, data.model, cfg.defense, settings, cfg.seed, &eval, validation)
            : defense::train_plain(data.train, data.model, settings, cfg.defense.max_epochs, cfg.seed, &eval);

    ExperimentOutcome outcome{{}, std::move(trained.net), trained.report.removed, {}, {}};
    ExperimentReport& rep = outcome.report;
    rep.config = config_entries(cfg);
    rep.seed = cfg.seed;
    rep.epochs = trained.report.epochs;
    rep.defense_enabled = cfg.defense_enabled;
    rep.removed = outcome.removed.size();

    if (cfg.defense_enabled) {
        std::vector<std::size_t> cumulative;
        for (const auto& r : trained.report.rounds) {
            RoundRecord rec{r.round, r.epoch, r.compromised, r.removed.size(), {}, {},
                            r.benign_accuracy, r.attack_success_rate, r.diagnostics};
            cumulative.insert(cumulative.end(), r.removed.begin(), r.removed.end());
            if (cfg.attack_enabled) {
                const auto pr = precision_recall(cumulative, data.train.poison_flags);
                rec.precision = pr.precision;
                rec.recall = pr.recall;
            }
            rep.rounds.push_back(std::move(rec));
        }
        if (trained.report.stopped_early) rep.notes.push_back("stopped early by the termination rule");
        if (cfg.attack_enabled) {
            const auto pr = precision_recall(outcome.removed, data.train.poison_flags);
            rep.precision = pr.precision;
            rep.recall = pr.recall;
            rep.notes.insert(rep.notes.end(), pr.warnings.begin(), pr.warnings.end());
        }
    }

    rep.benign_accuracy = benign_accuracy(outcome.net, data.test);
    if (cfg.attack_enabled) {
        rep.attack_success_rate = attack_success_rate(outcome.net, data.test, data.trigger, data.policy);
    }

    if (cfg.analyze_coverage) {
        if (!cfg.attack_enabled || cfg.label_specific || !data.trigger.is_fixed()) {
            rep.notes.push_back("coverage needs a fixed single-target trigger; skipped");
        } else {
            std::vector<std::string> warnings;
            const auto plane = lab::hyperplane_from_trigger(data.trigger, &warnings);
            rep.notes.insert(rep.notes.end(), warnings.begin(), warnings.end());
            rep.coverage = lab::trojan_region_coverage(outcome.net, plane, data.test, cfg.attack_target);
        }
    }
    if (cfg.analyze_raster) {
        if (outcome.net.spec.input_shape != Shape{2}) {
            rep.notes.push_back("raster needs 2-D inputs; skipped");
        } else {
            outcome.raster = lab::rasterize_decision_region(outcome.net, {}, cfg.raster_resolution, cfg.raster_resolution);
        }
    }
    if (cfg.analyze_histogram) {
        if (!cfg.attack_enabled) {
            rep.notes.push_back("histogram needs a trigger; skipped");
        } else {
            defense::DefenseConfig dcfg = cfg.defense;
            if (!dcfg.detection_enabled()) dcfg.reset_fraction = defense::DefenseConfig{}.reset_fraction;
            const auto profile = defense::collect_profile(outcome.net, data.train, cfg.threads);
            std::vector<defense::NeuronId> ids;
            for (const auto& c : defense::identify_compromised(profile, dcfg)) ids.push_back(c.id);
            if (ids.empty()) {
                rep.notes.push_back("no compromised neurons in the final model; histogram skipped");
            } else {
                outcome.histogram = lab::activation_histogram(outcome.net, data.test, data.trigger, ids,
                                                              cfg.histogram_bins, data.policy.seed, cfg.threads);
            }
        }
    }

    rep.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (out_dir) {
        const auto& dir = *out_dir;
        write_text(dir / "report.json", report_json(rep));
        write_epochs_csv(dir / "epochs.csv", rep);
        if (cfg.defense_enabled) {
            std::string lines;
            for (const auto& r : rep.rounds) lines += round_json_line(r) + "\n";
            write_text(dir / "rounds.jsonl", lines);
            poison::write_index_list(dir / "removed.txt", outcome.removed);
        }
        nn::save_checkpoint(dir / "model.ngck", outcome.net);
        if (outcome.raster) {
            lab::write_grid_pgm(dir / "raster.pgm", *outcome.raster);
            lab::write_grid_csv(dir / "raster.csv", *outcome.raster);
        }
        if (outcome.histogram) lab::write_histogram_csv(dir / "histogram.csv", *outcome.histogram);
    }
    return outcome;
}

ExperimentOutcome run_experiment(const std::filesystem::path& config_path,
                                 const std::optional<std::filesystem::path>& out_dir) {
    return run_experiment(load_experiment_config(config_path), out_dir);
}

std::string report_json(const ExperimentReport& r, bool include_wall_clock) {
    ordered_json config = ordered_json::object();
    for (const auto& [k, v] : r.config) config[k] = v;
    ordered_json epochs = ordered_json::array();
    for (const auto& e : r.epochs) {
        epochs.push_back({{"epoch", e.epoch},
                          {"loss", e.mean_loss},
                          {"working_size", e.working_size},
                          {"benign_accuracy", optional_number(e.benign_accuracy)},
                          {"attack_success_rate", optional_number(e.attack_success_rate)}});
    }
    ordered_json j;
    j["schema"] = kReportSchema;
    j["seed"] = r.seed;
    j["config"] = config;
    j["epochs"] = epochs;
    if (r.defense_enabled) {
        ordered_json rounds = ordered_json::array();
        for (const auto& rd : r.rounds) rounds.push_back(round_to_json(rd));
        j["defense"] = {{"rounds", rounds},
                        {"removed", r.removed},
                        {"precision", optional_number(r.precision)},
                        {"recall", optional_number(r.recall)}};
    }
    j["final"] = {{"benign_accuracy", r.benign_accuracy},
                  {"attack_success_rate", optional_number(r.attack_success_rate)},
                  {"coverage", optional_number(r.coverage)}};
    j["notes"] = r.notes;
    if (include_wall_clock) j["wall_clock_seconds"] = r.wall_clock_seconds;
    return j.dump(2) + "\n";
}

std::string round_json_line(const RoundRecord& round) { return round_to_json(round).dump(); }

void write_epochs_csv(const std::filesystem::path& path, const ExperimentReport& report) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write", path.string());
    out << "epoch,loss,working_size,benign_accuracy,attack_success_rate\n";
    out.precision(17);
    for (const auto& e : report.epochs) {
        out << e.epoch << ',' << e.mean_loss << ',' << e.working_size << ',';
        if (e.benign_accuracy) out << *e.benign_accuracy;
        out << ',';
        if (e.attack_success_rate) out << *e.attack_success_rate;
        out << '\n';
    }
}

}  // namespace noneguard::harness
