#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "noneguard/defense/detect.hpp"
#include "noneguard/nn/layer.hpp"

namespace noneguard::harness {

/// Flat key=value pairs. '#' starts a comment; blank lines are ignored; later keys win.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text, const std::string& origin = "<string>");
KeyValues read_key_values(const std::filesystem::path& path);

enum class DatasetKind { Blobs, Mnist };
enum class TriggerKind { Pixel, Patch, Coordinate };
enum class ModelKind { Mlp, SmallConv };

struct ExperimentConfig {
    std::uint64_t seed = 1;

    DatasetKind dataset = DatasetKind::Blobs;
    std::size_t blobs_per_class = 400;
    int blobs_classes = 5;
    double blobs_std = 0.05;
    std::size_t blobs_test_per_class = 200;
    std::string mnist_root = "data/mnist";  // $NONEGUARD_DATA/mnist takes precedence when set
    std::size_t mnist_train_limit = 10000;
    std::size_t mnist_test_limit = 10000;

    bool attack_enabled = true;
    TriggerKind trigger = TriggerKind::Coordinate;
    double attack_rate = 0.10;
    bool label_specific = false;
    int attack_target = 3;
    std::size_t attack_coordinate = 1;
    double attack_value = 0.6;
    std::size_t patch_size = 3;
    bool random_placement = false;

    ModelKind model = ModelKind::Mlp;
    std::size_t model_width = 100;
    std::size_t model_depth = 5;
    nn::ActivationKind model_activation = nn::ActivationKind::ReLU;

    std::size_t batch_size = 32;
    double learning_rate = 0.01;
    double momentum = 0.9;

    bool defense_enabled = false;
    defense::DefenseConfig defense;  // max_epochs also bounds undefended training
    double validation_fraction = 0.0;

    bool analyze_raster = false;
    std::size_t raster_resolution = 200;
    bool analyze_histogram = false;
    std::size_t histogram_bins = 50;
    bool analyze_coverage = false;

    std::size_t threads = 1;

    /// Throws ConfigError on inconsistent values (the defense block is validated too).
    void validate() const;
};

/// Applies `kv` on top of the defaults. Unknown keys raise a ConfigError that lists every
/// one of them; malformed values name the key.
ExperimentConfig parse_experiment_config(const KeyValues& kv);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Every recognised key with its current value, in a fixed order.
std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& cfg);

/// Every recognised key.
std::vector<std::string> config_keys();

}  // namespace noneguard::harness
