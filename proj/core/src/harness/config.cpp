#include "noneguard/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "noneguard/error.hpp"

namespace noneguard::harness {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) throw ConfigError("key '" + key + "': cannot parse '" + value + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + value + "'");
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Field {
    std::string key;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T, typename Ref>
Field number(std::string key, Ref ref) {
    return {key,
            [key, ref](ExperimentConfig& c, const std::string& v) { ref(c) = parse_number<T>(key, v); },
            [ref](const ExperimentConfig& c) {
                if constexpr (std::is_floating_point_v<T>) {
                    return format_double(ref(c));
                } else {
                    return std::to_string(ref(c));
                }
            }};
}

template <typename Ref>
Field flag(std::string key, Ref ref) {
    return {key, [key, ref](ExperimentConfig& c, const std::string& v) { ref(c) = parse_bool(key, v); },
            [ref](const ExperimentConfig& c) {
                return std::string(ref(c) ? "true" : "false");
            }};
}

template <typename E, typename Ref>
Field choice(std::string key, Ref ref, std::vector<std::pair<std::string, E>> names) {
    return {key,
            [key, ref, names](ExperimentConfig& c, const std::string& v) {
                for (const auto& [n, e] : names) {
                    if (n == v) {
                        ref(c) = e;
                        return;
                    }
                }
                std::string allowed;
                for (const auto& [n, e] : names) allowed += (allowed.empty() ? "" : ", ") + n;
                throw ConfigError("key '" + key + "': '" + v + "' is not one of " + allowed);
            },
            [ref, names](const ExperimentConfig& c) {
                const E cur = ref(c);
                for (const auto& [n, e] : names) {
                    if (e == cur) return n;
                }
                return std::string("?");
            }};
}

#define REF(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<std::pair<std::string, nn::ActivationKind>> acts;
        for (auto k : nn::all_activation_kinds()) acts.emplace_back(nn::to_string(k), k);
        return std::vector<Field>{
            number<std::uint64_t>("seed", REF(seed)),
            choice<DatasetKind>("dataset", REF(dataset), {{"blobs", DatasetKind::Blobs}, {"mnist", DatasetKind::Mnist}}),
            number<std::size_t>("blobs.per_class", REF(blobs_per_class)),
            number<int>("blobs.classes", REF(blobs_classes)),
            number<double>("blobs.std", REF(blobs_std)),
            number<std::size_t>("blobs.test_per_class", REF(blobs_test_per_class)),
            {"mnist.root", [](ExperimentConfig& c, const std::string& v) { c.mnist_root = v; },
             [](const ExperimentConfig& c) { return c.mnist_root; }},
            number<std::size_t>("mnist.train_limit", REF(mnist_train_limit)),
            number<std::size_t>("mnist.test_limit", REF(mnist_test_limit)),
            flag("attack.enabled", REF(attack_enabled)),
            choice<TriggerKind>("attack.trigger", REF(trigger),
                                {{"pixel", TriggerKind::Pixel},
                                 {"patch", TriggerKind::Patch},
                                 {"coordinate", TriggerKind::Coordinate}}),
            number<double>("attack.rate", REF(attack_rate)),
            choice<bool>("attack.targeting", REF(label_specific), {{"single", false}, {"label_specific", true}}),
            number<int>("attack.target", REF(attack_target)),
            number<std::size_t>("attack.coordinate", REF(attack_coordinate)),
            number<double>("attack.value", REF(attack_value)),
            number<std::size_t>("attack.patch_size", REF(patch_size)),
            flag("attack.random_placement", REF(random_placement)),
            choice<ModelKind>("model", REF(model), {{"mlp", ModelKind::Mlp}, {"small_conv", ModelKind::SmallConv}}),
            number<std::size_t>("model.width", REF(model_width)),
            number<std::size_t>("model.depth", REF(model_depth)),
            choice<nn::ActivationKind>("model.activation", REF(model_activation), acts),
            number<std::size_t>("max_epochs", REF(defense.max_epochs)),
            number<std::size_t>("batch_size", REF(batch_size)),
            number<double>("lr", REF(learning_rate)),
            number<double>("momentum", REF(momentum)),
            flag("defense.enabled", REF(defense_enabled)),
            choice<defense::Detector>("detector", REF(defense.detector),
                                      {{"otsu_linearity", defense::Detector::OtsuLinearity},
                                       {"confidence_gap", defense::Detector::ConfidenceGap}}),
            number<double>("theta", REF(defense.theta)),
            number<double>("reset_fraction", REF(defense.reset_fraction)),
            number<double>("selection_fraction", REF(defense.selection_fraction)),
            number<double>("lambda", REF(defense.lambda)),
            number<double>("lambda_low", REF(defense.lambda_low)),
            number<double>("lambda_high", REF(defense.lambda_high)),
            number<std::size_t>("cadence", REF(defense.cadence)),
            number<double>("validation_fraction", REF(validation_fraction)),
            flag("analyze.raster", REF(analyze_raster)),
            number<std::size_t>("analyze.raster_resolution", REF(raster_resolution)),
            flag("analyze.histogram", REF(analyze_histogram)),
            number<std::size_t>("analyze.histogram_bins", REF(histogram_bins)),
            flag("analyze.coverage", REF(analyze_coverage)),
            number<std::size_t>("threads", REF(threads)),
        };
    }();
    return table;
}

#undef REF

}  // namespace

KeyValues parse_key_values(const std::string& text, const std::string& origin) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
        }
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config", path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str(), path.string());
}

void ExperimentConfig::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError("invalid experiment config: " + what);
    };
    defense.validate();
    require(blobs_classes >= 2, "blobs.classes must be at least 2");
    require(blobs_std > 0.0, "blobs.std must be positive");
    require(blobs_per_class > 0 && blobs_test_per_class > 0, "blob counts must be positive");
    require(mnist_train_limit > 0 && mnist_test_limit > 0, "mnist limits must be positive");
    require(attack_rate >= 0.0 && attack_rate < 1.0, "attack.rate must lie in [0, 1)");
    require(attack_target >= 0, "attack.target must be non-negative");
    require(model_width > 0 && model_depth > 0, "model width and depth must be positive");
    require(batch_size > 0, "batch_size must be positive");
    require(learning_rate > 0.0, "lr must be positive");
    require(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0, 1)");
    require(validation_fraction >= 0.0 && validation_fraction < 1.0, "validation_fraction must lie in [0, 1)");
    require(raster_resolution > 0 && histogram_bins > 0, "analysis resolutions must be positive");
    require(threads > 0, "threads must be positive");
    require(!(dataset == DatasetKind::Blobs && model == ModelKind::SmallConv), "small_conv needs image inputs");
    require(!(dataset == DatasetKind::Blobs && trigger != TriggerKind::Coordinate),
            "blob datasets take coordinate triggers");
    require(!(dataset == DatasetKind::Mnist && trigger == TriggerKind::Coordinate),
            "coordinate triggers are for 2-D points");
}

ExperimentConfig parse_experiment_config(const KeyValues& kv) {
    ExperimentConfig cfg;
    std::vector<std::string> unknown;
    for (const auto& [key, value] : kv) {
        const auto& table = fields();
        auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
        if (it == table.end()) {
            unknown.push_back(key);
            continue;
        }
        it->set(cfg, value);
    }
    if (!unknown.empty()) {
        std::string list;
        for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
        throw ConfigError("unknown config key(s): " + list);
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    return parse_experiment_config(read_key_values(path));
}

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& f : fields()) out.emplace_back(f.key, f.get(cfg));
    return out;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.key);
    return out;
}

}  // namespace noneguard::harness
