#include "noneguard/lab/histogram.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "noneguard/error.hpp"
#include "noneguard/rng.hpp"

namespace noneguard::lab {

namespace {

std::vector<double> gather(const defense::ActivationProfile& p, const std::vector<defense::NeuronId>& neurons) {
    std::vector<double> out;
    out.reserve(neurons.size() * p.samples);
    for (const auto& id : neurons) {
        const auto v = p.values(id);
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

std::vector<double> bin(const std::vector<double>& values, const std::vector<double>& edges) {
    const std::size_t bins = edges.size() - 1;
    std::vector<double> mass(bins, 0.0);
    for (double v : values) {
        auto it = std::upper_bound(edges.begin(), edges.end(), v);
        std::size_t b = static_cast<std::size_t>(it - edges.begin());
        b = b == 0 ? 0 : std::min(b - 1, bins - 1);
        mass[b] += 1.0;
    }
    for (auto& m : mass) m /= static_cast<double>(values.size());
    return mass;
}

double nonnegative_share(const std::vector<double>& values) {
    const auto n = std::count_if(values.begin(), values.end(), [](double v) { return v >= 0.0; });
    return static_cast<double>(n) / static_cast<double>(values.size());
}

}  // namespace

PairedHistogram activation_histogram(const nn::NetworkState& net, const poison::LabeledDataset& d,
                                     const poison::TriggerSpec& trig, const std::vector<defense::NeuronId>& neurons,
                                     std::size_t bins, std::uint64_t seed, std::size_t threads) {
    if (neurons.empty()) throw InputError("activation histogram needs at least one neuron");
    if (bins == 0) throw InputError("activation histogram needs at least one bin");
    if (d.empty()) throw InputError("activation histogram of an empty dataset");
    for (const auto& id : neurons) {
        if (id.layer >= net.params.size() || id.neuron >= net.neuron_count(id.layer)) {
            throw InputError("neuron (" + std::to_string(id.layer) + "," + std::to_string(id.neuron) +
                             ") does not exist");
        }
    }
    poison::LabeledDataset stamped = d;
    for (std::size_t i = 0; i < stamped.size(); ++i) {
        stamped.inputs[i] = poison::stamp_trigger(d.inputs[i], trig, mix_seed(seed, i));
    }
    const auto trig_values = gather(defense::collect_profile(net, stamped, threads), neurons);
    const auto clean_values = gather(defense::collect_profile(net, d, threads), neurons);

    auto [lo_t, hi_t] = std::minmax_element(trig_values.begin(), trig_values.end());
    auto [lo_c, hi_c] = std::minmax_element(clean_values.begin(), clean_values.end());
    double lo = std::min(*lo_t, *lo_c), hi = std::max(*hi_t, *hi_c);
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    PairedHistogram h;
    h.edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) {
        h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
    }
    h.edges.back() = hi;
    h.triggered = bin(trig_values, h.edges);
    h.benign = bin(clean_values, h.edges);
    h.triggered_nonnegative = nonnegative_share(trig_values);
    h.benign_nonnegative = nonnegative_share(clean_values);
    h.values_per_side = clean_values.size();
    return h;
}

void write_histogram_csv(const std::filesystem::path& path, const PairedHistogram& h) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write histogram csv", path);
    out << "bin_left,bin_right,triggered_mass,benign_mass\n";
    char buf[128];
    for (std::size_t b = 0; b + 1 < h.edges.size(); ++b) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", h.edges[b], h.edges[b + 1], h.triggered[b],
                      h.benign[b]);
        out << buf;
    }
    if (!out) throw IoError("short write", path);
}

}  // namespace noneguard::lab
