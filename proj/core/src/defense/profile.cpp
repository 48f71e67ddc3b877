#include "noneguard/defense/profile.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "noneguard/error.hpp"

namespace noneguard::defense {

std::span<const double> ActivationProfile::values(NeuronId id) const {
    const LayerProfile* lp = find_layer(id.layer);
    if (!lp || id.neuron >= lp->neurons) {
        throw InputError("no profile for neuron (" + std::to_string(id.layer) + "," + std::to_string(id.neuron) + ")");
    }
    return {lp->values.data() + id.neuron * samples, samples};
}

const LayerProfile* ActivationProfile::find_layer(std::size_t layer) const {
    for (const auto& lp : layers) {
        if (lp.layer == layer) return &lp;
    }
    return nullptr;
}

std::size_t ActivationProfile::neuron_total() const {
    std::size_t n = 0;
    for (const auto& lp : layers) n += lp.neurons;
    return n;
}

ActivationProfile collect_profile(const nn::NetworkState& net, const poison::LabeledDataset& d, std::size_t threads,
                                  std::size_t batch_size) {
    d.validate();
    if (d.empty()) throw InputError("cannot profile an empty dataset");
    if (d.sample_shape() != net.spec.input_shape) {
        throw InputError("dataset sample shape " + shape_to_string(d.sample_shape()) + " does not match network input " +
                         shape_to_string(net.spec.input_shape));
    }
    batch_size = std::max<std::size_t>(batch_size, 1);
    const std::size_t n = d.size();
    const std::size_t classes = net.class_count();

    ActivationProfile prof;
    prof.samples = n;
    for (auto li : net.parameterized_layers()) {
        prof.layers.push_back({li, net.neuron_count(li), net.spec.layers[li].activation, {}});
        prof.layers.back().values.assign(prof.layers.back().neurons * n, 0.0);
    }
    prof.label_confidence.assign(n, 0.0);
    prof.max_confidence.assign(n, 0.0);

    const std::size_t batches = (n + batch_size - 1) / batch_size;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    // Each batch writes a disjoint sample range, so workers never touch the same slot.
    auto worker = [&] {
        try {
            for (std::size_t b = next++; b < batches; b = next++) {
                const std::size_t begin = b * batch_size, end = std::min(n, begin + batch_size);
                const auto out = nn::forward(net, d.batch(begin, end), true);
                for (std::size_t k = 0; k < prof.layers.size(); ++k) {
                    const auto& acts = out.record->layers[k];
                    auto& lp = prof.layers[k];
                    for (std::size_t s = 0; s < acts.samples; ++s) {
                        for (std::size_t j = 0; j < lp.neurons; ++j) lp.values[j * n + begin + s] = acts.value(s, j);
                    }
                }
                for (std::size_t s = begin; s < end; ++s) {
                    const double* z = out.logits.data() + (s - begin) * classes;
                    const double zmax = *std::max_element(z, z + classes);
                    double sum = 0.0;
                    for (std::size_t c = 0; c < classes; ++c) sum += std::exp(z[c] - zmax);
                    prof.max_confidence[s] = 1.0 / sum;
                    prof.label_confidence[s] = std::exp(z[static_cast<std::size_t>(d.labels[s])] - zmax) / sum;
                }
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = batches;
        }
    };

    threads = std::clamp<std::size_t>(threads, 1, batches);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return prof;
}

}  // namespace noneguard::defense
