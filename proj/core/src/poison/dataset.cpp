#include "noneguard/poison/dataset.hpp"

#include <algorithm>
#include <cstring>

#include "noneguard/error.hpp"

namespace noneguard::poison {

void LabeledDataset::validate() const {
    if (labels.size() != inputs.size() || poison_flags.size() != inputs.size()) {
        throw InputError("dataset lists have unequal lengths");
    }
    if (class_count < 1) throw InputError("dataset class count must be positive");
    for (int y : labels) {
        if (y < 0 || y >= class_count) throw InputError("dataset label " + std::to_string(y) + " out of range");
    }
    for (const auto& x : inputs) {
        if (x.shape() != inputs.front().shape()) throw InputError("dataset samples have differing shapes");
    }
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
    LabeledDataset out;
    out.class_count = class_count;
    out.inputs.reserve(indices.size());
    out.labels.reserve(indices.size());
    out.poison_flags.reserve(indices.size());
    for (auto i : indices) {
        if (i >= size()) throw InputError("subset index " + std::to_string(i) + " out of range");
        out.inputs.push_back(inputs[i]);
        out.labels.push_back(labels[i]);
        out.poison_flags.push_back(poison_flags[i]);
    }
    return out;
}

LabeledDataset LabeledDataset::head(std::size_t n) const {
    n = std::min(n, size());
    LabeledDataset out;
    out.class_count = class_count;
    out.inputs.assign(inputs.begin(), inputs.begin() + static_cast<std::ptrdiff_t>(n));
    out.labels.assign(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n));
    out.poison_flags.assign(poison_flags.begin(), poison_flags.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
}

Tensor LabeledDataset::batch(std::span<const std::size_t> indices) const {
    if (indices.empty()) throw InputError("empty batch");
    const Shape& s = sample_shape();
    const std::size_t per = element_count(s);
    Shape shape{indices.size()};
    shape.insert(shape.end(), s.begin(), s.end());
    std::vector<double> data(indices.size() * per);
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const auto& x = inputs.at(indices[k]);
        std::memcpy(data.data() + k * per, x.data(), per * sizeof(double));
    }
    return Tensor(std::move(shape), std::move(data));
}

Tensor LabeledDataset::batch(std::size_t begin, std::size_t end) const {
    std::vector<std::size_t> idx(end - begin);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = begin + i;
    return batch(idx);
}

std::vector<std::size_t> LabeledDataset::poisoned_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < poison_flags.size(); ++i) {
        if (poison_flags[i]) out.push_back(i);
    }
    return out;
}

}  // namespace noneguard::poison
