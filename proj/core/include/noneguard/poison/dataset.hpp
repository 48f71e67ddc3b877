#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "noneguard/tensor.hpp"

namespace noneguard::poison {

/// Samples with labels and ground-truth poison flags. All three lists have equal length.
struct LabeledDataset {
    std::vector<Tensor> inputs;
    std::vector<int> labels;
    std::vector<std::uint8_t> poison_flags;
    int class_count = 0;

    std::size_t size() const noexcept { return inputs.size(); }
    bool empty() const noexcept { return inputs.empty(); }
    const Shape& sample_shape() const { return inputs.at(0).shape(); }

    /// Throws InputError when lengths or labels are inconsistent.
    void validate() const;

    /// New dataset holding the given samples, in the given order.
    LabeledDataset subset(std::span<const std::size_t> indices) const;

    /// First `n` samples (or all when n >= size()).
    LabeledDataset head(std::size_t n) const;

    /// Stacks the given samples into an (N, ...) batch tensor.
    Tensor batch(std::span<const std::size_t> indices) const;
    Tensor batch(std::size_t begin, std::size_t end) const;

    std::vector<std::size_t> poisoned_indices() const;
};

}  // namespace noneguard::poison
