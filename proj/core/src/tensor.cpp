#include "noneguard/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "noneguard/error.hpp"

namespace noneguard {

std::size_t element_count(const Shape& shape) noexcept {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_to_string(const Shape& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

namespace {

void check_extents(const Shape& shape) {
    if (shape.empty()) throw InputError("tensor shape must have at least one axis");
    for (auto e : shape) {
        if (e == 0) throw InputError("tensor extents must be positive, got " + shape_to_string(shape));
    }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
    check_extents(shape_);
    data_.assign(element_count(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_extents(shape_);
    if (element_count(shape_) != data_.size()) {
        throw InputError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                         shape_to_string(shape_));
    }
}

Tensor Tensor::from_values(std::initializer_list<double> values) {
    return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

Tensor Tensor::rows(std::size_t begin, std::size_t end) const {
    if (shape_.empty() || begin >= end || end > shape_[0]) {
        throw InputError("row slice out of range for shape " + shape_to_string(shape_));
    }
    const std::size_t stride = data_.size() / shape_[0];
    Shape s = shape_;
    s[0] = end - begin;
    return Tensor(std::move(s), std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(begin * stride),
                                                    data_.begin() + static_cast<std::ptrdiff_t>(end * stride)));
}

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor stack(std::span<const Tensor> items) {
    if (items.empty()) throw InputError("cannot stack an empty list of tensors");
    const Shape& inner = items.front().shape();
    Shape shape{items.size()};
    shape.insert(shape.end(), inner.begin(), inner.end());
    std::vector<double> data;
    data.reserve(element_count(shape));
    for (const auto& t : items) {
        if (t.shape() != inner) {
            throw InputError("cannot stack tensors of shape " + shape_to_string(t.shape()) + " and " +
                             shape_to_string(inner));
        }
        data.insert(data.end(), t.values().begin(), t.values().end());
    }
    return Tensor(std::move(shape), std::move(data));
}

}  // namespace noneguard
