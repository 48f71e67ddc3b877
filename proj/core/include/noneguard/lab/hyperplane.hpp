#pragma once

#include <string>
#include <vector>

#include "noneguard/nn/network.hpp"
#include "noneguard/poison/dataset.hpp"
#include "noneguard/poison/trigger.hpp"

namespace noneguard::lab {

/// The set {x : A x - b = 0} with A = diag(mask). Vectors are flattened in input order.
struct Hyperplane {
    Shape shape;
    std::vector<double> mask_diag;  // A_ii = m_i
    std::vector<double> offset;     // b = A t

    std::size_t dimension() const noexcept { return mask_diag.size(); }
    /// True when no coordinate is constrained, so every input lies on the plane.
    bool vacuous() const;
};

/// Throws UnsupportedError for randomly placed triggers. An all-zero mask yields the
/// vacuous plane and appends a warning to `warnings` when given.
Hyperplane hyperplane_from_trigger(const poison::TriggerSpec& trig, std::vector<std::string>* warnings = nullptr);

/// A .* x - b, elementwise.
std::vector<double> residual(const Hyperplane& h, const Tensor& x);

/// Overwrites the constrained coordinates of x with b.
Tensor project(const Hyperplane& h, const Tensor& x);

/// Fraction of projected base samples classified as `target`, skipping samples already
/// labelled `target`.
double trojan_region_coverage(const nn::NetworkState& net, const Hyperplane& h, const poison::LabeledDataset& base,
                              int target);

}  // namespace noneguard::lab
