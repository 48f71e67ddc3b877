#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>

#include "noneguard/tensor.hpp"

namespace noneguard::poison {

struct FixedPlacement {};

/// The trigger patch (the bounding box of the template mask) is moved per sample so
/// that its top-left corner lands uniformly in rows [row_min, row_max] and
/// columns [col_min, col_max]. Image-shaped (C,H,W) inputs only.
struct RandomPlacement {
    std::size_t row_min = 0, row_max = 0;
    std::size_t col_min = 0, col_max = 0;
};

using Placement = std::variant<FixedPlacement, RandomPlacement>;

/// A poisoning trigger: x' = (1 - mask) * x + mask * pattern, elementwise.
struct TriggerSpec {
    Tensor mask;     // binary, input-shaped
    Tensor pattern;  // input-shaped; only masked entries matter
    Placement placement = FixedPlacement{};

    bool is_fixed() const noexcept { return std::holds_alternative<FixedPlacement>(placement); }
    std::size_t popcount() const;
    /// Throws InputError for a non-binary mask, mismatched shapes or an out-of-bounds region.
    void validate() const;
};

/// Mask and pattern actually applied to one sample.
struct MaterializedTrigger {
    Tensor mask;
    Tensor pattern;
};

MaterializedTrigger materialize(const TriggerSpec& trig, std::uint64_t seed);

Tensor stamp_trigger(const Tensor& x, const TriggerSpec& trig, std::uint64_t seed = 0);

/// One pixel of `value` in the bottom-right corner of every channel.
TriggerSpec pixel_trigger(const Shape& sample_shape, double value = 1.0);

/// A size x size square of `value`; bottom-right when fixed, anywhere in the image when random.
TriggerSpec patch_trigger(const Shape& sample_shape, std::size_t size = 3, double value = 1.0,
                          bool random_placement = false);

/// Overwrites a single coordinate of a flat input, e.g. x2 := 0.6 on 2-D points.
TriggerSpec coordinate_trigger(std::size_t dims, std::size_t coordinate, double value);

}  // namespace noneguard::poison
