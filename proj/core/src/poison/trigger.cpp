#include "noneguard/poison/trigger.hpp"

#include <algorithm>

#include "noneguard/error.hpp"
#include "noneguard/rng.hpp"

namespace noneguard::poison {

namespace {

struct Box {
    std::size_t row0, col0, rows, cols;
};

// Bounding box of the mask over the (H,W) plane, across all channels.
Box mask_box(const Tensor& mask) {
    const std::size_t ch = mask.extent(0), h = mask.extent(1), w = mask.extent(2);
    std::size_t r0 = h, r1 = 0, c0 = w, c1 = 0;
    bool any = false;
    for (std::size_t c = 0; c < ch; ++c) {
        for (std::size_t r = 0; r < h; ++r) {
            for (std::size_t q = 0; q < w; ++q) {
                if (mask[(c * h + r) * w + q] != 0.0) {
                    any = true;
                    r0 = std::min(r0, r);
                    r1 = std::max(r1, r);
                    c0 = std::min(c0, q);
                    c1 = std::max(c1, q);
                }
            }
        }
    }
    if (!any) return {0, 0, 0, 0};
    return {r0, c0, r1 - r0 + 1, c1 - c0 + 1};
}

}  // namespace

std::size_t TriggerSpec::popcount() const {
    return static_cast<std::size_t>(std::count(mask.values().begin(), mask.values().end(), 1.0));
}

void TriggerSpec::validate() const {
    if (mask.shape() != pattern.shape()) {
        throw InputError("trigger mask " + shape_to_string(mask.shape()) + " and pattern " +
                         shape_to_string(pattern.shape()) + " differ in shape");
    }
    for (double m : mask.values()) {
        if (m != 0.0 && m != 1.0) throw InputError("trigger mask must be binary");
    }
    if (const auto* rp = std::get_if<RandomPlacement>(&placement)) {
        if (mask.rank() != 3) throw InputError("random trigger placement needs (C,H,W) inputs");
        const Box b = mask_box(mask);
        if (rp->row_min > rp->row_max || rp->col_min > rp->col_max || rp->row_max + b.rows > mask.extent(1) ||
            rp->col_max + b.cols > mask.extent(2)) {
            throw InputError("random placement region lets the trigger leave the image");
        }
    }
}

MaterializedTrigger materialize(const TriggerSpec& trig, std::uint64_t seed) {
    const auto* rp = std::get_if<RandomPlacement>(&trig.placement);
    if (!rp) return {trig.mask, trig.pattern};
    trig.validate();
    const Box b = mask_box(trig.mask);
    Rng rng(seed);
    const std::size_t row = rp->row_min + rng.below(rp->row_max - rp->row_min + 1);
    const std::size_t col = rp->col_min + rng.below(rp->col_max - rp->col_min + 1);
    const std::size_t ch = trig.mask.extent(0), h = trig.mask.extent(1), w = trig.mask.extent(2);
    MaterializedTrigger out{Tensor(trig.mask.shape()), Tensor(trig.pattern.shape())};
    for (std::size_t c = 0; c < ch; ++c) {
        for (std::size_t r = 0; r < b.rows; ++r) {
            for (std::size_t q = 0; q < b.cols; ++q) {
                const std::size_t src = (c * h + b.row0 + r) * w + b.col0 + q;
                const std::size_t dst = (c * h + row + r) * w + col + q;
                out.mask[dst] = trig.mask[src];
                out.pattern[dst] = trig.pattern[src];
            }
        }
    }
    return out;
}

Tensor stamp_trigger(const Tensor& x, const TriggerSpec& trig, std::uint64_t seed) {
    if (x.shape() != trig.mask.shape() || x.shape() != trig.pattern.shape()) {
        throw InputError("input " + shape_to_string(x.shape()) + " does not match trigger " +
                         shape_to_string(trig.mask.shape()));
    }
    const MaterializedTrigger m = materialize(trig, seed);
    Tensor out = x;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (m.mask[i] != 0.0) out[i] = m.pattern[i];
    }
    return out;
}

TriggerSpec pixel_trigger(const Shape& sample_shape, double value) {
    return patch_trigger(sample_shape, 1, value, false);
}

TriggerSpec patch_trigger(const Shape& sample_shape, std::size_t size, double value, bool random_placement) {
    if (sample_shape.size() != 3) throw InputError("patch triggers need (C,H,W) sample shapes");
    const std::size_t ch = sample_shape[0], h = sample_shape[1], w = sample_shape[2];
    if (size == 0 || size > h || size > w) throw InputError("patch size does not fit the image");
    TriggerSpec t{Tensor(sample_shape), Tensor(sample_shape), FixedPlacement{}};
    for (std::size_t c = 0; c < ch; ++c) {
        for (std::size_t r = h - size; r < h; ++r) {
            for (std::size_t q = w - size; q < w; ++q) {
                t.mask[(c * h + r) * w + q] = 1.0;
                t.pattern[(c * h + r) * w + q] = value;
            }
        }
    }
    if (random_placement) t.placement = RandomPlacement{0, h - size, 0, w - size};
    return t;
}

TriggerSpec coordinate_trigger(std::size_t dims, std::size_t coordinate, double value) {
    if (coordinate >= dims) throw InputError("trigger coordinate out of range");
    TriggerSpec t{Tensor({dims}), Tensor({dims}), FixedPlacement{}};
    t.mask[coordinate] = 1.0;
    t.pattern[coordinate] = value;
    return t;
}

}  // namespace noneguard::poison
