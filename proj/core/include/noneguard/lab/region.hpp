#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "noneguard/nn/network.hpp"

namespace noneguard::lab {

struct Bounds {
    double x1_min = -1.0, x1_max = 1.0;
    double x2_min = -1.0, x2_max = 1.0;
};

/// Argmax labels at cell centres, row-major; row 0 is the top row (largest x2).
struct LabelGrid {
    Bounds bounds;
    std::size_t width = 0, height = 0;
    int class_count = 0;
    std::vector<int> labels;

    int at(std::size_t row, std::size_t col) const { return labels[row * width + col]; }
    double x1(std::size_t col) const;
    double x2(std::size_t row) const;
    /// Share of cells whose centre has x2 in [lo, hi] that carry `label`.
    double band_fraction(double lo, double hi, int label) const;
};

/// Throws UnsupportedError unless the network takes 2-D points.
LabelGrid rasterize_decision_region(const nn::NetworkState& net, const Bounds& bounds, std::size_t width,
                                    std::size_t height);

/// One grey level per class, evenly spaced over 0..255.
void write_grid_pgm(const std::filesystem::path& path, const LabelGrid& grid);
/// Columns x1,x2,label, one row per cell in grid order.
void write_grid_csv(const std::filesystem::path& path, const LabelGrid& grid);

}  // namespace noneguard::lab
