#include "noneguard/lab/region.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "noneguard/error.hpp"
#include "noneguard/poison/io.hpp"

namespace noneguard::lab {

namespace {

// (2i + 1) / 2n is computed in one rounding so grids of resolution n and 3n agree
// bit-for-bit on the centres they share.
double centre(double lo, double hi, std::size_t i, std::size_t n) {
    const double t = static_cast<double>(2 * i + 1) / static_cast<double>(2 * n);
    return lo + t * (hi - lo);
}

}  // namespace

double LabelGrid::x1(std::size_t col) const { return centre(bounds.x1_min, bounds.x1_max, col, width); }

double LabelGrid::x2(std::size_t row) const { return centre(bounds.x2_max, bounds.x2_min, row, height); }

double LabelGrid::band_fraction(double lo, double hi, int label) const {
    std::size_t cells = 0, hits = 0;
    for (std::size_t r = 0; r < height; ++r) {
        const double y = x2(r);
        if (y < lo || y > hi) continue;
        for (std::size_t c = 0; c < width; ++c) {
            ++cells;
            hits += at(r, c) == label;
        }
    }
    if (cells == 0) throw InputError("no grid row falls inside the band");
    return static_cast<double>(hits) / static_cast<double>(cells);
}

LabelGrid rasterize_decision_region(const nn::NetworkState& net, const Bounds& bounds, std::size_t width,
                                    std::size_t height) {
    if (net.spec.input_shape != Shape{2}) {
        throw UnsupportedError("decision regions need a network over 2-D points, got input " +
                               shape_to_string(net.spec.input_shape));
    }
    if (width == 0 || height == 0) throw InputError("raster resolution must be positive");
    if (!(bounds.x1_min < bounds.x1_max) || !(bounds.x2_min < bounds.x2_max)) throw InputError("empty raster bounds");
    LabelGrid g{bounds, width, height, static_cast<int>(net.class_count()), {}};
    g.labels.reserve(width * height);
    Tensor batch({width, 2});
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            batch[2 * c] = g.x1(c);
            batch[2 * c + 1] = g.x2(r);
        }
        const auto row = nn::predict(net, batch);
        g.labels.insert(g.labels.end(), row.begin(), row.end());
    }
    return g;
}

void write_grid_pgm(const std::filesystem::path& path, const LabelGrid& grid) {
    const int top = std::max(1, grid.class_count - 1);
    std::vector<std::uint8_t> px(grid.labels.size());
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<std::uint8_t>(grid.labels[i] * 255 / top);
    poison::write_pgm(path, grid.width, grid.height, px);
}

void write_grid_csv(const std::filesystem::path& path, const LabelGrid& grid) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write raster csv", path);
    out << "x1,x2,label\n";
    char buf[96];
    for (std::size_t r = 0; r < grid.height; ++r) {
        for (std::size_t c = 0; c < grid.width; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", grid.x1(c), grid.x2(r), grid.at(r, c));
            out << buf;
        }
    }
    if (!out) throw IoError("short write", path);
}

}  // namespace noneguard::lab
