#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

#include "noneguard/poison/dataset.hpp"
#include "noneguard/poison/trigger.hpp"

namespace noneguard::poison {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Reads an IDX image/label pair (big-endian headers, unsigned bytes). Pixels are
/// scaled to [0, 1]; each sample has shape (1, rows, cols). At most `limit` samples
/// are read. Malformed content raises FormatError with the failing byte offset.
LabeledDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                        std::size_t limit = std::numeric_limits<std::size_t>::max());

/// Writes inputs (values quantized to round(255 * x)) and labels as IDX files.
void write_idx(const std::filesystem::path& images, const std::filesystem::path& labels, const LabeledDataset& d);

/// Resolves MNIST files under `root` (train or t10k prefix).
struct IdxPair {
    std::filesystem::path images;
    std::filesystem::path labels;
};
IdxPair mnist_files(const std::filesystem::path& root, bool train);

/// Data root: $NONEGUARD_DATA when set, otherwise `fallback`.
std::filesystem::path data_root(const std::filesystem::path& fallback);

/// CSV with header "x1,x2,label,flag"; 2-D inputs only.
void write_points_csv(const std::filesystem::path& path, const LabeledDataset& d);
LabeledDataset read_points_csv(const std::filesystem::path& path, int class_count);

/// Binary greyscale PGM (P5), one byte per pixel, row-major.
void write_pgm(const std::filesystem::path& path, std::size_t width, std::size_t height,
               std::span<const std::uint8_t> pixels);

/// Renders mask * pattern of an image trigger (first channel) as a PGM.
void write_trigger_pgm(const std::filesystem::path& path, const TriggerSpec& trig);

/// One sample index per line.
void write_index_list(const std::filesystem::path& path, std::span<const std::size_t> indices);
std::vector<std::size_t> read_index_list(const std::filesystem::path& path);

}  // namespace noneguard::poison
