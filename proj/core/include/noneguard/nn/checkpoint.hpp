#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "noneguard/nn/network.hpp"

namespace noneguard::nn {

/// Compact JSON description of a network spec (used in checkpoints and reports).
std::string spec_to_json(const NetworkSpec& spec);
NetworkSpec spec_from_json(const std::string& text);

/// Checkpoint container layout:
///   bytes 0-3   magic "NGCK"
///   bytes 4-7   format version, little-endian u32
///   bytes 8-15  header length H, little-endian u64
///   next H      JSON header: spec, seed, optimizer settings, blob table
///   remainder   little-endian IEEE-754 binary64 blobs in header order
/// Parameters and momentum buffers are both stored, so a restored network resumes
/// training bit-identically.
std::vector<std::uint8_t> encode_checkpoint(const NetworkState& net);
NetworkState decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const NetworkState& net);
NetworkState load_checkpoint(const std::filesystem::path& path);

inline constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace noneguard::nn
