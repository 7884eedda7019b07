// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "nnet/model.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace floeberg::nnet {

inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Little-endian layout:
///   "FLOE" | u32 version | u32 architecture | u32 layer count |
///   per layer: u32 kind, u32 inputs, u32 units, u32 activation |
///   f64[6] feature means | f64[6] feature scales |
///   f64 gamma | f64[3] alpha | f64 dropout |
///   u32 tensor count | per tensor: u32 rank, u32[rank] dims, f64[] data
std::vector<std::uint8_t> serialize_model(const Model &model);

/// Rejects bad magic, unknown versions, truncated or oversized payloads, and
/// descriptors that do not match a known architecture. With `expected` set,
/// a file of the other architecture fails with ArchitectureMismatch.
Model deserialize_model(std::span<const std::uint8_t> bytes,
                        std::optional<Architecture> expected = std::nullopt);

void save_model(const Model &model, const std::filesystem::path &path);
Model load_model(const std::filesystem::path &path,
                 std::optional<Architecture> expected = std::nullopt);

} // namespace floeberg::nnet
