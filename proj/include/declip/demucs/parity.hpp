// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "declip/demucs/model.hpp"

namespace declip::demucs {

struct ParityVector {
  std::uint64_t seed = 0;
  std::vector<float> input;
  std::vector<float> output;
};

struct ParitySet {
  std::uint32_t weights_crc = 0;  // trailing checksum of the weight file that produced the outputs
  std::vector<ParityVector> vectors;
};

// Parity file:
//   "DDDP" | version u32 | weights_crc u32 | count u32 | per vector: seed u64,
//   length u32, input f32 x length, output f32 x length | crc32 u32 of all preceding bytes.
inline constexpr std::uint32_t kParityFormatVersion = 1;
inline constexpr char kParityMagic[4] = {'D', 'D', 'D', 'P'};

[[nodiscard]] std::vector<std::uint8_t> encode_parity(const ParitySet& p);
[[nodiscard]] ParitySet decode_parity(std::span<const std::uint8_t> bytes);
void write_parity(const ParitySet& p, const std::filesystem::path& path);
[[nodiscard]] ParitySet read_parity(const std::filesystem::path& path);

/// Checksum identifying a weight store: the trailing CRC of its encoding.
[[nodiscard]] std::uint32_t weights_checksum(const WeightStore& w);

/// n seeded uniform(-0.5, 0.5) inputs of `length` samples and the model's outputs.
[[nodiscard]] ParitySet make_parity(const DemucsModel& model, const WeightStore& w, int n,
                                    long length, std::uint64_t seed);

struct ParityReplay {
  double max_abs_error = 0.0;
  std::size_t vectors = 0;
};

/// Runs every stored input through the model; throws ValidationError when the
/// weight checksum does not match or `expected_crc` differs.
[[nodiscard]] ParityReplay replay_parity(const DemucsModel& model, const ParitySet& p,
                                         std::uint32_t expected_crc);

}  // namespace declip::demucs
