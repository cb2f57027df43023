// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "declip/demucs/config.hpp"

namespace declip::demucs {

struct Tensor {
  std::vector<std::uint32_t> shape;
  std::vector<float> values;  // row-major

  [[nodiscard]] std::size_t numel() const noexcept;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

/// Ordered named-tensor store. Duplicate names are representable so that
/// validation can report them.
class WeightStore {
 public:
  void add(std::string name, Tensor t);
  [[nodiscard]] const Tensor* find(std::string_view name) const;
  Tensor* find(std::string_view name);
  bool remove(std::string_view name);

  [[nodiscard]] const std::vector<NamedTensor>& tensors() const noexcept { return tensors_; }
  [[nodiscard]] std::size_t size() const noexcept { return tensors_.size(); }

 private:
  std::vector<NamedTensor> tensors_;
};

// Portable weight file:
//   "DDDW" | version u32 | count u32 | per tensor: name_len u16, name utf-8, rank u8,
//   dims u32 x rank, payload f32 x prod(dims) | crc32 u32 of all preceding bytes.
// All integers and floats little-endian.
inline constexpr std::uint32_t kWeightFormatVersion = 1;
inline constexpr char kWeightMagic[4] = {'D', 'D', 'D', 'W'};

[[nodiscard]] std::vector<std::uint8_t> encode_weights(const WeightStore& w);
[[nodiscard]] WeightStore decode_weights(std::span<const std::uint8_t> bytes);
void write_weights(const WeightStore& w, const std::filesystem::path& path);
[[nodiscard]] WeightStore read_weights(const std::filesystem::path& path);

[[nodiscard]] std::uint32_t crc32(std::span<const std::uint8_t> bytes);

using TensorSpec = std::pair<std::string, std::vector<std::uint32_t>>;
/// Every tensor the config requires, in canonical file order.
[[nodiscard]] std::vector<TensorSpec> expected_inventory(const DemucsConfig& cfg);

/// Uniform(+-1/sqrt(fan_in)) parameters from a seeded generator, plus meta.config.
[[nodiscard]] WeightStore random_weights(const DemucsConfig& cfg, std::uint64_t seed,
                                         float scale = 1.0f);
[[nodiscard]] WeightStore zero_weights(const DemucsConfig& cfg);

}  // namespace declip::demucs
