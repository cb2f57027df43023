// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "declip/demucs/weights.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>
#include <random>

#include "binary_io.hpp"
#include "declip/errors.hpp"

namespace declip::demucs {

std::size_t Tensor::numel() const noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t a, std::uint32_t d) { return a * d; });
}

void WeightStore::add(std::string name, Tensor t) {
  tensors_.push_back(NamedTensor{std::move(name), std::move(t)});
}

const Tensor* WeightStore::find(std::string_view name) const {
  for (const auto& nt : tensors_) {
    if (nt.name == name) return &nt.tensor;
  }
  return nullptr;
}

Tensor* WeightStore::find(std::string_view name) {
  for (auto& nt : tensors_) {
    if (nt.name == name) return &nt.tensor;
  }
  return nullptr;
}

bool WeightStore::remove(std::string_view name) {
  const auto it = std::find_if(tensors_.begin(), tensors_.end(),
                               [&](const NamedTensor& nt) { return nt.name == name; });
  if (it == tensors_.end()) return false;
  tensors_.erase(it);
  return true;
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong c = ::crc32(0L, Z_NULL, 0);
  c = ::crc32(c, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(c);
}

using bin::ByteReader;
using bin::put;

std::vector<std::uint8_t> encode_weights(const WeightStore& w) {
  std::vector<std::uint8_t> out(std::begin(kWeightMagic), std::end(kWeightMagic));
  put<std::uint32_t>(out, kWeightFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(w.size()));
  for (const auto& [name, t] : w.tensors()) {
    if (name.size() > 0xFFFF) throw ValidationError("tensor name too long: " + name.substr(0, 32));
    if (t.shape.size() > 0xFF) throw ValidationError("tensor rank too large: " + name);
    if (t.values.size() != t.numel()) throw ValidationError("tensor payload size mismatch: " + name);
    put<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put<std::uint8_t>(out, static_cast<std::uint8_t>(t.shape.size()));
    for (auto d : t.shape) put<std::uint32_t>(out, d);
    bin::put_floats(out, t.values);
  }
  put<std::uint32_t>(out, crc32(out));
  return out;
}

WeightStore decode_weights(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16) throw FormatError("weight file too short");
  if (std::memcmp(bytes.data(), kWeightMagic, 4) != 0) throw FormatError("bad weight file magic");
  const auto body = bytes.first(bytes.size() - 4);
  std::uint32_t stored = 0;
  std::memcpy(&stored, bytes.data() + bytes.size() - 4, 4);
  if (const auto actual = crc32(body); actual != stored) {
    throw FormatError("weight file CRC32 mismatch");
  }
  ByteReader r(body, "weight file");
  r.take(4, "magic");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kWeightFormatVersion) {
    throw FormatError("unsupported weight format version " + std::to_string(version));
  }
  const auto count = r.get<std::uint32_t>("tensor count");
  WeightStore w;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.get<std::uint16_t>("name length");
    const auto name_bytes = r.take(name_len, "name");
    std::string name(name_bytes.begin(), name_bytes.end());
    const auto rank = r.get<std::uint8_t>("rank");
    Tensor t;
    for (int d = 0; d < rank; ++d) t.shape.push_back(r.get<std::uint32_t>("dims"));
    t.values = r.floats(t.numel(), "payload");
    w.add(std::move(name), std::move(t));
  }
  if (r.pos() != body.size()) throw FormatError("trailing bytes after last tensor");
  return w;
}

void write_weights(const WeightStore& w, const std::filesystem::path& path) {
  bin::write_file_atomic(path, encode_weights(w));
}

WeightStore read_weights(const std::filesystem::path& path) { return decode_weights(bin::read_file(path)); }

std::vector<TensorSpec> expected_inventory(const DemucsConfig& cfg) {
  cfg.validate();
  using U = std::uint32_t;
  std::vector<TensorSpec> inv;
  inv.emplace_back("meta.config", std::vector<U>{static_cast<U>(cfg.to_meta().size())});
  const auto K = static_cast<U>(cfg.kernel);
  for (int l = 1; l <= cfg.depth; ++l) {
    const auto cin = static_cast<U>(l == 1 ? 1 : cfg.channels(l - 1));
    const auto cout = static_cast<U>(cfg.channels(l));
    const std::string p = "encoder." + std::to_string(l - 1) + ".";
    inv.emplace_back(p + "0.weight", std::vector<U>{cout, cin, K});
    inv.emplace_back(p + "0.bias", std::vector<U>{cout});
    inv.emplace_back(p + "2.weight", std::vector<U>{2 * cout, cout, 1});
    inv.emplace_back(p + "2.bias", std::vector<U>{2 * cout});
  }
  const auto H = static_cast<U>(cfg.lstm_hidden());
  for (int k = 0; k < cfg.lstm_layers; ++k) {
    const std::string s = std::to_string(k);
    inv.emplace_back("lstm.lstm.weight_ih_l" + s, std::vector<U>{4 * H, H});
    inv.emplace_back("lstm.lstm.weight_hh_l" + s, std::vector<U>{4 * H, H});
    inv.emplace_back("lstm.lstm.bias_ih_l" + s, std::vector<U>{4 * H});
    inv.emplace_back("lstm.lstm.bias_hh_l" + s, std::vector<U>{4 * H});
  }
  // decoder.0 is the deepest block; decoder.{depth-1} produces the waveform.
  for (int j = 0; j < cfg.depth; ++j) {
    const int level = cfg.depth - j;
    const auto ch = static_cast<U>(cfg.channels(level));
    const auto cout = static_cast<U>(level == 1 ? 1 : cfg.channels(level - 1));
    const std::string p = "decoder." + std::to_string(j) + ".";
    inv.emplace_back(p + "0.weight", std::vector<U>{2 * ch, ch, 1});
    inv.emplace_back(p + "0.bias", std::vector<U>{2 * ch});
    inv.emplace_back(p + "2.weight", std::vector<U>{ch, cout, K});
    inv.emplace_back(p + "2.bias", std::vector<U>{cout});
  }
  return inv;
}

namespace {

// Fan-in for the uniform init bound; biases return 0 and reuse their weight's.
double fan_in(const std::string& name, const std::vector<std::uint32_t>& shape,
              const DemucsConfig& cfg) {
  if (name.starts_with("lstm.")) return cfg.lstm_hidden();
  // Conv1d [out, in, K] and ConvTranspose1d [in, out, K] both use dims 1 and 2.
  if (name.ends_with(".weight")) return static_cast<double>(shape[1]) * shape[2];
  return 0.0;
}

}  // namespace

WeightStore random_weights(const DemucsConfig& cfg, std::uint64_t seed, float scale) {
  std::mt19937_64 rng(seed);
  WeightStore w;
  double last_weight_fan = 1.0;
  for (const auto& [name, shape] : expected_inventory(cfg)) {
    Tensor t;
    t.shape = shape;
    if (name == "meta.config") {
      t.values = cfg.to_meta();
      w.add(name, std::move(t));
      continue;
    }
    double fan = fan_in(name, shape, cfg);
    if (fan == 0.0) fan = last_weight_fan;  // bias shares its weight's bound
    else last_weight_fan = fan;
    const double bound = scale / std::sqrt(fan);
    std::uniform_real_distribution<double> dist(-bound, bound);
    t.values.resize(t.numel());
    for (auto& v : t.values) v = static_cast<float>(dist(rng));
    w.add(name, std::move(t));
  }
  return w;
}

WeightStore zero_weights(const DemucsConfig& cfg) {
  WeightStore w;
  for (const auto& [name, shape] : expected_inventory(cfg)) {
    Tensor t;
    t.shape = shape;
    t.values = name == "meta.config" ? cfg.to_meta() : std::vector<float>(t.numel(), 0.0f);
    w.add(name, std::move(t));
  }
  return w;
}

}  // namespace declip::demucs
