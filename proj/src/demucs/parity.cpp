// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "declip/demucs/parity.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "binary_io.hpp"

namespace declip::demucs {

using bin::put;

std::vector<std::uint8_t> encode_parity(const ParitySet& p) {
  std::vector<std::uint8_t> out(std::begin(kParityMagic), std::end(kParityMagic));
  put<std::uint32_t>(out, kParityFormatVersion);
  put<std::uint32_t>(out, p.weights_crc);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(p.vectors.size()));
  for (const auto& v : p.vectors) {
    if (v.input.size() != v.output.size()) throw ValidationError("parity vector input/output lengths differ");
    put<std::uint64_t>(out, v.seed);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(v.input.size()));
    bin::put_floats(out, v.input);
    bin::put_floats(out, v.output);
  }
  put<std::uint32_t>(out, crc32(out));
  return out;
}

ParitySet decode_parity(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 20) throw FormatError("parity file too short");
  if (std::memcmp(bytes.data(), kParityMagic, 4) != 0) throw FormatError("bad parity file magic");
  const auto body = bytes.first(bytes.size() - 4);
  std::uint32_t stored = 0;
  std::memcpy(&stored, bytes.data() + body.size(), 4);
  if (crc32(body) != stored) throw FormatError("parity file CRC32 mismatch");
  bin::ByteReader r(body, "parity file");
  r.take(4, "magic");
  if (const auto v = r.get<std::uint32_t>("version"); v != kParityFormatVersion) {
    throw FormatError("unsupported parity format version " + std::to_string(v));
  }
  ParitySet p;
  p.weights_crc = r.get<std::uint32_t>("weights crc");
  const auto count = r.get<std::uint32_t>("vector count");
  for (std::uint32_t i = 0; i < count; ++i) {
    ParityVector v;
    v.seed = r.get<std::uint64_t>("seed");
    const auto n = r.get<std::uint32_t>("length");
    v.input = r.floats(n, "input");
    v.output = r.floats(n, "output");
    p.vectors.push_back(std::move(v));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after last parity vector");
  return p;
}

void write_parity(const ParitySet& p, const std::filesystem::path& path) {
  bin::write_file_atomic(path, encode_parity(p));
}

ParitySet read_parity(const std::filesystem::path& path) { return decode_parity(bin::read_file(path)); }

std::uint32_t weights_checksum(const WeightStore& w) {
  const auto bytes = encode_weights(w);
  std::uint32_t c = 0;
  std::memcpy(&c, bytes.data() + bytes.size() - 4, 4);
  return c;
}

ParitySet make_parity(const DemucsModel& model, const WeightStore& w, int n, long length,
                      std::uint64_t seed) {
  if (n < 0 || length < 1) throw ValidationError("make_parity: need n >= 0 and length >= 1");
  ParitySet p;
  p.weights_crc = weights_checksum(w);
  for (int k = 0; k < n; ++k) {
    ParityVector v;
    v.seed = seed + static_cast<std::uint64_t>(k);
    std::mt19937_64 rng(v.seed);
    std::uniform_real_distribution<float> dist(-0.5f, 0.5f);
    v.input.resize(static_cast<std::size_t>(length));
    for (auto& x : v.input) x = dist(rng);
    v.output = model.forward(Waveform(v.input, model.config().sample_rate)).samples;
    p.vectors.push_back(std::move(v));
  }
  return p;
}

ParityReplay replay_parity(const DemucsModel& model, const ParitySet& p, std::uint32_t expected_crc) {
  if (p.weights_crc != expected_crc) {
    std::ostringstream msg;
    msg << std::hex << "parity vectors were produced by weights with crc 0x" << p.weights_crc
        << ", loaded weights have 0x" << expected_crc;
    throw ValidationError(msg.str());
  }
  ParityReplay r;
  for (const auto& v : p.vectors) {
    const auto y = model.forward(Waveform(v.input, model.config().sample_rate));
    for (std::size_t i = 0; i < y.size(); ++i) {
      r.max_abs_error = std::max(r.max_abs_error, std::fabs(static_cast<double>(y[i]) - v.output[i]));
    }
    ++r.vectors;
  }
  return r;
}

}  // namespace declip::demucs
