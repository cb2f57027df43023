// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "declip/demucs/model.hpp"
#include "declip/demucs/parity.hpp"
#include "declip/demucs/weights.hpp"
#include "declip/errors.hpp"
#include "signals.hpp"

using namespace declip;
using namespace declip::demucs;

namespace {

// Bitwise reflected CRC-32 (polynomial 0xEDB88320).
std::uint32_t crc32_ref(const std::uint8_t* p, std::size_t n) {
  std::uint32_t c = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < n; ++i) {
    c ^= p[i];
    for (int k = 0; k < 8; ++k) c = (c >> 1) ^ (0xEDB88320u & (0u - (c & 1u)));
  }
  return ~c;
}

template <typename T>
T read_le(const std::vector<std::uint8_t>& b, std::size_t pos) {
  T v{};
  std::memcpy(&v, b.data() + pos, sizeof(T));
  return v;
}

bool mentions(const std::vector<std::string>& issues, const std::string& needle) {
  for (const auto& s : issues) {
    if (s.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("weight file byte layout") {
  WeightStore w;
  w.add("ab", Tensor{{2, 1}, {1.5f, -2.0f}});
  w.add("c", Tensor{{}, {3.0f}});
  const auto b = encode_weights(w);
  REQUIRE(b.size() == 4 + 4 + 4 + (2 + 2 + 1 + 8 + 8) + (2 + 1 + 1 + 4) + 4);
  CHECK(std::memcmp(b.data(), "DDDW", 4) == 0);
  CHECK(b[4] == 1);
  CHECK(b[5] == 0);
  CHECK(b[8] == 2);
  CHECK(b[12] == 2);
  CHECK(b[13] == 0);
  CHECK(b[14] == 'a');
  CHECK(b[16] == 2);  // rank
  CHECK(read_le<std::uint32_t>(b, 17) == 2);
  CHECK(read_le<std::uint32_t>(b, 21) == 1);
  CHECK(read_le<float>(b, 25) == 1.5f);
  CHECK(read_le<float>(b, 29) == -2.0f);
  const std::uint32_t stored = read_le<std::uint32_t>(b, b.size() - 4);
  CHECK(stored == crc32_ref(b.data(), b.size() - 4));
  CHECK(crc32(std::span(b).first(b.size() - 4)) == stored);
}

TEST_CASE("weight file round trip and corruption") {
  const auto cfg = testsig::small_config();
  const auto w = random_weights(cfg, 3);
  const auto b = encode_weights(w);
  const auto back = decode_weights(b);
  REQUIRE(back.size() == w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(back.tensors()[i].name == w.tensors()[i].name);
    CHECK(back.tensors()[i].tensor.shape == w.tensors()[i].tensor.shape);
    CHECK(back.tensors()[i].tensor.values == w.tensors()[i].tensor.values);
  }
  CHECK(encode_weights(back) == b);

  auto flipped = b;
  flipped[40] ^= 0x01;
  CHECK_THROWS_AS(decode_weights(flipped), FormatError);
  auto magic = b;
  magic[0] = 'X';
  CHECK_THROWS_AS(decode_weights(magic), FormatError);
  CHECK_THROWS_AS(decode_weights(std::span(b).first(10)), FormatError);

  // Valid checksum over a bumped version or a truncated body still fails.
  auto reseal = [](std::vector<std::uint8_t> v) {
    v.resize(v.size() - 4);
    const auto c = crc32_ref(v.data(), v.size());
    for (int i = 0; i < 4; ++i) v.push_back(static_cast<std::uint8_t>(c >> (8 * i)));
    return v;
  };
  auto version = b;
  version[4] = 2;
  CHECK_THROWS_AS(decode_weights(reseal(version)), FormatError);
  auto cut = std::vector<std::uint8_t>(b.begin(), b.end() - 40);
  CHECK_THROWS_AS(decode_weights(reseal(cut)), FormatError);
  auto extra = std::vector<std::uint8_t>(b.begin(), b.end() - 4);
  extra.insert(extra.end(), {0, 0, 0, 0, 0, 0, 0, 0});
  CHECK_THROWS_AS(decode_weights(reseal(extra)), FormatError);
}

TEST_CASE("write_weights is atomic and readable") {
  const auto dir = std::filesystem::temp_directory_path() / "declip_weights_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "w.dddw";
  const auto w = random_weights(testsig::small_config(), 9);
  write_weights(w, path);
  CHECK_FALSE(std::filesystem::exists(dir / "w.dddw.tmp"));
  CHECK(encode_weights(read_weights(path)) == encode_weights(w));
  std::filesystem::remove_all(dir);
}

TEST_CASE("default inventory") {
  const DemucsConfig cfg;
  const auto inv = expected_inventory(cfg);
  CHECK(inv.size() == 1 + 5 * 4 + 2 * 4 + 5 * 4);
  CHECK(inv.front().first == "meta.config");
  auto shape_of = [&](const std::string& n) {
    for (const auto& [name, s] : inv) {
      if (name == n) return s;
    }
    return std::vector<std::uint32_t>{};
  };
  CHECK(shape_of("encoder.0.0.weight") == std::vector<std::uint32_t>{64, 1, 8});
  CHECK(shape_of("encoder.4.0.weight") == std::vector<std::uint32_t>{1024, 512, 8});
  CHECK(shape_of("encoder.4.2.weight") == std::vector<std::uint32_t>{2048, 1024, 1});
  CHECK(shape_of("lstm.lstm.weight_ih_l1") == std::vector<std::uint32_t>{4096, 1024});
  CHECK(shape_of("decoder.0.2.weight") == std::vector<std::uint32_t>{1024, 512, 8});
  CHECK(shape_of("decoder.4.2.weight") == std::vector<std::uint32_t>{64, 1, 8});
  CHECK(shape_of("decoder.4.2.bias") == std::vector<std::uint32_t>{1});
  CHECK(cfg.channels(cfg.depth) == 1024);
  CHECK(cfg.hop() == 256);
}

TEST_CASE("validation names every problem") {
  const auto cfg = testsig::small_config();
  const auto good = random_weights(cfg, 1);
  CHECK(weight_issues(cfg, good).empty());
  CHECK_NOTHROW(DemucsModel::create(cfg, good));

  auto missing = good;
  missing.remove("encoder.2.0.bias");
  try {
    (void)DemucsModel::create(cfg, missing);
    FAIL("expected rejection");
  } catch (const WeightValidationError& e) {
    REQUIRE(e.issues().size() == 1);
    CHECK(e.issues()[0].find("encoder.2.0.bias") != std::string::npos);
  }

  auto nan = good;
  nan.find("lstm.lstm.weight_hh_l1")->values[17] = std::numeric_limits<float>::quiet_NaN();
  const auto nan_issues = weight_issues(cfg, nan);
  CHECK(mentions(nan_issues, "lstm.lstm.weight_hh_l1"));
  CHECK(mentions(nan_issues, "index 17"));

  auto bad = good;
  bad.add("extra.thing", Tensor{{1}, {0.0f}});
  bad.find("decoder.1.0.weight")->shape = {1, 2, 3};
  bad.add("encoder.0.0.bias", *good.find("encoder.0.0.bias"));
  const auto issues = weight_issues(cfg, bad);
  CHECK(mentions(issues, "unexpected tensor 'extra.thing'"));
  CHECK(mentions(issues, "shape mismatch for 'decoder.1.0.weight'"));
  CHECK(mentions(issues, "duplicate tensor 'encoder.0.0.bias'"));

  auto other = cfg;
  other.normalize = true;
  CHECK(mentions(weight_issues(other, good), "meta.config"));
}

TEST_CASE("seeded weights are deterministic") {
  const auto cfg = testsig::small_config();
  CHECK(encode_weights(random_weights(cfg, 5)) == encode_weights(random_weights(cfg, 5)));
  CHECK(encode_weights(random_weights(cfg, 5)) != encode_weights(random_weights(cfg, 6)));
}

TEST_CASE("parity file round trip and replay") {
  const auto cfg = testsig::small_config();
  const auto w = random_weights(cfg, 2);
  const auto model = DemucsModel::create(cfg, w);
  const auto p = make_parity(model, w, 3, 2000, 77);
  REQUIRE(p.vectors.size() == 3);
  const auto bytes = encode_parity(p);
  CHECK(std::memcmp(bytes.data(), "DDDP", 4) == 0);
  CHECK(read_le<std::uint32_t>(bytes, bytes.size() - 4) == crc32_ref(bytes.data(), bytes.size() - 4));
  const auto back = decode_parity(bytes);
  CHECK(back.weights_crc == weights_checksum(w));
  CHECK(back.vectors[1].seed == 78);
  CHECK(back.vectors[2].output == p.vectors[2].output);

  const auto rep = replay_parity(model, back, weights_checksum(w));
  CHECK(rep.vectors == 3);
  CHECK(rep.max_abs_error == 0.0);
  CHECK_THROWS_AS(replay_parity(model, back, weights_checksum(w) ^ 1u), ValidationError);

  auto corrupt = bytes;
  corrupt[30] ^= 0x10;
  CHECK_THROWS_AS(decode_parity(corrupt), FormatError);
}
