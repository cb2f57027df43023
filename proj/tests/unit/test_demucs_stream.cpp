// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "declip/demucs/dependency.hpp"
#include "declip/demucs/stream.hpp"
#include "declip/errors.hpp"
#include "signals.hpp"

using namespace declip;
using namespace declip::demucs;

namespace {

DemucsModel small_model(std::uint64_t seed = 1) {
  const auto cfg = testsig::small_config();
  return DemucsModel::create(cfg, random_weights(cfg, seed));
}

std::vector<float> run_chunked(DemucsStream& s, const std::vector<float>& x, std::mt19937_64& rng,
                               std::size_t max_chunk) {
  std::uniform_int_distribution<std::size_t> len(0, max_chunk);
  std::vector<float> out;
  std::size_t pos = 0;
  while (pos < x.size()) {
    const std::size_t c = std::min(len(rng), x.size() - pos);
    const auto got = s.push(std::span(x).subspan(pos, c));
    out.insert(out.end(), got.begin(), got.end());
    pos += c;
    CHECK(s.emitted() <= s.consumed());
  }
  const auto tail = s.flush();
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

double max_abs_diff(const std::vector<float>& a, const std::vector<float>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, static_cast<double>(std::fabs(a[i] - b[i])));
  return m;
}

}  // namespace

TEST_CASE("short push emits nothing") {
  DemucsStream s(small_model(), 4);
  CHECK(s.block_size() == 1024);
  CHECK(s.lookahead() == 1071);
  const auto x = testsig::uniform_noise(100, 1);
  CHECK(s.push(x.samples).empty());
  CHECK(s.consumed() == 100);
  CHECK(s.emitted() == 0);
  CHECK(s.samples_until_next_block() == 1072 - 100);
}

TEST_CASE("chunked streaming equals the offline pass") {
  const auto model = small_model(7);
  std::mt19937_64 rng(42);
  for (int F : {1, 2, 4}) {
    for (std::size_t n : {1u, 300u, 2500u, 9000u}) {
      const auto x = testsig::uniform_noise(n, 1000 + n, 0.5f);
      const auto ref = model.forward(x).samples;
      DemucsStream s(model, F);
      const auto y = run_chunked(s, x.samples, rng, 700);
      INFO("F=" << F << " n=" << n);
      REQUIRE(y.size() == n);
      CHECK(max_abs_diff(y, ref) <= 1e-5);
      CHECK(s.emitted() == static_cast<long>(n));
    }
  }
}

TEST_CASE("streams do not share state") {
  const auto model = small_model(3);
  const auto a = testsig::uniform_noise(4000, 1, 0.5f);
  const auto b = testsig::speech_like(4000, 2, 0.5);
  DemucsStream sa(model, 2), sb(model, 2);
  std::vector<float> ya, yb;
  for (std::size_t p = 0; p < 4000; p += 333) {
    const std::size_t c = std::min<std::size_t>(333, 4000 - p);
    auto ga = sa.push(std::span(a.samples).subspan(p, c));
    auto gb = sb.push(std::span(b.samples).subspan(p, c));
    ya.insert(ya.end(), ga.begin(), ga.end());
    yb.insert(yb.end(), gb.begin(), gb.end());
  }
  auto ta = sa.flush();
  auto tb = sb.flush();
  ya.insert(ya.end(), ta.begin(), ta.end());
  yb.insert(yb.end(), tb.begin(), tb.end());
  CHECK(max_abs_diff(ya, model.forward(a).samples) <= 1e-5);
  CHECK(max_abs_diff(yb, model.forward(b).samples) <= 1e-5);
}

TEST_CASE("flush protocol") {
  DemucsStream s(small_model(), 1);
  const auto x = testsig::uniform_noise(1000, 3);
  const auto head = s.push(x.samples);
  CHECK(head.size() % 256 == 0);
  const auto tail = s.flush();
  CHECK(head.size() + tail.size() == 1000);
  CHECK(s.finished());
  CHECK_THROWS_AS(s.flush(), StateError);
  CHECK_THROWS_AS(s.push(x.samples), StateError);

  DemucsStream empty(small_model(), 1);
  CHECK(empty.flush().empty());
}

TEST_CASE("reset restores the initial state") {
  const auto model = small_model(5);
  const auto x = testsig::uniform_noise(3000, 4, 0.5f);
  DemucsStream s(model, 2);
  auto first = s.push(x.samples);
  auto t1 = s.flush();
  first.insert(first.end(), t1.begin(), t1.end());
  s.reset();
  CHECK(s.consumed() == 0);
  CHECK_FALSE(s.finished());
  auto second = s.push(x.samples);
  auto t2 = s.flush();
  second.insert(second.end(), t2.begin(), t2.end());
  CHECK(first == second);
}

TEST_CASE("normalizing models cannot stream") {
  auto cfg = testsig::small_config();
  cfg.normalize = true;
  auto w = random_weights(cfg, 1);
  CHECK_THROWS_AS(DemucsStream(DemucsModel::create(cfg, w), 1), ValidationError);
  CHECK_THROWS_AS(DemucsStream(small_model(), 0), ValidationError);
}

TEST_CASE("output i is released once i + L + 1 samples are in") {
  const auto model = small_model(2);
  for (int F : {1, 2, 4, 8}) {
    DemucsStream s(model, F);
    const auto block = s.block_size();
    const auto x = testsig::uniform_noise(static_cast<std::size_t>(3 * block + 2000), 6);
    long worst = 0;
    long emitted = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const auto got = s.push(std::span(x.samples).subspan(k, 1));
      for (std::size_t q = 0; q < got.size(); ++q) {
        const long i = emitted + static_cast<long>(q);
        worst = std::max(worst, s.consumed() - i - 1);
      }
      emitted += static_cast<long>(got.size());
    }
    INFO("F=" << F);
    CHECK(emitted >= 3 * block);
    CHECK(worst == lookahead_samples(model.config(), F));
    CHECK(worst == 256L * F + 47);
  }
}
