// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "declip/resample.hpp"
#include "oracles.hpp"
#include "signals.hpp"

using namespace declip;
using namespace declip::resample;

TEST_CASE("half-band kernel matches an independent construction") {
  const auto k = make_halfband_kernel();
  const auto ref = oracle::halfband(32, 8.0);
  REQUIRE(k.taps.size() == 64);
  double sum = 0.0;
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(std::fabs(k.taps[i] - ref[i]) < 1e-7);
    CHECK(k.taps[i] == k.taps[63 - i]);
    sum += k.taps[i];
  }
  CHECK(std::fabs(sum - 1.0) < 1e-6);
}

TEST_CASE("lengths") {
  std::vector<float> x(101, 0.1f);
  CHECK(resample_x4(Waveform(x), Direction::Up).size() == 404);
  CHECK(resample_x4(Waveform(std::vector<float>(404)), Direction::Down).size() == 101);
  CHECK(resample_x4(Waveform(std::vector<float>(403)), Direction::Down).size() == 101);
}

TEST_CASE("DC survives up then down") {
  const Waveform dc(std::vector<float>(2000, 0.42f));
  const auto back = resample_x4(resample_x4(dc, Direction::Up), Direction::Down);
  // Away from the zero-extended edges.
  for (std::size_t i = 100; i < 1900; ++i) CHECK(std::fabs(back[i] - 0.42f) < 1e-3);
}

TEST_CASE("band-limited round trip") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> acc(8000, 0.0);
  for (int c = 0; c < 20; ++c) {
    const double f = 0.4 * 8000.0 * u(rng);
    const double ph = 2.0 * std::numbers::pi * u(rng);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += std::sin(2.0 * std::numbers::pi * f * i / 16000.0 + ph) / 20.0;
  }
  const Waveform x(std::vector<float>(acc.begin(), acc.end()));
  const auto back = resample_x4(resample_x4(x, Direction::Up), Direction::Down);
  double worst = 0.0;
  for (std::size_t i = 200; i < 7800; ++i) worst = std::max(worst, std::fabs(static_cast<double>(back[i]) - x[i]));
  CHECK(worst < 1e-3);
}

TEST_CASE("impulse response shows the kernel") {
  const auto k = make_halfband_kernel();
  std::vector<float> x(200, 0.0f);
  x[100] = 1.0f;
  const auto y = upsample2(x, k);
  CHECK(y[200] == 1.0f);
  // Odd outputs 2n+1 read x[n + 1 + j - Z]; the impulse sits at j = 100 - n - 1 + Z.
  for (int j = 0; j < 64; ++j) {
    const int n = 100 - 1 + 32 - j;
    CHECK(y[2 * n + 1] == k.taps[j]);
  }
  const auto y4 = resample_x4(Waveform(x), Direction::Up, k);
  CHECK(y4[400] == 1.0f);
  // The x4 response on the stride-4 grid is the first stage's kernel.
  for (int j = 0; j < 64; ++j) {
    const int n = 100 - 1 + 32 - j;
    CHECK(std::fabs(y4[4 * n + 2] - k.taps[j]) < 1e-7);
  }
}
