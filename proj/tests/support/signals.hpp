// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "declip/demucs/config.hpp"
#include "declip/demucs/weights.hpp"
#include "declip/waveform.hpp"

namespace testsig {

inline declip::Waveform sine(double freq, double amp, std::size_t n, double phase = 0.0, int rate = 16000) {
  std::vector<float> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = static_cast<float>(amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate + phase));
  }
  return declip::Waveform(std::move(s), rate);
}

inline declip::Waveform uniform_noise(std::size_t n, std::uint64_t seed, float amp = 1.0f) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> d(-amp, amp);
  std::vector<float> s(n);
  for (auto& v : s) v = d(rng);
  return declip::Waveform(std::move(s));
}

/// Coloured noise with a formant-like resonance and a syllable-rate envelope,
/// peak-normalized to `peak`.
inline declip::Waveform speech_like(std::size_t n, std::uint64_t seed, double peak = 0.9) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double f = 300.0 + 900.0 * u(rng);  // resonance
  const double r = 0.97;
  const double a1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * f / 16000.0);
  const double a2 = -r * r;
  const double syl = 3.0 + 2.0 * u(rng);
  const double ph = 2.0 * std::numbers::pi * u(rng);
  std::vector<double> y(n);
  double y1 = 0.0, y2 = 0.0, lp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lp = 0.7 * lp + 0.3 * g(rng);  // tilt toward low frequencies
    const double v = lp + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = v;
    const double env = 0.15 + std::pow(std::sin(std::numbers::pi * syl * static_cast<double>(i) / 16000.0 + ph), 2);
    y[i] = v * env;
  }
  double m = 0.0;
  for (double v : y) m = std::max(m, std::fabs(v));
  std::vector<float> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = static_cast<float>(y[i] / m * peak);
  return declip::Waveform(std::move(s));
}

/// Narrow generator used where many forward passes are needed; same depth,
/// stride, kernel and resampling as the default.
inline declip::demucs::DemucsConfig small_config(int channels = 4, int lstm_layers = 2) {
  declip::demucs::DemucsConfig c;
  c.initial_channels = channels;
  c.lstm_layers = lstm_layers;
  return c;
}

// Random weights with the rectified layers biased into their linear range, so a
// perturbation probe is not hidden by units that never fire.
inline declip::demucs::WeightStore live_weights(const declip::demucs::DemucsConfig& cfg, std::uint64_t seed) {
  auto w = declip::demucs::random_weights(cfg, seed);
  for (int l = 0; l < cfg.depth; ++l) {
    for (auto& v : w.find("encoder." + std::to_string(l) + ".0.bias")->values) v += 1.0f;
  }
  for (int j = 0; j + 1 < cfg.depth; ++j) {
    for (auto& v : w.find("decoder." + std::to_string(j) + ".2.bias")->values) v += 1.0f;
  }
  return w;
}

}  // namespace testsig
