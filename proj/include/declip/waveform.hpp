// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace declip {

inline constexpr int kDefaultSampleRate = 16000;

/// Mono sampled signal. Nominal amplitude range is [-1, 1].
struct Waveform {
  std::vector<float> samples;
  int sample_rate = kDefaultSampleRate;

  Waveform() = default;
  explicit Waveform(std::vector<float> s, int rate = kDefaultSampleRate)
      : samples(std::move(s)), sample_rate(rate) {}

  [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }
  [[nodiscard]] bool empty() const noexcept { return samples.empty(); }
  [[nodiscard]] double duration_s() const noexcept {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  [[nodiscard]] std::span<const float> view() const noexcept { return samples; }
  float& operator[](std::size_t i) { return samples[i]; }
  float operator[](std::size_t i) const { return samples[i]; }
};

// Throws ValidationError naming `what` on the first NaN/Inf.
void require_finite(std::span<const float> x, std::string_view what);
void require_nonempty(const Waveform& y, std::string_view what);
void require_same_length(const Waveform& a, const Waveform& b, std::string_view what);

}  // namespace declip
