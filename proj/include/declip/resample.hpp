// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <span>
#include <vector>

#include "declip/waveform.hpp"

namespace declip::resample {

inline constexpr int kDefaultZeros = 32;  // 64 taps per x2 stage
inline constexpr double kDefaultKaiserBeta = 8.0;

/// Half-band interpolation kernel: 2*zeros taps sampled at half-integer offsets
/// -zeros+0.5 ... zeros-0.5, Kaiser-windowed sinc normalized to unit DC gain.
struct HalfbandKernel {
  int zeros = kDefaultZeros;
  std::vector<float> taps;

  [[nodiscard]] int size() const noexcept { return 2 * zeros; }
};

[[nodiscard]] HalfbandKernel make_halfband_kernel(int zeros = kDefaultZeros,
                                                  double beta = kDefaultKaiserBeta);

/// out[2n] = x[n]; out[2n+1] = sum_k taps[k] * x[n + 1 + k - zeros]. Zero outside x.
[[nodiscard]] std::vector<float> upsample2(std::span<const float> x, const HalfbandKernel& k);

/// Pads to even length, then out[n] = 0.5 * (x[2n] + sum_k taps[k] * x[2(n + k - zeros) + 1]).
[[nodiscard]] std::vector<float> downsample2(std::span<const float> x, const HalfbandKernel& k);

enum class Direction { Up, Down };

/// Two x2 stages. Up: length x4. Down: length ceil(n / 4).
[[nodiscard]] Waveform resample_x4(const Waveform& y, Direction dir,
                                   const HalfbandKernel& k = make_halfband_kernel());

}  // namespace declip::resample
