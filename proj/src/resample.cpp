// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "declip/resample.hpp"

#include <cmath>
#include <numbers>

#include "declip/errors.hpp"

namespace declip::resample {

HalfbandKernel make_halfband_kernel(int zeros, double beta) {
  if (zeros < 1) throw ValidationError("make_halfband_kernel: zeros must be >= 1");
  HalfbandKernel k;
  k.zeros = zeros;
  std::vector<double> h(static_cast<std::size_t>(2 * zeros));
  const double norm = std::cyl_bessel_i(0.0, beta);
  double sum = 0.0;
  for (int i = 0; i < 2 * zeros; ++i) {
    const double t = i - zeros + 0.5;
    const double r = t / zeros;
    const double w = std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - r * r)) / norm;
    const double x = std::numbers::pi * t;
    h[i] = std::sin(x) / x * w;
    sum += h[i];
  }
  k.taps.resize(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) k.taps[i] = static_cast<float>(h[i] / sum);
  return k;
}

std::vector<float> upsample2(std::span<const float> x, const HalfbandKernel& k) {
  const auto n = static_cast<long>(x.size());
  const long z = k.zeros;
  std::vector<float> out(x.size() * 2);
  for (long i = 0; i < n; ++i) {
    float acc = 0.0f;
    for (long j = 0; j < 2 * z; ++j) {
      const long src = i + 1 + j - z;
      if (src >= 0 && src < n) acc += k.taps[j] * x[src];
    }
    out[2 * i] = x[i];
    out[2 * i + 1] = acc;
  }
  return out;
}

std::vector<float> downsample2(std::span<const float> x, const HalfbandKernel& k) {
  const long half = static_cast<long>((x.size() + 1) / 2);
  const long z = k.zeros;
  const auto sample = [&](long idx) -> float {
    return idx >= 0 && idx < static_cast<long>(x.size()) ? x[idx] : 0.0f;
  };
  std::vector<float> out(static_cast<std::size_t>(half));
  for (long i = 0; i < half; ++i) {
    float acc = 0.0f;
    for (long j = 0; j < 2 * z; ++j) acc += k.taps[j] * sample(2 * (i + j - z) + 1);
    out[i] = 0.5f * (sample(2 * i) + acc);
  }
  return out;
}

Waveform resample_x4(const Waveform& y, Direction dir, const HalfbandKernel& k) {
  Waveform out;
  if (dir == Direction::Up) {
    out.samples = upsample2(upsample2(y.view(), k), k);
    out.sample_rate = y.sample_rate * 4;
  } else {
    out.samples = downsample2(downsample2(y.view(), k), k);
    out.sample_rate = y.sample_rate / 4;
  }
  return out;
}

}  // namespace declip::resample
