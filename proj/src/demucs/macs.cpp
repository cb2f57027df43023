// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "declip/demucs/macs.hpp"

#include <cmath>
#include <numeric>

namespace declip::demucs {

double MacReport::macs_per_sample() const {
  return std::accumulate(layers.begin(), layers.end(), 0.0,
                         [](double acc, const MacEntry& e) { return acc + e.macs_per_sample(); });
}

double conv_macs_per_sample(int kernel, int cin, int cout, double frames_per_sample) {
  return static_cast<double>(kernel) * cin * cout * frames_per_sample;
}

MacReport mac_per_sample(const DemucsConfig& cfg) {
  cfg.validate();
  MacReport r;
  const int taps = 2 * cfg.resampler_zeros;
  const int stages = cfg.resample_stages();

  // Upsampler: stage s (0-based) emits 2^s interpolated samples per input sample.
  for (int s = 0; s < stages; ++s) {
    r.layers.push_back({"upsample." + std::to_string(s), static_cast<double>(taps), std::ldexp(1.0, s)});
  }

  const double rate = cfg.resample_factor;
  auto frame_rate = [&](int level) { return rate / std::pow(cfg.stride, level); };
  for (int l = 1; l <= cfg.depth; ++l) {
    const int cin = l == 1 ? 1 : cfg.channels(l - 1);
    const int c = cfg.channels(l);
    const std::string p = "encoder." + std::to_string(l - 1);
    r.layers.push_back({p + ".conv", static_cast<double>(cfg.kernel) * cin * c, frame_rate(l)});
    r.layers.push_back({p + ".glu", 2.0 * c * c, frame_rate(l)});
  }

  const double h = cfg.lstm_hidden();
  for (int k = 0; k < cfg.lstm_layers; ++k) {
    r.layers.push_back({"lstm." + std::to_string(k), 4.0 * h * (h + h), frame_rate(cfg.depth)});
  }

  for (int l = cfg.depth; l >= 1; --l) {
    const int c = cfg.channels(l);
    const int cout = l == 1 ? 1 : cfg.channels(l - 1);
    const std::string p = "decoder." + std::to_string(cfg.depth - l);
    r.layers.push_back({p + ".glu", 2.0 * c * c, frame_rate(l)});
    r.layers.push_back({p + ".convtr", static_cast<double>(cfg.kernel) * c * cout, frame_rate(l)});
  }

  // Downsampler: stage s produces R / 2^(s+1) decimated samples per input sample.
  for (int s = 0; s < stages; ++s) {
    r.layers.push_back({"downsample." + std::to_string(s), static_cast<double>(taps),
                        rate / std::ldexp(1.0, s + 1)});
  }
  return r;
}

}  // namespace declip::demucs
