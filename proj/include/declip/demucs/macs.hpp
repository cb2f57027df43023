// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <vector>

#include "declip/demucs/config.hpp"

namespace declip::demucs {

struct MacEntry {
  std::string name;
  double macs_per_invocation = 0.0;  // one output frame / sample of this layer
  double invocations_per_sample = 0.0;  // per original-rate input sample
  [[nodiscard]] double macs_per_sample() const { return macs_per_invocation * invocations_per_sample; }
};

struct MacReport {
  std::vector<MacEntry> layers;
  [[nodiscard]] double macs_per_sample() const;
};

/// kernel * cin * cout MACs per output frame.
[[nodiscard]] double conv_macs_per_sample(int kernel, int cin, int cout, double frames_per_sample);

/// Analytic multiply-accumulate count per original-rate sample. Encoder convs
/// are counted per output frame, transposed convs per input frame, LSTM as
/// 4H(H + H) per layer and frame, and each half-band stage as its tap count
/// per interpolated or decimated sample.
[[nodiscard]] MacReport mac_per_sample(const DemucsConfig& cfg);

}  // namespace declip::demucs
