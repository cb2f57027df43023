// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <vector>

namespace declip::demucs {

/// Architecture hyperparameters of the causal waveform generator.
struct DemucsConfig {
  int depth = 5;
  int initial_channels = 64;
  int stride = 4;
  int kernel = 8;
  int channel_growth = 2;
  int max_channels = 10000;
  int lstm_layers = 2;
  int resample_factor = 4;  // 1, 2 or 4; implemented as x2 half-band stages
  int sample_rate = 16000;
  int resampler_zeros = 32;  // taps per x2 stage = 2 * zeros
  bool normalize = false;    // divide input by its standard deviation (offline only)

  void validate() const;

  /// Output channels of encoder block `level` (1-based).
  [[nodiscard]] int channels(int level) const;
  [[nodiscard]] int lstm_hidden() const { return channels(depth); }
  [[nodiscard]] int resample_stages() const;
  /// Network frame hop in original-rate samples: stride^depth / resample_factor.
  [[nodiscard]] long hop() const;
  /// Upsampled-rate samples spanned by T encoder output frames.
  [[nodiscard]] long upsampled_valid_length(long frames) const;
  /// Left zero padding in original-rate samples: the receptive field of one
  /// LSTM input frame, ceil(upsampled_valid_length(1) / resample_factor).
  [[nodiscard]] long alignment_delay() const;

  /// Flat numeric echo stored in the weight file as tensor "meta.config".
  [[nodiscard]] std::vector<float> to_meta() const;
  [[nodiscard]] static DemucsConfig from_meta(const std::vector<float>& meta);

  [[nodiscard]] std::string describe() const;

  bool operator==(const DemucsConfig&) const = default;
};

}  // namespace declip::demucs
