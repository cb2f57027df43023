// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Exact input-dependency arithmetic of the generator. Every stage is
// evaluated in index order, so "need(o)" is the largest input index that must
// be available before output o (and all outputs before it) can be finalized.

#pragma once

#include <vector>

#include "declip/demucs/config.hpp"

namespace declip::demucs {

inline constexpr double kNormalizeFloor = 1e-3;

// Per-stage need functions (o >= 0).
[[nodiscard]] long upsample2_need(long o, int zeros);
[[nodiscard]] long downsample2_need(long o, int zeros);
/// Upsampled-rate network output u -> largest upsampled-rate input index.
[[nodiscard]] long network_need(const DemucsConfig& cfg, long u);

/// Largest original-rate input index (unpadded coordinates; may be negative)
/// that output sample i depends on.
[[nodiscard]] long input_need(const DemucsConfig& cfg, long i);

/// Smallest L with output i independent of inputs j > i + L, for all i.
[[nodiscard]] long algorithmic_lookahead(const DemucsConfig& cfg);

/// Streaming lookahead when outputs are released in blocks of hop * buffer_frames:
/// the smallest L such that output i has been emitted once input i + L has arrived.
[[nodiscard]] long lookahead_samples(const DemucsConfig& cfg, int buffer_frames);

/// Sizes used by the whole-signal forward pass for an input of n samples.
struct FramePlan {
  long delay = 0;          // zeros prepended to the input
  long frames = 0;         // LSTM frames
  long padded_length = 0;  // original-rate samples fed to the upsampler
  std::vector<long> layer_lengths;  // [0]: upsampled input, [l]: encoder level l frames
};

[[nodiscard]] FramePlan plan_offline(const DemucsConfig& cfg, long n);

}  // namespace declip::demucs
