// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "declip/demucs/dependency.hpp"

#include <algorithm>

#include "declip/errors.hpp"

namespace declip::demucs {

namespace {

long floor_div(long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

// Upsampled-rate index of the furthest input sample encoder level `level` frame t reads.
long encoder_need(const DemucsConfig& cfg, int level, long t) {
  for (int l = level; l >= 1; --l) t = cfg.stride * t + cfg.kernel - 1;
  return t;
}

long output_to_network_index(const DemucsConfig& cfg, long i) {
  for (int s = 0; s < cfg.resample_stages(); ++s) i = downsample2_need(i, cfg.resampler_zeros);
  return i;
}

long network_to_input_index(const DemucsConfig& cfg, long v) {
  for (int s = 0; s < cfg.resample_stages(); ++s) v = upsample2_need(v, cfg.resampler_zeros);
  return v;
}

}  // namespace

long upsample2_need(long o, int zeros) { return floor_div(o + 1, 2) + zeros - 1; }

long downsample2_need(long o, int zeros) { return 2 * o + 2 * zeros - 1; }

long network_need(const DemucsConfig& cfg, long u) {
  long need = 0;
  long t = u;
  for (int l = 1; l <= cfg.depth; ++l) {
    t = floor_div(t, cfg.stride);
    need = std::max(need, encoder_need(cfg, l, t));
  }
  return need;
}

long input_need(const DemucsConfig& cfg, long i) {
  const long v = network_need(cfg, output_to_network_index(cfg, i));
  return network_to_input_index(cfg, v) - cfg.alignment_delay();
}

long algorithmic_lookahead(const DemucsConfig& cfg) {
  cfg.validate();
  const long hop = cfg.hop();
  long best = input_need(cfg, 0);
  for (long i = 0; i < 2 * hop; ++i) best = std::max(best, input_need(cfg, i) - i);
  return best;
}

long lookahead_samples(const DemucsConfig& cfg, int buffer_frames) {
  cfg.validate();
  if (buffer_frames < 1) throw ValidationError("lookahead_samples: buffer_frames must be >= 1");
  const long block = cfg.hop() * buffer_frames;
  long best = input_need(cfg, block - 1);
  for (long b = 0; b < 4; ++b) best = std::max(best, input_need(cfg, (b + 1) * block - 1) - b * block);
  return best;
}

FramePlan plan_offline(const DemucsConfig& cfg, long n) {
  FramePlan p;
  p.delay = cfg.alignment_delay();
  const long last_network_index = output_to_network_index(cfg, n - 1);
  // Every deepest frame whose decoder footprint starts at or before the last read
  // index contributes, not just enough frames to cover its length.
  long hop_up = 1;
  for (int l = 0; l < cfg.depth; ++l) hop_up *= cfg.stride;
  p.frames = last_network_index / hop_up + 1;

  p.layer_lengths.assign(static_cast<std::size_t>(cfg.depth) + 1, 0);
  p.layer_lengths[cfg.depth] = p.frames;
  for (int l = cfg.depth; l >= 1; --l) {
    p.layer_lengths[l - 1] = (p.layer_lengths[l] - 1) * cfg.stride + cfg.kernel;
  }
  const long top = p.layer_lengths[0];

  // The first upsampling stage sees an implicit zero tail; later stages only see
  // what the previous stage produced, so that must cover everything they read.
  long need = top;
  const int stages = cfg.resample_stages();
  if (stages > 0) {
    for (int s = stages; s >= 2; --s) need = upsample2_need(need - 1, cfg.resampler_zeros) + 1;
    need = (need + 1) / 2;
  }
  p.padded_length = std::max(p.delay + n, need);
  return p;
}

}  // namespace declip::demucs
