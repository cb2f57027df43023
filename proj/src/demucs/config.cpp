// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "declip/demucs/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "declip/errors.hpp"

namespace declip::demucs {

namespace {
constexpr std::size_t kMetaFields = 11;

long ipow(long base, int exp) {
  long r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}
}  // namespace

void DemucsConfig::validate() const {
  std::ostringstream err;
  if (depth < 1) err << " depth must be >= 1;";
  if (initial_channels < 1) err << " initial_channels must be >= 1;";
  if (stride < 1) err << " stride must be >= 1;";
  if (kernel < stride) err << " kernel must be >= stride;";
  if (channel_growth < 1) err << " channel_growth must be >= 1;";
  if (max_channels < 1) err << " max_channels must be >= 1;";
  if (lstm_layers < 1) err << " lstm_layers must be >= 1;";
  if (resample_factor != 1 && resample_factor != 2 && resample_factor != 4) {
    err << " resample_factor must be 1, 2 or 4;";
  }
  if (sample_rate < 1) err << " sample_rate must be positive;";
  if (resampler_zeros < 1) err << " resampler_zeros must be >= 1;";
  if (depth >= 1 && stride >= 1 && resample_factor >= 1 &&
      ipow(stride, depth) % resample_factor != 0) {
    err << " stride^depth must be divisible by resample_factor;";
  }
  if (const auto s = err.str(); !s.empty()) throw ValidationError("DemucsConfig:" + s);
}

int DemucsConfig::channels(int level) const {
  long c = initial_channels;
  for (int l = 1; l < level; ++l) c = std::min<long>(c * channel_growth, max_channels);
  return static_cast<int>(std::min<long>(c, max_channels));
}

int DemucsConfig::resample_stages() const {
  return resample_factor == 4 ? 2 : resample_factor == 2 ? 1 : 0;
}

long DemucsConfig::hop() const { return ipow(stride, depth) / resample_factor; }

long DemucsConfig::upsampled_valid_length(long frames) const {
  long len = frames;
  for (int l = 0; l < depth; ++l) len = (len - 1) * stride + kernel;
  return len;
}

long DemucsConfig::alignment_delay() const {
  const long up = upsampled_valid_length(1);
  return (up + resample_factor - 1) / resample_factor;
}

std::vector<float> DemucsConfig::to_meta() const {
  return {static_cast<float>(depth),          static_cast<float>(initial_channels),
          static_cast<float>(stride),         static_cast<float>(kernel),
          static_cast<float>(channel_growth), static_cast<float>(max_channels),
          static_cast<float>(lstm_layers),    static_cast<float>(resample_factor),
          static_cast<float>(sample_rate),    static_cast<float>(resampler_zeros),
          normalize ? 1.0f : 0.0f};
}

DemucsConfig DemucsConfig::from_meta(const std::vector<float>& meta) {
  if (meta.size() != kMetaFields) {
    throw ValidationError("meta.config: expected " + std::to_string(kMetaFields) + " values, got " +
                          std::to_string(meta.size()));
  }
  const auto as_int = [&](std::size_t i) {
    const float v = meta[i];
    if (!std::isfinite(v) || v != std::round(v)) {
      throw ValidationError("meta.config: field " + std::to_string(i) + " is not an integer");
    }
    return static_cast<int>(v);
  };
  DemucsConfig c;
  c.depth = as_int(0);
  c.initial_channels = as_int(1);
  c.stride = as_int(2);
  c.kernel = as_int(3);
  c.channel_growth = as_int(4);
  c.max_channels = as_int(5);
  c.lstm_layers = as_int(6);
  c.resample_factor = as_int(7);
  c.sample_rate = as_int(8);
  c.resampler_zeros = as_int(9);
  c.normalize = as_int(10) != 0;
  c.validate();
  return c;
}

std::string DemucsConfig::describe() const {
  std::ostringstream s;
  s << "depth=" << depth << " channels=" << initial_channels << ".." << channels(depth)
    << " kernel=" << kernel << " stride=" << stride << " lstm=" << lstm_layers << "x"
    << lstm_hidden() << " resample=" << resample_factor << " taps=" << 2 * resampler_zeros
    << " rate=" << sample_rate << " normalize=" << (normalize ? "on" : "off");
  return s.str();
}

}  // namespace declip::demucs
