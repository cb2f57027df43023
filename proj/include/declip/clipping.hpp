// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "declip/waveform.hpp"

namespace declip {

/// Clipping threshold theta in [0, 1].
class ClipThreshold {
 public:
  explicit ClipThreshold(double theta);
  [[nodiscard]] double value() const noexcept { return theta_; }

 private:
  double theta_;
};

enum class ClipLabel : std::uint8_t { Reliable = 0, ClippedHigh = 1, ClippedLow = 2 };

struct ClipMask {
  std::vector<ClipLabel> labels;

  [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }
  [[nodiscard]] std::size_t clipped_count() const noexcept;
  [[nodiscard]] bool any_clipped() const noexcept { return clipped_count() > 0; }
  ClipLabel operator[](std::size_t i) const { return labels[i]; }
};

/// Signal-to-noise ratio in dB. Identical signals give the infinite sentinel.
class SnrDb {
 public:
  static SnrDb infinite() { return SnrDb(); }
  static SnrDb finite(double db) { return SnrDb(db); }

  [[nodiscard]] bool is_infinite() const noexcept { return !db_.has_value(); }
  // Throws StateError on the infinite sentinel.
  [[nodiscard]] double db() const;
  // +inf for the sentinel; handy for comparisons.
  [[nodiscard]] double value_or_inf() const noexcept;

 private:
  SnrDb() = default;
  explicit SnrDb(double db) : db_(db) {}
  std::optional<double> db_;
};

using WarningSink = std::function<void(std::string_view)>;

/// Relative tolerance when deciding a sample sits on the clipping rail.
inline constexpr double kMaskRelativeTolerance = 1e-7;

[[nodiscard]] Waveform hard_clip(const Waveform& y, ClipThreshold theta);

/// Labels |x| >= theta*(1 - 1e-7) as clipped. `abs_tolerance`, when larger, widens
/// the rail (used for quantized PCM). theta = 0 labels everything clipped and
/// reports through `warn`.
[[nodiscard]] ClipMask clip_mask(const Waveform& x, ClipThreshold theta,
                                 double abs_tolerance = 0.0, const WarningSink& warn = {});

[[nodiscard]] SnrDb snr_db(const Waveform& reference, const Waveform& test);

/// theta = 10^s with s ~ U[lo, hi]; defaults are the training-time exponent range.
class ThresholdSampler {
 public:
  static constexpr double kDefaultLo = -2.0;
  static constexpr double kDefaultHi = -0.9;

  explicit ThresholdSampler(std::uint64_t seed, double lo = kDefaultLo, double hi = kDefaultHi);

  ClipThreshold sample();
  [[nodiscard]] static ClipThreshold from_exponent(double s);
  [[nodiscard]] double lo() const noexcept { return lo_; }
  [[nodiscard]] double hi() const noexcept { return hi_; }

 private:
  double lo_;
  double hi_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> dist_;
};

struct ThresholdSearch {
  static constexpr double kBracketLo = 1e-6;
  static constexpr int kMaxIterations = 200;
  static constexpr double kMinBracketWidth = 1e-9;
};

/// Bisection on theta so that snr_db(y, hard_clip(y, theta)) is within tol of target.
[[nodiscard]] ClipThreshold threshold_for_target_snr(const Waveform& y, SnrDb target,
                                                     double tol_db);

/// Strict local extrema of `reference` at indices the mask marks as clipped.
[[nodiscard]] std::size_t count_saturated_extrema(const Waveform& reference, const ClipMask& mask);

}  // namespace declip
