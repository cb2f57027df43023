// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "declip/clipping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "declip/errors.hpp"

namespace declip {

ClipThreshold::ClipThreshold(double theta) : theta_(theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw ValidationError("clip threshold must lie in [0, 1], got " + std::to_string(theta));
  }
}

std::size_t ClipMask::clipped_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](ClipLabel l) { return l != ClipLabel::Reliable; }));
}

double SnrDb::db() const {
  if (!db_) throw StateError("SNR is infinite (signals identical)");
  return *db_;
}

double SnrDb::value_or_inf() const noexcept {
  return db_ ? *db_ : std::numeric_limits<double>::infinity();
}

Waveform hard_clip(const Waveform& y, ClipThreshold theta) {
  require_finite(y.view(), "hard_clip");
  const auto t = static_cast<float>(theta.value());
  Waveform out;
  out.sample_rate = y.sample_rate;
  out.samples.resize(y.size());
  std::transform(y.samples.begin(), y.samples.end(), out.samples.begin(), [t](float v) {
    if (std::fabs(v) <= t) return v;
    return v > 0.0f ? t : -t;
  });
  return out;
}

ClipMask clip_mask(const Waveform& x, ClipThreshold theta, double abs_tolerance,
                   const WarningSink& warn) {
  const double t = theta.value();
  if (t == 0.0 && warn) warn("clip_mask: theta = 0, every sample is labeled clipped");
  const double rail = t - std::max(t * kMaskRelativeTolerance, abs_tolerance);
  ClipMask mask;
  mask.labels.resize(x.size(), ClipLabel::Reliable);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i];
    if (v >= rail) {
      mask.labels[i] = ClipLabel::ClippedHigh;
    } else if (v <= -rail) {
      mask.labels[i] = ClipLabel::ClippedLow;
    }
  }
  return mask;
}

namespace {

double energy(std::span<const float> x) {
  double e = 0.0;
  for (float v : x) e += static_cast<double>(v) * v;
  return e;
}

// Clipping error energy sum over |y| > theta of (|y| - theta)^2, computed without
// materializing the clipped signal (float rounding of theta is ignored).
double clip_error_energy(std::span<const float> y, double theta) {
  double e = 0.0;
  for (float v : y) {
    const double a = std::fabs(static_cast<double>(v));
    if (a > theta) e += (a - theta) * (a - theta);
  }
  return e;
}

}  // namespace

SnrDb snr_db(const Waveform& reference, const Waveform& test) {
  require_same_length(reference, test, "snr_db");
  require_nonempty(reference, "snr_db");
  require_finite(reference.view(), "snr_db reference");
  require_finite(test.view(), "snr_db test");
  const double signal = energy(reference.view());
  if (signal == 0.0) throw ValidationError("snr_db: reference is identically zero");
  double noise = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = static_cast<double>(test[i]) - reference[i];
    noise += d * d;
  }
  if (noise == 0.0) return SnrDb::infinite();
  return SnrDb::finite(10.0 * std::log10(signal / noise));
}

ThresholdSampler::ThresholdSampler(std::uint64_t seed, double lo, double hi)
    : lo_(lo), hi_(hi), rng_(seed), dist_(lo, hi) {
  if (!(lo < hi) || hi > 0.0) throw ValidationError("ThresholdSampler: need lo < hi <= 0");
}

ClipThreshold ThresholdSampler::sample() { return from_exponent(dist_(rng_)); }

ClipThreshold ThresholdSampler::from_exponent(double s) { return ClipThreshold(std::pow(10.0, s)); }

ClipThreshold threshold_for_target_snr(const Waveform& y, SnrDb target, double tol_db) {
  require_nonempty(y, "threshold_for_target_snr");
  require_finite(y.view(), "threshold_for_target_snr");
  if (target.is_infinite()) {
    throw ValidationError("threshold_for_target_snr: infinite target is not searchable");
  }
  if (!(tol_db > 0.0)) throw ValidationError("threshold_for_target_snr: tol must be positive");
  const double signal = energy(y.view());
  if (signal == 0.0) throw ValidationError("threshold_for_target_snr: signal is identically zero");

  const auto snr_at = [&](double theta) {
    const double noise = clip_error_energy(y.view(), theta);
    if (noise == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(signal / noise);
  };

  double peak = 0.0;
  for (float v : y.samples) peak = std::max(peak, std::fabs(static_cast<double>(v)));
  double lo = std::min(ThresholdSearch::kBracketLo, peak);
  double hi = std::min(peak, 1.0);
  const double want = target.db();
  const double floor_snr = snr_at(lo);
  if (want < floor_snr - tol_db) {
    std::ostringstream msg;
    msg << "threshold_for_target_snr: target " << want << " dB below achievable minimum "
        << floor_snr << " dB";
    throw RangeError(msg.str());
  }
  if (std::fabs(floor_snr - want) <= tol_db) return ClipThreshold(lo);
  if (const double ceiling = snr_at(hi); ceiling < want - tol_db) {
    std::ostringstream msg;
    msg << "threshold_for_target_snr: target " << want << " dB above achievable maximum "
        << ceiling << " dB at theta = 1";
    throw RangeError(msg.str());
  }

  double mid = hi;
  for (int it = 0; it < ThresholdSearch::kMaxIterations; ++it) {
    mid = 0.5 * (lo + hi);
    const double s = snr_at(mid);
    if (std::fabs(s - want) <= tol_db) break;
    if (s < want) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < ThresholdSearch::kMinBracketWidth) {
      mid = 0.5 * (lo + hi);
      break;
    }
  }
  return ClipThreshold(mid);
}

std::size_t count_saturated_extrema(const Waveform& reference, const ClipMask& mask) {
  if (mask.size() != reference.size()) {
    throw ValidationError("count_saturated_extrema: mask length differs from reference");
  }
  const std::size_t n = reference.size();
  if (n < 3) return 0;
  std::size_t count = 0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (mask[i] == ClipLabel::Reliable) continue;
    const double left = static_cast<double>(reference[i]) - reference[i - 1];
    const double right = static_cast<double>(reference[i + 1]) - reference[i];
    if (left * right < 0.0) ++count;
  }
  return count;
}

}  // namespace declip
