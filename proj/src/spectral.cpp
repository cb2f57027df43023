// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "declip/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "declip/errors.hpp"
#include "declip/fft.hpp"

namespace declip::spectral {

void StftConfig::validate() const {
  if (fft_size == 0 || (fft_size & (fft_size - 1)) != 0) {
    throw ValidationError("StftConfig: fft_size must be a power of two, got " +
                          std::to_string(fft_size));
  }
  if (hop < 1 || hop > fft_size) {
    throw ValidationError("StftConfig: hop must lie in [1, fft_size], got " + std::to_string(hop));
  }
}

std::vector<double> make_window(Window w, std::size_t n) {
  std::vector<double> out(n, 1.0);
  if (w == Window::Hann) {
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                    static_cast<double>(n));
    }
  }
  return out;
}

std::size_t frame_count(std::size_t length, const StftConfig& cfg) {
  if (length < cfg.fft_size) return 0;
  return (length - cfg.fft_size) / cfg.hop + 1;
}

Spectrogram stft_magnitude(const Waveform& y, const StftConfig& cfg) {
  cfg.validate();
  require_finite(y.view(), "stft_magnitude");
  if (y.size() < cfg.fft_size) {
    throw ValidationError("stft_magnitude: signal of " + std::to_string(y.size()) +
                          " samples is shorter than one frame of " + std::to_string(cfg.fft_size));
  }
  Spectrogram s;
  s.config = cfg;
  s.frames = frame_count(y.size(), cfg);
  s.bins = cfg.fft_size / 2 + 1;
  s.magnitude.resize(s.frames * s.bins);
  const RealFft fft(cfg.fft_size);
  const auto window = make_window(cfg.window, cfg.fft_size);
  std::vector<double> frame(cfg.fft_size);
  std::vector<std::complex<double>> spec(s.bins);
  for (std::size_t f = 0; f < s.frames; ++f) {
    const std::size_t start = f * cfg.hop;
    for (std::size_t i = 0; i < cfg.fft_size; ++i) frame[i] = window[i] * y[start + i];
    fft.forward(frame, spec);
    for (std::size_t b = 0; b < s.bins; ++b) s.magnitude[f * s.bins + b] = std::abs(spec[b]);
  }
  return s;
}

StftLossTerms stft_loss_terms(const Waveform& y, const Waveform& yhat, const StftConfig& cfg) {
  require_same_length(y, yhat, "stft_loss");
  const Spectrogram ref = stft_magnitude(y, cfg);
  const Spectrogram est = stft_magnitude(yhat, cfg);
  double diff_sq = 0.0;
  double ref_sq = 0.0;
  double log_l1 = 0.0;
  for (std::size_t i = 0; i < ref.magnitude.size(); ++i) {
    const double a = ref.magnitude[i];
    const double b = est.magnitude[i];
    diff_sq += (a - b) * (a - b);
    ref_sq += a * a;
    log_l1 += std::fabs(std::log(std::max(a, kLogFloor)) - std::log(std::max(b, kLogFloor)));
  }
  if (ref_sq == 0.0) throw ValidationError("stft_loss: reference spectrum is identically zero");
  StftLossTerms t;
  t.spectral_convergence = std::sqrt(diff_sq) / std::sqrt(ref_sq);
  t.log_magnitude = log_l1 / static_cast<double>(ref.magnitude.size());
  return t;
}

double stft_loss(const Waveform& y, const Waveform& yhat, const StftConfig& cfg) {
  return stft_loss_terms(y, yhat, cfg).total();
}

std::array<StftConfig, 3> default_resolutions() {
  return {StftConfig{512, 128, Window::Hann}, StftConfig{1024, 256, Window::Hann},
          StftConfig{2048, 512, Window::Hann}};
}

double multi_res_stft_loss(const Waveform& y, const Waveform& yhat) {
  double sum = 0.0;
  for (const auto& cfg : default_resolutions()) sum += stft_loss(y, yhat, cfg);
  return sum;
}

double l1_distance(const Waveform& y, const Waveform& yhat) {
  require_same_length(y, yhat, "l1_distance");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sum += std::fabs(static_cast<double>(y[i]) - static_cast<double>(yhat[i]));
  }
  return sum;
}

CompositeLossTerms composite_loss_terms(const Waveform& y, const Waveform& yhat) {
  require_same_length(y, yhat, "composite_loss");
  CompositeLossTerms t;
  t.length = y.size();
  t.l1 = l1_distance(y, yhat);
  t.multi_res = multi_res_stft_loss(y, yhat);
  return t;
}

double composite_loss(const Waveform& y, const Waveform& yhat) {
  return composite_loss_terms(y, yhat).total();
}

}  // namespace declip::spectral
