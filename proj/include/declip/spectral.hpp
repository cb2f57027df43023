// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "declip/waveform.hpp"

namespace declip::spectral {

enum class Window { Hann, Rectangular };

struct StftConfig {
  std::size_t fft_size = 1024;
  std::size_t hop = 256;
  Window window = Window::Hann;

  // hop in [1, fft_size], fft_size a power of two.
  void validate() const;
};

/// Periodic window of length n (Hann: 0.5 - 0.5 cos(2 pi i / n)).
[[nodiscard]] std::vector<double> make_window(Window w, std::size_t n);

/// Magnitudes, frames x (fft_size/2 + 1), row-major. No centered padding.
struct Spectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<double> magnitude;
  StftConfig config;

  [[nodiscard]] double at(std::size_t frame, std::size_t bin) const {
    return magnitude[frame * bins + bin];
  }
};

[[nodiscard]] std::size_t frame_count(std::size_t length, const StftConfig& cfg);
[[nodiscard]] Spectrogram stft_magnitude(const Waveform& y, const StftConfig& cfg);

inline constexpr double kLogFloor = 1e-7;

struct StftLossTerms {
  double spectral_convergence = 0.0;  // ||  |Y| - |Yhat|  ||_F / || |Y| ||_F
  double log_magnitude = 0.0;         // mean over elements of |log|Y| - log|Yhat||
  [[nodiscard]] double total() const noexcept { return spectral_convergence + log_magnitude; }
};

[[nodiscard]] StftLossTerms stft_loss_terms(const Waveform& y, const Waveform& yhat,
                                            const StftConfig& cfg);
[[nodiscard]] double stft_loss(const Waveform& y, const Waveform& yhat, const StftConfig& cfg);

/// FFT sizes 512/1024/2048 with hop fft/4 and Hann windows.
[[nodiscard]] std::array<StftConfig, 3> default_resolutions();
[[nodiscard]] double multi_res_stft_loss(const Waveform& y, const Waveform& yhat);

struct CompositeLossTerms {
  double l1 = 0.0;         // sum |y - yhat|
  double multi_res = 0.0;  // sum of the three stft losses
  std::size_t length = 0;
  [[nodiscard]] double total() const noexcept {
    return (l1 + multi_res) / static_cast<double>(length);
  }
};

[[nodiscard]] double l1_distance(const Waveform& y, const Waveform& yhat);
[[nodiscard]] CompositeLossTerms composite_loss_terms(const Waveform& y, const Waveform& yhat);
/// (1/T) * (||y - yhat||_1 + multi-resolution STFT loss).
[[nodiscard]] double composite_loss(const Waveform& y, const Waveform& yhat);

}  // namespace declip::spectral
