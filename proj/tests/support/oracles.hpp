// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Independent brute-force reference computations used by the tests. Nothing
// here calls into the library's numerical code paths.

#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "declip/demucs/config.hpp"
#include "declip/demucs/weights.hpp"

namespace oracle {

/// Direct O(n^2) DFT bins 0..n/2 of a real frame.
std::vector<std::complex<double>> dft_half(const std::vector<double>& frame);

std::vector<double> hann(std::size_t n);  // periodic

/// frames x (n/2+1) magnitudes, no centering, Hann or rectangular.
std::vector<std::vector<double>> stft_mag(const std::vector<float>& x, std::size_t fft, std::size_t hop,
                                          bool rectangular = false);

/// Spectral convergence + mean absolute log-magnitude difference (floor 1e-7).
double stft_loss(const std::vector<float>& y, const std::vector<float>& yhat, std::size_t fft, std::size_t hop);
double multi_res(const std::vector<float>& y, const std::vector<float>& yhat);
double composite(const std::vector<float>& y, const std::vector<float>& yhat);

/// Kaiser-windowed sinc half-band taps, 2*zeros of them, summing to one.
std::vector<double> halfband(int zeros, double beta);

/// Receptive field arithmetic recomputed from the layer definitions.
long alignment_delay(const declip::demucs::DemucsConfig& cfg);

/// Plain loop, double precision generator forward pass straight from the
/// tensor store. Output i is aligned with input i.
std::vector<double> demucs_forward(const declip::demucs::DemucsConfig& cfg, const declip::demucs::WeightStore& w,
                                   const std::vector<float>& x);

/// Per-layer MAC counts in the same order the engine reports them.
std::vector<double> mac_table(const declip::demucs::DemucsConfig& cfg);

/// One-sample Kolmogorov-Smirnov statistic against U[lo, hi].
double ks_uniform(std::vector<double> v, double lo, double hi);
/// Asymptotic critical value for alpha = 0.01.
double ks_critical_001(std::size_t n);

}  // namespace oracle
