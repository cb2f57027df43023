// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Analysis-sparsity declipper (A-SPADE): per-frame ADMM with a growing
// sparsity budget, clipping-consistency projection, and overlap-add.

#pragma once

#include <complex>
#include <span>
#include <vector>

#include "declip/clipping.hpp"
#include "declip/spectral.hpp"
#include "declip/waveform.hpp"

namespace declip::aspade {

struct AspadeConfig {
  int frame_len = 1024;
  int hop = 256;
  spectral::Window window = spectral::Window::Hann;  // synthesis window
  int sparsity_step = 1;      // s
  int relaxation_period = 1;  // r, iterations between budget increases
  double tolerance = 0.1;     // on ||Ax - z||_2
  int max_iters = 1024;
  int jobs = 1;  // worker threads over frames; results do not depend on it

  void validate() const;
};

struct FrameProblem {
  std::span<const double> observed;
  std::span<const ClipLabel> mask;
  double theta = 1.0;
};

struct IterationRecord {
  int sparsity = 0;
  double residual = 0.0;
};

struct FrameResult {
  std::vector<double> x;
  int iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> trace;  // filled only when requested
};

struct DeclipResult {
  Waveform restored;
  std::vector<int> iterations;  // per frame
  std::vector<bool> converged;  // per frame
};

/// Reliable entries take the observed value; clipped entries are pushed to the
/// feasible side of +-theta.
void project_consistency(std::span<double> x, std::span<const double> observed,
                         std::span<const ClipLabel> mask, double theta);

/// Keeps the k largest-magnitude entries (lower index wins ties), zeroes the rest.
void hard_threshold_topk(std::span<std::complex<double>> z, std::size_t k);

/// Same rule on the half-spectrum of a real signal: every bin stands for itself
/// and its conjugate mirror, so pairs are kept or dropped together.
void hard_threshold_topk_half(std::span<std::complex<double>> half, std::size_t k);

[[nodiscard]] FrameResult declip_frame(const FrameProblem& p, const AspadeConfig& cfg,
                                       bool record_trace = false);

[[nodiscard]] DeclipResult declip(const Waveform& x, const ClipMask& mask, ClipThreshold theta,
                                  const AspadeConfig& cfg = {});

}  // namespace declip::aspade
