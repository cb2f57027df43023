// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Internal layer kernels shared by the offline and streaming forward passes.

#pragma once

#include <Eigen/Core>
#include <vector>

#include "declip/demucs/config.hpp"
#include "declip/demucs/weights.hpp"
#include "declip/resample.hpp"

namespace declip::demucs::detail {

using Mat = Eigen::MatrixXf;  // channels x time, column-major
using Vec = Eigen::VectorXf;

/// Strided 1-D convolution followed by ReLU.
struct ConvLayer {
  int cin = 0, cout = 0, kernel = 0, stride = 0;
  Mat weight;  // cout x (kernel * cin); column k * cin + ci
  Vec bias;

  // x holds input columns starting at absolute index x_begin; computes
  // output frames [t0, t0 + count) where frame t reads x[stride*t .. stride*t + kernel - 1].
  [[nodiscard]] Mat apply(const Mat& x, long x_begin, long t0, long count) const;
};

/// 1x1 convolution to 2c channels followed by a gated linear unit back to c.
struct GluLayer {
  int channels = 0;
  Mat weight;  // 2c x c
  Vec bias;

  [[nodiscard]] Mat apply(const Mat& x) const;
};

/// Transposed strided convolution; `taps` gives per-frame contributions to the
/// kernel output positions stride*t + k.
struct ConvTransposeLayer {
  int cin = 0, cout = 0, kernel = 0, stride = 0;
  bool relu = true;
  Mat weight;  // (kernel * cout) x cin; row k * cout + co
  Vec bias;

  [[nodiscard]] Mat taps(const Mat& g) const { return weight * g; }
};

/// Unidirectional LSTM layer (gate order i, f, g, o).
struct LstmLayer {
  int hidden = 0;
  Mat w_ih, w_hh;
  Vec bias;  // b_ih + b_hh

  // Runs over the columns of x, updating (h, c) in place.
  [[nodiscard]] Mat run(const Mat& x, Vec& h, Vec& c) const;
};

struct Network {
  DemucsConfig cfg;
  std::vector<ConvLayer> enc_conv;  // index level-1
  std::vector<GluLayer> enc_glu;
  std::vector<LstmLayer> lstm;
  std::vector<GluLayer> dec_glu;  // index level-1
  std::vector<ConvTransposeLayer> dec_convt;
  resample::HalfbandKernel kernel;
};

/// Assumes `w` has passed validation against `cfg`.
[[nodiscard]] Network build_network(const DemucsConfig& cfg, const WeightStore& w);

inline void relu_inplace(Mat& m) { m = m.cwiseMax(0.0f); }

}  // namespace declip::demucs::detail
