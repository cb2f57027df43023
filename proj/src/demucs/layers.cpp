// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "layers.hpp"

#include <cmath>
#include <string>

namespace declip::demucs::detail {

namespace {

const Tensor& get(const WeightStore& w, const std::string& name) { return *w.find(name); }

float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

}  // namespace

Mat ConvLayer::apply(const Mat& x, long x_begin, long t0, long count) const {
  Mat cols(static_cast<long>(kernel) * cin, count);
  for (long j = 0; j < count; ++j) {
    const long start = stride * (t0 + j) - x_begin;
    for (int k = 0; k < kernel; ++k) cols.block(static_cast<long>(k) * cin, j, cin, 1) = x.col(start + k);
  }
  Mat out = weight * cols;
  out.colwise() += bias;
  relu_inplace(out);
  return out;
}

Mat GluLayer::apply(const Mat& x) const {
  Mat y = weight * x;
  y.colwise() += bias;
  Mat out(channels, x.cols());
  for (long j = 0; j < x.cols(); ++j) {
    for (int c = 0; c < channels; ++c) out(c, j) = y(c, j) * sigmoid(y(c + channels, j));
  }
  return out;
}

Mat LstmLayer::run(const Mat& x, Vec& h, Vec& c) const {
  Mat gates_in = w_ih * x;
  gates_in.colwise() += bias;
  Mat out(hidden, x.cols());
  Vec g(4 * hidden);
  for (long t = 0; t < x.cols(); ++t) {
    g.noalias() = w_hh * h;
    g += gates_in.col(t);
    for (int i = 0; i < hidden; ++i) {
      const float ig = sigmoid(g(i));
      const float fg = sigmoid(g(hidden + i));
      const float gg = std::tanh(g(2 * hidden + i));
      const float og = sigmoid(g(3 * hidden + i));
      c(i) = fg * c(i) + ig * gg;
      h(i) = og * std::tanh(c(i));
    }
    out.col(t) = h;
  }
  return out;
}

Network build_network(const DemucsConfig& cfg, const WeightStore& w) {
  Network net;
  net.cfg = cfg;
  net.kernel = resample::make_halfband_kernel(cfg.resampler_zeros);
  const int K = cfg.kernel;
  for (int l = 1; l <= cfg.depth; ++l) {
    const std::string p = "encoder." + std::to_string(l - 1) + ".";
    ConvLayer conv;
    conv.cin = l == 1 ? 1 : cfg.channels(l - 1);
    conv.cout = cfg.channels(l);
    conv.kernel = K;
    conv.stride = cfg.stride;
    const auto& wt = get(w, p + "0.weight");  // [cout, cin, K]
    conv.weight.resize(conv.cout, static_cast<long>(K) * conv.cin);
    for (int co = 0; co < conv.cout; ++co)
      for (int ci = 0; ci < conv.cin; ++ci)
        for (int k = 0; k < K; ++k)
          conv.weight(co, static_cast<long>(k) * conv.cin + ci) =
              wt.values[(static_cast<std::size_t>(co) * conv.cin + ci) * K + k];
    conv.bias = Eigen::Map<const Vec>(get(w, p + "0.bias").values.data(), conv.cout);
    net.enc_conv.push_back(std::move(conv));

    GluLayer glu;
    glu.channels = cfg.channels(l);
    glu.weight = Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        get(w, p + "2.weight").values.data(), 2 * glu.channels, glu.channels);
    glu.bias = Eigen::Map<const Vec>(get(w, p + "2.bias").values.data(), 2 * glu.channels);
    net.enc_glu.push_back(std::move(glu));
  }
  using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const int H = cfg.lstm_hidden();
  for (int k = 0; k < cfg.lstm_layers; ++k) {
    const std::string s = std::to_string(k);
    LstmLayer layer;
    layer.hidden = H;
    layer.w_ih = Eigen::Map<const RowMat>(get(w, "lstm.lstm.weight_ih_l" + s).values.data(), 4 * H, H);
    layer.w_hh = Eigen::Map<const RowMat>(get(w, "lstm.lstm.weight_hh_l" + s).values.data(), 4 * H, H);
    layer.bias = Eigen::Map<const Vec>(get(w, "lstm.lstm.bias_ih_l" + s).values.data(), 4 * H) +
                 Eigen::Map<const Vec>(get(w, "lstm.lstm.bias_hh_l" + s).values.data(), 4 * H);
    net.lstm.push_back(std::move(layer));
  }
  net.dec_glu.resize(cfg.depth);
  net.dec_convt.resize(cfg.depth);
  for (int j = 0; j < cfg.depth; ++j) {
    const int level = cfg.depth - j;
    const std::string p = "decoder." + std::to_string(j) + ".";
    GluLayer glu;
    glu.channels = cfg.channels(level);
    glu.weight = Eigen::Map<const RowMat>(get(w, p + "0.weight").values.data(), 2 * glu.channels, glu.channels);
    glu.bias = Eigen::Map<const Vec>(get(w, p + "0.bias").values.data(), 2 * glu.channels);
    net.dec_glu[level - 1] = std::move(glu);

    ConvTransposeLayer ct;
    ct.cin = cfg.channels(level);
    ct.cout = level == 1 ? 1 : cfg.channels(level - 1);
    ct.kernel = K;
    ct.stride = cfg.stride;
    ct.relu = level != 1;
    const auto& wt = get(w, p + "2.weight");  // [cin, cout, K]
    ct.weight.resize(static_cast<long>(K) * ct.cout, ct.cin);
    for (int ci = 0; ci < ct.cin; ++ci)
      for (int co = 0; co < ct.cout; ++co)
        for (int k = 0; k < K; ++k)
          ct.weight(static_cast<long>(k) * ct.cout + co, ci) =
              wt.values[(static_cast<std::size_t>(ci) * ct.cout + co) * K + k];
    ct.bias = Eigen::Map<const Vec>(get(w, p + "2.bias").values.data(), ct.cout);
    net.dec_convt[level - 1] = std::move(ct);
  }
  return net;
}

}  // namespace declip::demucs::detail
