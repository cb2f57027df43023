// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "declip/demucs/model.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "declip/demucs/dependency.hpp"
#include "layers.hpp"

namespace declip::demucs {

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += "\n  " + x;
  return s;
}

std::string shape_str(const std::vector<std::uint32_t>& s) {
  std::ostringstream o;
  o << "[";
  for (std::size_t i = 0; i < s.size(); ++i) o << (i ? ", " : "") << s[i];
  o << "]";
  return o.str();
}

}  // namespace

WeightValidationError::WeightValidationError(std::vector<std::string> issues)
    : ValidationError("weight validation failed:" + join(issues)), issues_(std::move(issues)) {}

std::vector<std::string> weight_issues(const DemucsConfig& cfg, const WeightStore& w) {
  std::vector<std::string> issues;
  const auto inventory = expected_inventory(cfg);
  std::map<std::string, const std::vector<std::uint32_t>*> expected;
  for (const auto& [name, shape] : inventory) expected.emplace(name, &shape);

  std::map<std::string, int> seen;
  for (const auto& [name, t] : w.tensors()) {
    if (++seen[name] == 2) issues.push_back("duplicate tensor '" + name + "'");
    const auto it = expected.find(name);
    if (it == expected.end()) {
      issues.push_back("unexpected tensor '" + name + "'");
      continue;
    }
    if (t.shape != *it->second) {
      issues.push_back("shape mismatch for '" + name + "': expected " + shape_str(*it->second) +
                       ", got " + shape_str(t.shape));
      continue;
    }
    if (t.values.size() != t.numel()) {
      issues.push_back("payload size mismatch for '" + name + "'");
      continue;
    }
    for (std::size_t i = 0; i < t.values.size(); ++i) {
      if (!std::isfinite(t.values[i])) {
        issues.push_back("non-finite value in '" + name + "' at flat index " + std::to_string(i));
        break;
      }
    }
  }
  for (const auto& [name, shape] : inventory) {
    if (!seen.contains(name)) issues.push_back("missing tensor '" + name + "'");
  }
  if (const auto* meta = w.find("meta.config");
      meta && meta->shape == *expected.at("meta.config") && meta->values != cfg.to_meta()) {
    issues.push_back("meta.config does not match the requested configuration");
  }
  return issues;
}

DemucsModel DemucsModel::create(const DemucsConfig& cfg, const WeightStore& w) {
  cfg.validate();
  if (auto issues = weight_issues(cfg, w); !issues.empty()) throw WeightValidationError(std::move(issues));
  return DemucsModel(std::make_shared<const detail::Network>(detail::build_network(cfg, w)));
}

DemucsModel DemucsModel::load(const std::filesystem::path& path) {
  const WeightStore w = read_weights(path);
  const Tensor* meta = w.find("meta.config");
  if (!meta) throw WeightValidationError({"missing tensor 'meta.config'"});
  return create(DemucsConfig::from_meta(meta->values), w);
}

const DemucsConfig& DemucsModel::config() const noexcept { return net_->cfg; }

Waveform DemucsModel::forward(const Waveform& x) const {
  using detail::Mat;
  using detail::Vec;
  const auto& cfg = net_->cfg;
  require_nonempty(x, "forward_offline");
  require_finite(x.view(), "forward_offline");
  if (x.sample_rate != cfg.sample_rate) {
    throw ValidationError("forward_offline: expected " + std::to_string(cfg.sample_rate) +
                          " Hz input, got " + std::to_string(x.sample_rate));
  }
  const long n = static_cast<long>(x.size());
  const FramePlan plan = plan_offline(cfg, n);

  float scale = 1.0f;
  if (cfg.normalize) {
    double mean = 0.0;
    for (float v : x.samples) mean += v;
    mean /= n;
    double var = 0.0;
    for (float v : x.samples) var += (v - mean) * (v - mean);
    const double stdev = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    scale = static_cast<float>(kNormalizeFloor + stdev);
  }

  std::vector<float> padded(static_cast<std::size_t>(plan.padded_length), 0.0f);
  for (long i = 0; i < n; ++i) padded[plan.delay + i] = x[i] / scale;

  std::vector<float> up = std::move(padded);
  for (int s = 0; s < cfg.resample_stages(); ++s) up = resample::upsample2(up, net_->kernel);

  // Encoder.
  std::vector<Mat> skips;
  Mat h = Eigen::Map<const Eigen::RowVectorXf>(up.data(), plan.layer_lengths[0]);
  for (int l = 1; l <= cfg.depth; ++l) {
    Mat conv = net_->enc_conv[l - 1].apply(h, 0, 0, plan.layer_lengths[l]);
    h = net_->enc_glu[l - 1].apply(conv);
    skips.push_back(h);
  }

  // LSTM.
  for (const auto& layer : net_->lstm) {
    Vec hs = Vec::Zero(layer.hidden);
    Vec cs = Vec::Zero(layer.hidden);
    h = layer.run(h, hs, cs);
  }

  // Decoder.
  for (int l = cfg.depth; l >= 1; --l) {
    const Mat z = h + skips[l - 1];
    const Mat g = net_->dec_glu[l - 1].apply(z);
    const auto& ct = net_->dec_convt[l - 1];
    const Mat p = ct.taps(g);
    Mat out(ct.cout, (g.cols() - 1) * ct.stride + ct.kernel);
    out.colwise() = ct.bias;
    for (long t = 0; t < g.cols(); ++t) {
      for (int k = 0; k < ct.kernel; ++k) {
        out.col(ct.stride * t + k) += p.block(static_cast<long>(k) * ct.cout, t, ct.cout, 1);
      }
    }
    if (ct.relu) detail::relu_inplace(out);
    h = std::move(out);
  }

  std::vector<float> y(h.data(), h.data() + h.cols());
  for (int s = 0; s < cfg.resample_stages(); ++s) y = resample::downsample2(y, net_->kernel);

  Waveform out;
  out.sample_rate = x.sample_rate;
  out.samples.assign(y.begin(), y.begin() + n);
  if (cfg.normalize) {
    for (auto& v : out.samples) v *= scale;
  }
  return out;
}

}  // namespace declip::demucs
