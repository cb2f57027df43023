// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "declip/demucs/stream.hpp"

#include <algorithm>
#include <cstring>
#include <optional>

#include "declip/demucs/dependency.hpp"
#include "layers.hpp"

namespace declip::demucs {

namespace {

using detail::Mat;
using detail::Vec;

/// Multi-channel columns indexed by absolute time, with cheap front trimming.
class TimeBuffer {
 public:
  explicit TimeBuffer(int channels, long begin = 0) : channels_(channels), begin_(begin) {}

  [[nodiscard]] long begin() const noexcept { return begin_; }
  [[nodiscard]] long end() const noexcept { return begin_ + size_; }
  [[nodiscard]] long size() const noexcept { return size_; }

  void append(const Mat& cols) {
    const long add = cols.cols();
    reserve(size_ + add);
    std::memcpy(data_.data() + size_ * channels_, cols.data(), sizeof(float) * add * channels_);
    size_ += add;
  }

  void append_zeros(long n) {
    reserve(size_ + n);
    std::fill_n(data_.data() + size_ * channels_, n * channels_, 0.0f);
    size_ += n;
  }

  [[nodiscard]] float at(long t, int ch = 0) const { return data_[(t - begin_) * channels_ + ch]; }

  // Columns [from, end()) as a matrix view.
  [[nodiscard]] Eigen::Map<const Mat> view() const {
    return Eigen::Map<const Mat>(data_.data(), channels_, size_);
  }

  [[nodiscard]] Mat columns(long from, long n) const {
    return Eigen::Map<const Mat>(data_.data() + (from - begin_) * channels_, channels_, n);
  }

  void drop_before(long t) {
    const long drop = std::clamp(t - begin_, 0L, size_);
    if (drop == 0) return;
    std::memmove(data_.data(), data_.data() + drop * channels_, sizeof(float) * (size_ - drop) * channels_);
    size_ -= drop;
    begin_ += drop;
  }

 private:
  void reserve(long cols) {
    if (static_cast<std::size_t>(cols * channels_) > data_.size()) {
      data_.resize(std::max<std::size_t>(cols * channels_, data_.size() * 2));
    }
  }
  int channels_;
  long begin_;
  long size_ = 0;
  std::vector<float> data_;
};

class Upsample2Stage {
 public:
  explicit Upsample2Stage(const resample::HalfbandKernel& k) : kernel_(k), x_(1, -k.zeros) {
    x_.append_zeros(k.zeros);
  }

  void push(std::span<const float> in, std::vector<float>& out) {
    x_.append(Eigen::Map<const Mat>(in.data(), 1, static_cast<long>(in.size())));
    const int z = kernel_.zeros;
    while (upsample2_need(next_, z) < x_.end()) {
      const long n = next_ / 2;
      if (next_ % 2 == 0) {
        out.push_back(x_.at(n));
      } else {
        float acc = 0.0f;
        for (long j = 0; j < 2 * z; ++j) acc += kernel_.taps[j] * x_.at(n + 1 + j - z);
        out.push_back(acc);
      }
      ++next_;
    }
    x_.drop_before(next_ / 2 + 1 - z);
  }

 private:
  const resample::HalfbandKernel& kernel_;
  TimeBuffer x_;
  long next_ = 0;
};

class Downsample2Stage {
 public:
  explicit Downsample2Stage(const resample::HalfbandKernel& k) : kernel_(k), x_(1, -2 * k.zeros) {
    x_.append_zeros(2 * k.zeros);
  }

  void push(std::span<const float> in, std::vector<float>& out) {
    x_.append(Eigen::Map<const Mat>(in.data(), 1, static_cast<long>(in.size())));
    const int z = kernel_.zeros;
    while (downsample2_need(next_, z) < x_.end()) {
      float acc = 0.0f;
      for (long j = 0; j < 2 * z; ++j) acc += kernel_.taps[j] * x_.at(2 * (next_ + j - z) + 1);
      out.push_back(0.5f * (x_.at(2 * next_) + acc));
      ++next_;
    }
    x_.drop_before(2 * (next_ - z) + 1);
  }

 private:
  const resample::HalfbandKernel& kernel_;
  TimeBuffer x_;
  long next_ = 0;
};

class EncoderStage {
 public:
  EncoderStage(const detail::ConvLayer& conv, const detail::GluLayer& glu)
      : conv_(conv), glu_(glu), in_(conv.cin) {}

  // Returns the newly available output frames (channels x count).
  Mat push(const Mat& cols) {
    in_.append(cols);
    long count = 0;
    while (conv_.stride * (next_ + count) + conv_.kernel - 1 < in_.end()) ++count;
    if (count == 0) return Mat(glu_.channels, 0);
    Mat out = glu_.apply(conv_.apply(Mat(in_.view()), in_.begin(), next_, count));
    next_ += count;
    in_.drop_before(conv_.stride * next_);
    return out;
  }

 private:
  const detail::ConvLayer& conv_;
  const detail::GluLayer& glu_;
  TimeBuffer in_;
  long next_ = 0;
};

class LstmStage {
 public:
  explicit LstmStage(const std::vector<detail::LstmLayer>& layers) : layers_(layers) {
    for (const auto& l : layers) {
      h_.push_back(Vec::Zero(l.hidden));
      c_.push_back(Vec::Zero(l.hidden));
    }
  }

  Mat push(Mat x) {
    if (x.cols() == 0) return x;
    for (std::size_t k = 0; k < layers_.size(); ++k) x = layers_[k].run(x, h_[k], c_[k]);
    return x;
  }

 private:
  const std::vector<detail::LstmLayer>& layers_;
  std::vector<Vec> h_, c_;
};

class DecoderStage {
 public:
  DecoderStage(const detail::GluLayer& glu, const detail::ConvTransposeLayer& ct)
      : glu_(glu), ct_(ct), skip_(glu.channels), prev_(glu.channels), acc_(ct.cout, ct.kernel) {
    acc_.colwise() = ct_.bias;
  }

  void push_skip(const Mat& cols) { skip_.append(cols); }

  // Takes frames from the deeper level; returns finalized output columns.
  Mat push_prev(const Mat& cols) {
    prev_.append(cols);
    const long count = std::min(skip_.end(), prev_.end()) - next_;
    if (count <= 0) return Mat(ct_.cout, 0);
    const Mat z = prev_.columns(next_, count) + skip_.columns(next_, count);
    const Mat p = ct_.taps(glu_.apply(z));
    const int S = ct_.stride;
    const int K = ct_.kernel;
    Mat out(ct_.cout, count * S);
    for (long j = 0; j < count; ++j) {
      for (int k = 0; k < K; ++k) acc_.col(k) += p.block(static_cast<long>(k) * ct_.cout, j, ct_.cout, 1);
      out.middleCols(j * S, S) = acc_.leftCols(S);
      // Shift the overlap window by one frame; new columns start from the bias.
      for (int k = 0; k + S < K; ++k) acc_.col(k) = acc_.col(k + S);
      for (int k = K - S; k < K; ++k) acc_.col(k) = ct_.bias;
    }
    if (ct_.relu) detail::relu_inplace(out);
    next_ += count;
    skip_.drop_before(next_);
    prev_.drop_before(next_);
    return out;
  }

 private:
  const detail::GluLayer& glu_;
  const detail::ConvTransposeLayer& ct_;
  TimeBuffer skip_;
  TimeBuffer prev_;
  Mat acc_;  // partial sums for outputs [stride * next_, stride * next_ + kernel)
  long next_ = 0;
};

}  // namespace

struct DemucsStream::Impl {
  DemucsModel model;
  std::shared_ptr<const detail::Network> net;
  int frames;
  long block;
  long lookahead;

  std::vector<Upsample2Stage> up;
  std::vector<EncoderStage> enc;
  std::optional<LstmStage> lstm;
  std::vector<DecoderStage> dec;  // index level-1
  std::vector<Downsample2Stage> down;

  std::vector<float> ready;  // finalized outputs not yet emitted
  long produced = 0;
  long consumed = 0;
  long emitted = 0;
  bool finished = false;

  Impl(DemucsModel m, int buffer_frames)
      : model(std::move(m)), net(model.network()), frames(buffer_frames) {
    const auto& cfg = net->cfg;
    if (buffer_frames < 1) throw ValidationError("DemucsStream: buffer_frames must be >= 1");
    if (cfg.normalize) {
      throw ValidationError(
          "DemucsStream: input normalization uses whole-signal statistics and cannot stream");
    }
    block = cfg.hop() * buffer_frames;
    lookahead = lookahead_samples(cfg, buffer_frames);
    build();
  }

  void build() {
    const auto& cfg = net->cfg;
    up.clear();
    enc.clear();
    dec.clear();
    down.clear();
    for (int s = 0; s < cfg.resample_stages(); ++s) {
      up.emplace_back(net->kernel);
      down.emplace_back(net->kernel);
    }
    for (int l = 0; l < cfg.depth; ++l) enc.emplace_back(net->enc_conv[l], net->enc_glu[l]);
    lstm.emplace(net->lstm);
    for (int l = 0; l < cfg.depth; ++l) dec.emplace_back(net->dec_glu[l], net->dec_convt[l]);
    ready.clear();
    produced = consumed = emitted = 0;
    finished = false;
    run(std::vector<float>(static_cast<std::size_t>(cfg.alignment_delay()), 0.0f));
  }

  void run(std::vector<float> x) {
    for (auto& u : up) {
      std::vector<float> next;
      u.push(x, next);
      x = std::move(next);
    }
    Mat h = Eigen::Map<const Mat>(x.data(), 1, static_cast<long>(x.size()));
    for (std::size_t l = 0; l < enc.size(); ++l) {
      h = enc[l].push(h);
      dec[l].push_skip(h);
    }
    h = lstm->push(std::move(h));
    for (std::size_t l = dec.size(); l-- > 0;) h = dec[l].push_prev(h);
    std::vector<float> y(h.data(), h.data() + h.size());
    for (auto& d : down) {
      std::vector<float> next;
      d.push(y, next);
      y = std::move(next);
    }
    produced += static_cast<long>(y.size());
    ready.insert(ready.end(), y.begin(), y.end());
  }

  std::vector<float> take(long count) {
    std::vector<float> out(ready.begin(), ready.begin() + count);
    ready.erase(ready.begin(), ready.begin() + count);
    emitted += count;
    return out;
  }
};

DemucsStream::DemucsStream(DemucsModel model, int buffer_frames)
    : impl_(std::make_unique<Impl>(std::move(model), buffer_frames)) {}
DemucsStream::~DemucsStream() = default;
DemucsStream::DemucsStream(DemucsStream&&) noexcept = default;
DemucsStream& DemucsStream::operator=(DemucsStream&&) noexcept = default;

std::vector<float> DemucsStream::push(std::span<const float> chunk) {
  auto& s = *impl_;
  if (s.finished) throw StateError("DemucsStream::push after flush");
  require_finite(chunk, "DemucsStream::push");
  if (!chunk.empty()) {
    s.consumed += static_cast<long>(chunk.size());
    s.run(std::vector<float>(chunk.begin(), chunk.end()));
  }
  const long available = std::min(s.produced, s.consumed);
  const long releasable = (available / s.block) * s.block - s.emitted;
  return releasable > 0 ? s.take(releasable) : std::vector<float>{};
}

std::vector<float> DemucsStream::flush() {
  auto& s = *impl_;
  if (s.finished) throw StateError("DemucsStream::flush called twice");
  s.finished = true;
  const long n = s.consumed;
  if (n == 0) return {};
  const long tail = input_need(s.net->cfg, n - 1) + 1 - n;
  if (tail > 0) s.run(std::vector<float>(static_cast<std::size_t>(tail), 0.0f));
  if (s.produced < n) throw StateError("DemucsStream::flush: pipeline did not drain");
  return s.take(n - s.emitted);
}

void DemucsStream::reset() { impl_->build(); }

long DemucsStream::consumed() const noexcept { return impl_->consumed; }
long DemucsStream::emitted() const noexcept { return impl_->emitted; }
bool DemucsStream::finished() const noexcept { return impl_->finished; }
int DemucsStream::buffer_frames() const noexcept { return impl_->frames; }
long DemucsStream::block_size() const noexcept { return impl_->block; }
long DemucsStream::lookahead() const noexcept { return impl_->lookahead; }
const DemucsModel& DemucsStream::model() const noexcept { return impl_->model; }

long DemucsStream::samples_until_next_block() const noexcept {
  const auto& s = *impl_;
  const long next_end = s.emitted + s.block;
  const long need = std::max(input_need(s.net->cfg, next_end - 1) + 1, next_end);
  return std::max(0L, need - s.consumed);
}

}  // namespace declip::demucs
