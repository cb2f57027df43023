// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "declip/aspade.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include "declip/errors.hpp"
#include "declip/fft.hpp"

namespace declip::aspade {

void AspadeConfig::validate() const {
  if (frame_len < 2 || frame_len % 2 != 0) throw ValidationError("aspade: frame_len must be even and >= 2");
  if (hop < 1 || frame_len % hop != 0) throw ValidationError("aspade: hop must divide frame_len");
  if (sparsity_step < 1 || relaxation_period < 1) {
    throw ValidationError("aspade: sparsity step and relaxation period must be >= 1");
  }
  if (!(tolerance >= 0.0)) throw ValidationError("aspade: tolerance must be >= 0");
  if (max_iters < 1) throw ValidationError("aspade: max_iters must be >= 1");
  if (jobs < 1) throw ValidationError("aspade: jobs must be >= 1");
}

void project_consistency(std::span<double> x, std::span<const double> observed,
                         std::span<const ClipLabel> mask, double theta) {
  if (x.size() != observed.size() || x.size() != mask.size()) {
    throw ValidationError("project_consistency: length mismatch");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    switch (mask[i]) {
      case ClipLabel::Reliable: x[i] = observed[i]; break;
      case ClipLabel::ClippedHigh: x[i] = std::max(x[i], theta); break;
      case ClipLabel::ClippedLow: x[i] = std::min(x[i], -theta); break;
    }
  }
}

void hard_threshold_topk(std::span<std::complex<double>> z, std::size_t k) {
  if (k >= z.size()) return;
  std::vector<std::size_t> order(z.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Equal magnitudes rank by index, so the lower index is kept.
  std::nth_element(order.begin(), order.begin() + static_cast<long>(k), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const double ma = std::norm(z[a]);
                     const double mb = std::norm(z[b]);
                     return ma > mb || (ma == mb && a < b);
                   });
  std::vector<char> keep(z.size(), 0);
  for (std::size_t i = 0; i < k; ++i) keep[order[i]] = 1;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!keep[i]) z[i] = 0.0;
  }
}

void hard_threshold_topk_half(std::span<std::complex<double>> half, std::size_t k) {
  hard_threshold_topk(half, k);
}

namespace {

// Norm of a full Hermitian spectrum from its half (n even).
double half_norm(std::span<const std::complex<double>> h) {
  const std::size_t last = h.size() - 1;
  double e = std::norm(h[0]) + std::norm(h[last]);
  for (std::size_t i = 1; i < last; ++i) e += 2.0 * std::norm(h[i]);
  return std::sqrt(e);
}

bool any_clipped(std::span<const ClipLabel> m) {
  return std::any_of(m.begin(), m.end(), [](ClipLabel l) { return l != ClipLabel::Reliable; });
}

}  // namespace

FrameResult declip_frame(const FrameProblem& p, const AspadeConfig& cfg, bool record_trace) {
  cfg.validate();
  const std::size_t n = p.observed.size();
  if (p.mask.size() != n) throw ValidationError("declip_frame: mask length differs from frame");
  if (n < 2 || n % 2 != 0) throw ValidationError("declip_frame: frame length must be even");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(p.observed[i])) throw ValidationError("declip_frame: non-finite sample");
    if (p.mask[i] == ClipLabel::Reliable && std::fabs(p.observed[i]) > p.theta) {
      throw ValidationError("declip_frame: reliable sample " + std::to_string(i) + " exceeds theta");
    }
  }

  FrameResult r;
  r.x.assign(p.observed.begin(), p.observed.end());
  if (!any_clipped(p.mask)) {
    r.iterations = 1;
    r.converged = true;
    return r;
  }

  const RealFft fft(n);
  const std::size_t bins = fft.bins();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));  // unitary analysis
  auto analyze = [&](std::span<const double> x, std::span<std::complex<double>> out) {
    fft.forward(x, out);
    for (auto& c : out) c *= scale;
  };

  std::vector<std::complex<double>> ax(bins), z(bins), u(bins, 0.0), v(bins);
  std::vector<double> time(n);
  analyze(r.x, ax);
  std::size_t k = static_cast<std::size_t>(cfg.sparsity_step);

  for (int it = 1; it <= cfg.max_iters; ++it) {
    for (std::size_t b = 0; b < bins; ++b) z[b] = ax[b] + u[b];
    hard_threshold_topk_half(z, k);

    for (std::size_t b = 0; b < bins; ++b) v[b] = z[b] - u[b];
    fft.inverse(v, time);
    for (std::size_t i = 0; i < n; ++i) r.x[i] = time[i] * scale;
    project_consistency(r.x, p.observed, p.mask, p.theta);

    analyze(r.x, ax);
    for (std::size_t b = 0; b < bins; ++b) v[b] = ax[b] - z[b];
    const double residual = half_norm(v);
    if (record_trace) r.trace.push_back({static_cast<int>(k), residual});
    r.iterations = it;
    if (residual <= cfg.tolerance) {
      r.converged = true;
      break;
    }
    for (std::size_t b = 0; b < bins; ++b) u[b] += v[b];
    if (it % cfg.relaxation_period == 0) k += static_cast<std::size_t>(cfg.sparsity_step);
  }
  return r;
}

DeclipResult declip(const Waveform& x, const ClipMask& mask, ClipThreshold theta, const AspadeConfig& cfg) {
  cfg.validate();
  require_nonempty(x, "aspade::declip");
  require_finite(x.view(), "aspade::declip");
  if (mask.size() != x.size()) throw ValidationError("aspade::declip: mask length differs from signal");

  const long n = static_cast<long>(x.size());
  const long len = cfg.frame_len;
  const long hop = cfg.hop;
  const long lead = len - hop;
  const long frames = (lead + n + hop - 1) / hop;  // frame f covers padded [f*hop, f*hop + len)
  const long padded = (frames - 1) * hop + len;

  std::vector<double> obs(static_cast<std::size_t>(padded), 0.0);
  std::vector<ClipLabel> labels(static_cast<std::size_t>(padded), ClipLabel::Reliable);
  for (long i = 0; i < n; ++i) {
    obs[lead + i] = x[i];
    labels[lead + i] = mask[i];
  }
  const double t = theta.value();
  const auto window = spectral::make_window(cfg.window, static_cast<std::size_t>(len));

  DeclipResult res;
  res.iterations.assign(static_cast<std::size_t>(frames), 0);
  res.converged.assign(static_cast<std::size_t>(frames), false);
  std::vector<double> acc(static_cast<std::size_t>(padded), 0.0);
  std::vector<double> wsum(static_cast<std::size_t>(padded), 0.0);

  // Frames are solved in batches; each batch is combined in frame order so the
  // sum is identical for any number of workers.
  const long batch = 64L * cfg.jobs;
  std::vector<std::vector<double>> solved(static_cast<std::size_t>(batch));
  for (long f0 = 0; f0 < frames; f0 += batch) {
    const long count = std::min(batch, frames - f0);
    std::atomic<long> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
      for (long j; (j = next.fetch_add(1)) < count;) {
        const long f = f0 + j;
        try {
          FrameProblem fp{std::span<const double>(obs).subspan(f * hop, len),
                          std::span<const ClipLabel>(labels).subspan(f * hop, len), t};
          auto fr = declip_frame(fp, cfg);
          solved[j] = std::move(fr.x);
          res.iterations[f] = fr.iterations;
          res.converged[f] = fr.converged;
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    const int workers = static_cast<int>(std::min<long>(cfg.jobs, count));
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);

    for (long j = 0; j < count; ++j) {
      const long base = (f0 + j) * hop;
      for (long i = 0; i < len; ++i) {
        acc[base + i] += window[i] * solved[j][i];
        wsum[base + i] += window[i];
      }
    }
  }

  std::vector<double> out(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const double w = wsum[lead + i];
    out[i] = w > 0.0 ? acc[lead + i] / w : obs[lead + i];
  }
  std::vector<double> observed(x.samples.begin(), x.samples.end());
  project_consistency(out, observed, mask.labels, t);

  res.restored.sample_rate = x.sample_rate;
  res.restored.samples.resize(x.size());
  for (long i = 0; i < n; ++i) {
    res.restored[i] = mask[i] == ClipLabel::Reliable ? x[i] : static_cast<float>(out[i]);
  }
  return res;
}

}  // namespace declip::aspade
