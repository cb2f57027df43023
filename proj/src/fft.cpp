// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "declip/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

#include "declip/errors.hpp"

namespace declip {

struct RealFft::Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  ~Plans() {
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
  }
};

namespace {

// FFTW's planner is not reentrant; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n == 0) throw ValidationError("RealFft: size must be positive");
  static std::map<std::size_t, std::shared_ptr<const Plans>> cache;
  std::lock_guard lock(planner_mutex());
  if (auto it = cache.find(n); it != cache.end()) {
    plans_ = it->second;
    return;
  }
  auto p = std::make_shared<Plans>();
  std::vector<double> re(n);
  std::vector<fftw_complex> cx(n / 2 + 1);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  p->forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), re.data(), cx.data(), flags);
  p->inverse = fftw_plan_dft_c2r_1d(static_cast<int>(n), cx.data(), re.data(), flags);
  if (!p->forward || !p->inverse) throw std::runtime_error("RealFft: FFTW planning failed");
  cache.emplace(n, p);
  plans_ = std::move(p);
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  if (in.size() != n_ || out.size() != bins()) throw ValidationError("RealFft::forward: size mismatch");
  // r2c does not modify its input.
  fftw_execute_dft_r2c(plans_->forward, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
  if (in.size() != bins() || out.size() != n_) throw ValidationError("RealFft::inverse: size mismatch");
  // c2r overwrites its input.
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(plans_->inverse, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
}

}  // namespace declip
