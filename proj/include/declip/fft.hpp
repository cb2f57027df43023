// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace declip {

/// Real-to-complex DFT of a fixed size, backed by FFTW. Unnormalized in both
/// directions. Instances are cheap to copy; plans are shared process-wide.
class RealFft {
 public:
  explicit RealFft(std::size_t n);

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] std::size_t bins() const noexcept { return n_ / 2 + 1; }

  // in: n reals, out: n/2+1 bins.
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  // in: n/2+1 bins (treated as Hermitian half-spectrum), out: n reals, scaled by n.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

 private:
  struct Plans;
  std::size_t n_;
  std::shared_ptr<const Plans> plans_;
};

}  // namespace declip
