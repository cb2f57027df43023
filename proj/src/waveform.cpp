// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "declip/waveform.hpp"

#include <cmath>
#include <string>

#include "declip/errors.hpp"

namespace declip {

void require_finite(std::span<const float> x, std::string_view what) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw ValidationError(std::string(what) + ": non-finite sample at index " +
                            std::to_string(i));
    }
  }
}

void require_nonempty(const Waveform& y, std::string_view what) {
  if (y.empty()) throw ValidationError(std::string(what) + ": empty waveform");
}

void require_same_length(const Waveform& a, const Waveform& b, std::string_view what) {
  if (a.size() != b.size()) {
    throw ValidationError(std::string(what) + ": length mismatch (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
  }
}

}  // namespace declip
