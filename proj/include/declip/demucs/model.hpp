// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "declip/demucs/config.hpp"
#include "declip/demucs/weights.hpp"
#include "declip/errors.hpp"
#include "declip/waveform.hpp"

namespace declip::demucs {

namespace detail {
struct Network;
}

/// Thrown by DemucsModel::create; lists every inventory problem found.
class WeightValidationError : public ValidationError {
 public:
  explicit WeightValidationError(std::vector<std::string> issues);
  [[nodiscard]] const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// All mismatches between `w` and the inventory `cfg` requires: missing, extra,
/// duplicate, wrong shape, non-finite values, and a meta.config that disagrees.
[[nodiscard]] std::vector<std::string> weight_issues(const DemucsConfig& cfg, const WeightStore& w);

/// Validated, immutable generator. Copies share the underlying parameters.
class DemucsModel {
 public:
  [[nodiscard]] static DemucsModel create(const DemucsConfig& cfg, const WeightStore& w);
  /// Reads the config from the file's meta.config tensor.
  [[nodiscard]] static DemucsModel load(const std::filesystem::path& path);

  [[nodiscard]] const DemucsConfig& config() const noexcept;

  /// Whole-signal forward pass. Output length equals input length; output
  /// sample i is aligned with input sample i.
  [[nodiscard]] Waveform forward(const Waveform& x) const;

  [[nodiscard]] std::shared_ptr<const detail::Network> network() const noexcept { return net_; }

 private:
  explicit DemucsModel(std::shared_ptr<const detail::Network> net) : net_(std::move(net)) {}
  std::shared_ptr<const detail::Network> net_;
};

}  // namespace declip::demucs
