// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Streaming response-time / real-time-factor simulator. Samples arrive at the
// audio rate, are grouped by a buffering policy, and pass through a processor
// whose compute time is either declared (virtual clock) or measured (wall clock).

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "declip/demucs/stream.hpp"
#include "declip/waveform.hpp"

namespace declip::streamsim {

class BufferPolicy {
 public:
  enum class Kind { FixedBlock, FrameBuffered };

  static BufferPolicy fixed_block(long block_size);
  /// Frame buffering for a processor with the given hop and block lookahead.
  static BufferPolicy frame_buffered(int frames, long hop, long lookahead);
  static BufferPolicy frame_buffered(int frames, const demucs::DemucsConfig& cfg);

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] long block_size() const noexcept { return block_; }
  [[nodiscard]] int frames() const noexcept { return frames_; }
  [[nodiscard]] long hop() const noexcept { return hop_; }
  [[nodiscard]] long lookahead() const noexcept { return lookahead_; }

  /// Samples to collect before the first invocation, and per invocation after.
  [[nodiscard]] long first_chunk() const noexcept;
  [[nodiscard]] long chunk() const noexcept { return block_; }
  /// Input samples past the end of a block the processor must see before it
  /// can release that block.
  [[nodiscard]] long algorithmic_samples() const noexcept;
  /// Wait of input sample i until the end of its block, in samples.
  [[nodiscard]] long buffer_wait(long i) const noexcept;

  [[nodiscard]] std::string describe() const;

 private:
  BufferPolicy() = default;
  Kind kind_ = Kind::FixedBlock;
  long block_ = 1;
  int frames_ = 0;
  long hop_ = 0;
  long lookahead_ = 0;
};

/// Declared compute time of one invocation in seconds, given (input, output) lengths.
using CostModel = std::function<double(std::size_t, std::size_t)>;

[[nodiscard]] CostModel zero_cost();
[[nodiscard]] CostModel cost_per_invocation(double seconds);
[[nodiscard]] CostModel cost_per_sample(double seconds_per_input_sample);

class ProcessorUnderTest {
 public:
  virtual ~ProcessorUnderTest() = default;
  /// Consumes a buffered chunk; returns the output samples it releases.
  virtual std::vector<float> push(std::span<const float> chunk) = 0;
  /// End of stream: returns everything still held.
  virtual std::vector<float> flush() = 0;
  [[nodiscard]] virtual double declared_cost(std::size_t in, std::size_t out) const = 0;
  [[nodiscard]] virtual std::string name() const = 0;
};

/// Wraps a chunk-in, chunk-out callable; a length mismatch is a protocol error.
class BlockProcessor : public ProcessorUnderTest {
 public:
  using Fn = std::function<std::vector<float>(std::span<const float>)>;
  BlockProcessor(std::string name, Fn fn, CostModel cost = zero_cost());

  std::vector<float> push(std::span<const float> chunk) override;
  std::vector<float> flush() override { return {}; }
  [[nodiscard]] double declared_cost(std::size_t in, std::size_t out) const override;
  [[nodiscard]] std::string name() const override { return name_; }

 private:
  std::string name_;
  Fn fn_;
  CostModel cost_;
};

[[nodiscard]] std::unique_ptr<ProcessorUnderTest> identity_processor(CostModel cost = zero_cost());

/// The streaming generator behind the processor interface.
class EngineProcessor : public ProcessorUnderTest {
 public:
  EngineProcessor(demucs::DemucsModel model, int frames, CostModel cost = zero_cost());

  std::vector<float> push(std::span<const float> chunk) override { return stream_.push(chunk); }
  std::vector<float> flush() override { return stream_.flush(); }
  [[nodiscard]] double declared_cost(std::size_t in, std::size_t out) const override;
  [[nodiscard]] std::string name() const override;
  [[nodiscard]] const demucs::DemucsStream& stream() const noexcept { return stream_; }

 private:
  demucs::DemucsStream stream_;
  CostModel cost_;
};

enum class ClockMode { Virtual, Wall };

struct SimulationConfig {
  int rate_hz = 16000;
  double duration_s = 100.0;
  long probe_every = 500;  // probes samples probe_every-1, 2*probe_every-1, ...
  ClockMode mode = ClockMode::Virtual;
  std::uint64_t seed = 1;  // input noise when no signal is supplied
  const Waveform* input = nullptr;  // optional; must hold at least duration * rate samples
};

struct Probe {
  long index = 0;
  double latency_ms = 0.0;
  double compute_ms = 0.0;  // emit time minus the time the releasing chunk was complete

  bool operator==(const Probe&) const = default;
};

struct StreamReport {
  ClockMode mode = ClockMode::Virtual;
  int rate_hz = 16000;
  double duration_s = 0.0;
  std::string policy;
  std::string processor;
  double rtf = 0.0;
  double mean_response_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double max_ms = 0.0;
  std::vector<Probe> probes;  // probes released before end of stream
  long probes_at_end_of_stream = 0;  // released only by the final partial push / flush
  long samples_fed = 0;
  long samples_emitted = 0;
  bool realtime_capable = false;
  std::string cpu;

  bool operator==(const StreamReport&) const = default;
};

[[nodiscard]] StreamReport simulate(ProcessorUnderTest& p, const BufferPolicy& policy,
                                    const SimulationConfig& cfg = {});

[[nodiscard]] double rtf_offline(double corpus_duration_s, double measured_time_s);

struct LatencyBreakdown {
  double buffering_ms = 0.0;
  double compute_ms = 0.0;
  double algorithmic_ms = 0.0;
  [[nodiscard]] double total_ms() const { return buffering_ms + compute_ms + algorithmic_ms; }
};

[[nodiscard]] LatencyBreakdown latency_decomposition(const StreamReport& r, const BufferPolicy& policy);

/// Mean probe latency of a zero-cost processor, from block arithmetic alone.
[[nodiscard]] double analytic_mean_response_ms(const BufferPolicy& policy, const SimulationConfig& cfg);

[[nodiscard]] std::string report_to_json(const StreamReport& r, int indent = 2);
[[nodiscard]] StreamReport report_from_json(const std::string& text);
/// Schema problems of a serialized report; empty when valid.
[[nodiscard]] std::vector<std::string> validate_report_json(const std::string& text);

/// "model name" from /proc/cpuinfo, or "unknown".
[[nodiscard]] std::string cpu_identification();

}  // namespace declip::streamsim
