// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "declip/streamsim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include <json.hpp>

#include "declip/demucs/dependency.hpp"
#include "declip/errors.hpp"

namespace declip::streamsim {

BufferPolicy BufferPolicy::fixed_block(long block_size) {
  if (block_size < 1) throw ValidationError("FixedBlock: block_size must be >= 1");
  BufferPolicy p;
  p.kind_ = Kind::FixedBlock;
  p.block_ = block_size;
  return p;
}

BufferPolicy BufferPolicy::frame_buffered(int frames, long hop, long lookahead) {
  if (frames < 1) throw ValidationError("FrameBuffered: frames must be >= 1");
  if (hop < 1) throw ValidationError("FrameBuffered: hop must be >= 1");
  const long block = hop * frames;
  if (lookahead < block - 1) throw ValidationError("FrameBuffered: lookahead shorter than one block");
  BufferPolicy p;
  p.kind_ = Kind::FrameBuffered;
  p.frames_ = frames;
  p.hop_ = hop;
  p.block_ = block;
  p.lookahead_ = lookahead;
  return p;
}

BufferPolicy BufferPolicy::frame_buffered(int frames, const demucs::DemucsConfig& cfg) {
  if (frames < 1) throw ValidationError("FrameBuffered: frames must be >= 1");
  return frame_buffered(frames, cfg.hop(), demucs::lookahead_samples(cfg, frames));
}

long BufferPolicy::first_chunk() const noexcept {
  return kind_ == Kind::FixedBlock ? block_ : lookahead_ + 1;
}

long BufferPolicy::algorithmic_samples() const noexcept {
  return kind_ == Kind::FixedBlock ? 0 : lookahead_ - block_ + 1;
}

long BufferPolicy::buffer_wait(long i) const noexcept { return (i / block_ + 1) * block_ - i; }

std::string BufferPolicy::describe() const {
  if (kind_ == Kind::FixedBlock) return "FixedBlock(" + std::to_string(block_) + ")";
  return "FrameBuffered(" + std::to_string(frames_) + ", hop=" + std::to_string(hop_) +
         ", lookahead=" + std::to_string(lookahead_) + ")";
}

CostModel zero_cost() {
  return [](std::size_t, std::size_t) { return 0.0; };
}

CostModel cost_per_invocation(double seconds) {
  if (!(seconds >= 0.0)) throw ValidationError("cost must be >= 0");
  return [seconds](std::size_t, std::size_t) { return seconds; };
}

CostModel cost_per_sample(double s) {
  if (!(s >= 0.0)) throw ValidationError("cost must be >= 0");
  return [s](std::size_t in, std::size_t) { return s * static_cast<double>(in); };
}

BlockProcessor::BlockProcessor(std::string name, Fn fn, CostModel cost)
    : name_(std::move(name)), fn_(std::move(fn)), cost_(std::move(cost)) {}

std::vector<float> BlockProcessor::push(std::span<const float> chunk) {
  auto out = fn_(chunk);
  if (out.size() != chunk.size()) {
    throw ProtocolError(name_ + ": returned " + std::to_string(out.size()) + " samples for a chunk of " +
                        std::to_string(chunk.size()));
  }
  return out;
}

double BlockProcessor::declared_cost(std::size_t in, std::size_t out) const { return cost_(in, out); }

std::unique_ptr<ProcessorUnderTest> identity_processor(CostModel cost) {
  return std::make_unique<BlockProcessor>(
      "identity", [](std::span<const float> c) { return std::vector<float>(c.begin(), c.end()); },
      std::move(cost));
}

EngineProcessor::EngineProcessor(demucs::DemucsModel model, int frames, CostModel cost)
    : stream_(std::move(model), frames), cost_(std::move(cost)) {}

double EngineProcessor::declared_cost(std::size_t in, std::size_t out) const { return cost_(in, out); }

std::string EngineProcessor::name() const {
  return "ddd-stream(frames=" + std::to_string(stream_.buffer_frames()) + ")";
}

namespace {

// One processor invocation as seen by the probe bookkeeping.
struct Emission {
  long first = 0;  // output index of the first released sample
  long count = 0;
  double trigger = 0.0;  // time the chunk was complete
  double emit = 0.0;
  bool end_of_stream = false;
};

class ProbeCollector {
 public:
  ProbeCollector(long every, int rate) : every_(every), rate_(rate) {}

  void record(const Emission& e) {
    // probe indices are every-1, 2*every-1, ...
    long k = (e.first + 1 + every_ - 1) / every_;
    for (long i = k * every_ - 1; i < e.first + e.count; i = (++k) * every_ - 1) {
      if (e.end_of_stream) {
        ++at_end_;
        continue;
      }
      const double arrival = static_cast<double>(i) / rate_;
      probes_.push_back({i, (e.emit - arrival) * 1e3, (e.emit - e.trigger) * 1e3});
    }
  }

  std::vector<Probe> take() { return std::move(probes_); }
  [[nodiscard]] long at_end() const noexcept { return at_end_; }

 private:
  long every_;
  int rate_;
  std::vector<Probe> probes_;
  long at_end_ = 0;
};

std::vector<float> make_input(const SimulationConfig& cfg, long n) {
  if (cfg.input) {
    if (static_cast<long>(cfg.input->size()) < n) throw ValidationError("simulate: input shorter than duration");
    return {cfg.input->samples.begin(), cfg.input->samples.begin() + n};
  }
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<float> d(0.0f, 0.1f);
  std::vector<float> x(static_cast<std::size_t>(n));
  for (auto& v : x) v = std::clamp(d(rng), -1.0f, 1.0f);
  return x;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

void finalize(StreamReport& r, double busy_s, std::vector<Probe> probes) {
  r.probes = std::move(probes);
  r.rtf = busy_s / r.duration_s;
  std::vector<double> lat;
  lat.reserve(r.probes.size());
  for (const auto& p : r.probes) lat.push_back(p.latency_ms);
  if (!lat.empty()) {
    r.mean_response_ms = std::accumulate(lat.begin(), lat.end(), 0.0) / static_cast<double>(lat.size());
    r.p50_ms = quantile(lat, 0.5);
    r.p95_ms = quantile(lat, 0.95);
    r.max_ms = *std::max_element(lat.begin(), lat.end());
  }
  r.realtime_capable = r.rtf < 1.0;
}

void check_emitted(const std::string& who, long emitted, long fed) {
  if (emitted > fed) {
    throw ProtocolError(who + ": emitted " + std::to_string(emitted) + " samples after only " +
                        std::to_string(fed) + " were fed");
  }
}

StreamReport simulate_virtual(ProcessorUnderTest& p, const BufferPolicy& policy, const SimulationConfig& cfg,
                              const std::vector<float>& x, StreamReport r) {
  const long n = static_cast<long>(x.size());
  const double rate = cfg.rate_hz;
  ProbeCollector probes(cfg.probe_every, cfg.rate_hz);
  double free_at = 0.0;
  double busy = 0.0;
  long emitted = 0;

  auto invoke = [&](std::vector<float> out, std::size_t in_len, double trigger, bool eos) {
    // An empty flush does no work.
    const double cost = in_len == 0 && out.empty() ? 0.0 : p.declared_cost(in_len, out.size());
    if (!(cost >= 0.0) || !std::isfinite(cost)) throw ProtocolError(p.name() + ": invalid declared cost");
    const double start = std::max(trigger, free_at);
    free_at = start + cost;
    busy += cost;
    probes.record({emitted, static_cast<long>(out.size()), trigger, free_at, eos});
    emitted += static_cast<long>(out.size());
  };

  long pos = 0;
  long len = policy.first_chunk();
  while (pos + len <= n) {
    const std::span<const float> chunk(x.data() + pos, static_cast<std::size_t>(len));
    pos += len;
    invoke(p.push(chunk), chunk.size(), static_cast<double>(pos) / rate, false);
    check_emitted(p.name(), emitted, pos);
    len = policy.chunk();
  }
  const double end = static_cast<double>(n) / rate;
  if (pos < n) {
    const std::span<const float> rest(x.data() + pos, static_cast<std::size_t>(n - pos));
    invoke(p.push(rest), rest.size(), end, true);
  }
  invoke(p.flush(), 0, end, true);
  if (emitted != n) {
    throw ProtocolError(p.name() + ": emitted " + std::to_string(emitted) + " of " + std::to_string(n) +
                        " samples by end of stream");
  }
  r.samples_fed = n;
  r.samples_emitted = emitted;
  r.probes_at_end_of_stream = probes.at_end();
  finalize(r, busy, probes.take());
  return r;
}

// Bounded FIFO of sample quanta; push blocks while full so nothing is dropped.
class SampleQueue {
 public:
  explicit SampleQueue(std::size_t capacity) : capacity_(capacity) {}

  void push(std::vector<float> q) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return size_ + q.size() <= capacity_ || items_.empty(); });
    size_ += q.size();
    items_.push_back(std::move(q));
    not_empty_.notify_one();
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
  }

  // False once closed and drained.
  bool pop(std::vector<float>& out) {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) return false;
    out = std::move(items_.front());
    items_.pop_front();
    size_ -= out.size();
    not_full_.notify_one();
    return true;
  }

 private:
  std::size_t capacity_;
  std::size_t size_ = 0;
  bool closed_ = false;
  std::deque<std::vector<float>> items_;
  std::mutex mu_;
  std::condition_variable not_empty_, not_full_;
};

StreamReport simulate_wall(ProcessorUnderTest& p, const BufferPolicy& policy, const SimulationConfig& cfg,
                           const std::vector<float>& x, StreamReport r) {
  using clock = std::chrono::steady_clock;
  const long n = static_cast<long>(x.size());
  const double rate = cfg.rate_hz;
  const long quantum = std::max(1L, static_cast<long>(cfg.rate_hz / 1000));  // ~1 ms of audio
  SampleQueue queue(static_cast<std::size_t>(10L * cfg.rate_hz));
  const auto t0 = clock::now() + std::chrono::milliseconds(5);
  auto since_t0 = [&](clock::time_point t) { return std::chrono::duration<double>(t - t0).count(); };

  std::exception_ptr feeder_error;
  std::thread feeder([&] {
    try {
      for (long k = 0; k < n; k += quantum) {
        const long e = std::min(n, k + quantum);
        // Samples [k, e) are available once the period of sample e-1 has elapsed.
        std::this_thread::sleep_until(t0 + std::chrono::duration_cast<clock::duration>(
                                               std::chrono::duration<double>(static_cast<double>(e) / rate)));
        queue.push(std::vector<float>(x.begin() + k, x.begin() + e));
      }
    } catch (...) {
      feeder_error = std::current_exception();
    }
    queue.close();
  });

  ProbeCollector probes(cfg.probe_every, cfg.rate_hz);
  double busy = 0.0;
  long emitted = 0;
  long fed = 0;
  std::vector<float> pending;
  std::exception_ptr error;
  auto invoke = [&](auto&& call, double trigger, bool eos) {
    const auto a = clock::now();
    std::vector<float> out = call();
    const auto b = clock::now();
    busy += std::chrono::duration<double>(b - a).count();
    probes.record({emitted, static_cast<long>(out.size()), trigger, since_t0(b), eos});
    emitted += static_cast<long>(out.size());
  };

  try {
    long want = policy.first_chunk();
    std::vector<float> q;
    while (queue.pop(q)) {
      pending.insert(pending.end(), q.begin(), q.end());
      while (static_cast<long>(pending.size()) >= want) {
        const std::span<const float> chunk(pending.data(), static_cast<std::size_t>(want));
        fed += want;
        invoke([&] { return p.push(chunk); }, static_cast<double>(fed) / rate, false);
        check_emitted(p.name(), emitted, fed);
        pending.erase(pending.begin(), pending.begin() + want);
        want = policy.chunk();
      }
    }
    const double end = static_cast<double>(n) / rate;
    if (!pending.empty()) {
      fed += static_cast<long>(pending.size());
      invoke([&] { return p.push(pending); }, end, true);
    }
    invoke([&] { return p.flush(); }, end, true);
  } catch (...) {
    error = std::current_exception();
  }
  if (error) {
    // Drain so the feeder can finish.
    std::vector<float> q;
    while (queue.pop(q)) {
    }
  }
  feeder.join();
  if (error) std::rethrow_exception(error);
  if (feeder_error) std::rethrow_exception(feeder_error);
  if (emitted != n) {
    throw ProtocolError(p.name() + ": emitted " + std::to_string(emitted) + " of " + std::to_string(n) +
                        " samples by end of stream");
  }
  r.samples_fed = fed;
  r.samples_emitted = emitted;
  r.probes_at_end_of_stream = probes.at_end();
  finalize(r, busy, probes.take());
  return r;
}

}  // namespace

StreamReport simulate(ProcessorUnderTest& p, const BufferPolicy& policy, const SimulationConfig& cfg) {
  if (cfg.rate_hz < 1) throw ValidationError("simulate: rate must be >= 1 Hz");
  if (!(cfg.duration_s > 0.0) || !std::isfinite(cfg.duration_s)) {
    throw ValidationError("simulate: duration must be positive");
  }
  if (cfg.probe_every < 1) throw ValidationError("simulate: probe_every must be >= 1");
  const long n = std::lround(cfg.duration_s * cfg.rate_hz);
  if (n < policy.first_chunk()) {
    throw ValidationError("simulate: duration shorter than one full buffer (" +
                          std::to_string(policy.first_chunk()) + " samples)");
  }
  const auto x = make_input(cfg, n);
  StreamReport r;
  r.mode = cfg.mode;
  r.rate_hz = cfg.rate_hz;
  r.duration_s = static_cast<double>(n) / cfg.rate_hz;
  r.policy = policy.describe();
  r.processor = p.name();
  r.cpu = cfg.mode == ClockMode::Wall ? cpu_identification() : "virtual";
  return cfg.mode == ClockMode::Virtual ? simulate_virtual(p, policy, cfg, x, std::move(r))
                                        : simulate_wall(p, policy, cfg, x, std::move(r));
}

double rtf_offline(double corpus_duration_s, double measured_time_s) {
  if (!(corpus_duration_s > 0.0)) throw ValidationError("rtf_offline: corpus duration must be positive");
  if (!(measured_time_s >= 0.0)) throw ValidationError("rtf_offline: measured time must be >= 0");
  return measured_time_s / corpus_duration_s;
}

LatencyBreakdown latency_decomposition(const StreamReport& r, const BufferPolicy& policy) {
  LatencyBreakdown b;
  if (r.probes.empty()) return b;
  double wait = 0.0;
  double compute = 0.0;
  for (const auto& p : r.probes) {
    wait += static_cast<double>(policy.buffer_wait(p.index));
    compute += p.compute_ms;
  }
  const auto count = static_cast<double>(r.probes.size());
  b.buffering_ms = wait / count / r.rate_hz * 1e3;
  b.compute_ms = compute / count;
  b.algorithmic_ms = static_cast<double>(policy.algorithmic_samples()) / r.rate_hz * 1e3;
  return b;
}

double analytic_mean_response_ms(const BufferPolicy& policy, const SimulationConfig& cfg) {
  // Mean of (block end - i) over a block is (B + 1) / 2 samples.
  const double wait = (static_cast<double>(policy.chunk()) + 1.0) / 2.0;
  return (wait + static_cast<double>(policy.algorithmic_samples())) / cfg.rate_hz * 1e3;
}

namespace {

using nlohmann::json;

const char* mode_name(ClockMode m) { return m == ClockMode::Virtual ? "virtual" : "wall"; }

}  // namespace

std::string report_to_json(const StreamReport& r, int indent) {
  json probes = json::array();
  json compute = json::array();
  for (const auto& p : r.probes) {
    probes.push_back(json::array({p.index, p.latency_ms}));
    compute.push_back(p.compute_ms);
  }
  json j = {
      {"mode", mode_name(r.mode)},
      {"rate_hz", r.rate_hz},
      {"duration_s", r.duration_s},
      {"policy", r.policy},
      {"processor", r.processor},
      {"rtf", r.rtf},
      {"mean_response_ms", r.mean_response_ms},
      {"p50_ms", r.p50_ms},
      {"p95_ms", r.p95_ms},
      {"max_ms", r.max_ms},
      {"probes", probes},
      {"probe_compute_ms", compute},
      {"probes_at_end_of_stream", r.probes_at_end_of_stream},
      {"samples_fed", r.samples_fed},
      {"samples_emitted", r.samples_emitted},
      {"realtime_capable", r.realtime_capable},
      {"cpu", r.cpu},
  };
  return j.dump(indent);
}

std::vector<std::string> validate_report_json(const std::string& text) {
  std::vector<std::string> issues;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    return {std::string("not valid JSON: ") + e.what()};
  }
  if (!j.is_object()) return {"report is not a JSON object"};
  auto require = [&](const char* key, auto&& pred, const char* type) {
    if (!j.contains(key)) {
      issues.push_back(std::string("missing field '") + key + "'");
    } else if (!pred(j[key])) {
      issues.push_back(std::string("field '") + key + "' must be " + type);
    }
  };
  const auto number = [](const json& v) { return v.is_number(); };
  const auto nonneg = [](const json& v) { return v.is_number() && v.get<double>() >= 0.0; };
  require("mode", [](const json& v) { return v.is_string() && (v == "virtual" || v == "wall"); },
          "\"virtual\" or \"wall\"");
  require("rate_hz", [](const json& v) { return v.is_number_integer() && v.get<long>() > 0; },
          "a positive integer");
  require("duration_s", [](const json& v) { return v.is_number() && v.get<double>() > 0.0; }, "positive");
  require("policy", [](const json& v) { return v.is_string(); }, "a string");
  require("rtf", nonneg, "a non-negative number");
  for (const char* k : {"mean_response_ms", "p50_ms", "p95_ms", "max_ms"}) require(k, nonneg, "a non-negative number");
  require("realtime_capable", [](const json& v) { return v.is_boolean(); }, "a boolean");
  require("probes",
          [&](const json& v) {
            if (!v.is_array()) return false;
            return std::all_of(v.begin(), v.end(), [&](const json& e) {
              return e.is_array() && e.size() == 2 && e[0].is_number_integer() && e[0].get<long>() >= 0 &&
                     number(e[1]);
            });
          },
          "an array of [sample_index, latency_ms] pairs");
  if (issues.empty()) {
    const double p50 = j["p50_ms"], p95 = j["p95_ms"], mx = j["max_ms"];
    if (!(p50 <= p95 && p95 <= mx)) issues.push_back("percentiles out of order (p50 <= p95 <= max)");
    if (j.contains("probe_compute_ms") &&
        (!j["probe_compute_ms"].is_array() || j["probe_compute_ms"].size() != j["probes"].size())) {
      issues.push_back("probe_compute_ms must parallel probes");
    }
  }
  return issues;
}

StreamReport report_from_json(const std::string& text) {
  if (auto issues = validate_report_json(text); !issues.empty()) {
    std::string msg = "invalid stream report:";
    for (const auto& s : issues) msg += "\n  " + s;
    throw FormatError(msg);
  }
  const json j = json::parse(text);
  StreamReport r;
  r.mode = j["mode"] == "virtual" ? ClockMode::Virtual : ClockMode::Wall;
  r.rate_hz = j["rate_hz"];
  r.duration_s = j["duration_s"];
  r.policy = j["policy"];
  r.processor = j.value("processor", "");
  r.rtf = j["rtf"];
  r.mean_response_ms = j["mean_response_ms"];
  r.p50_ms = j["p50_ms"];
  r.p95_ms = j["p95_ms"];
  r.max_ms = j["max_ms"];
  const json compute = j.value("probe_compute_ms", json::array());
  for (std::size_t i = 0; i < j["probes"].size(); ++i) {
    const auto& e = j["probes"][i];
    r.probes.push_back({e[0].get<long>(), e[1].get<double>(), i < compute.size() ? compute[i].get<double>() : 0.0});
  }
  r.probes_at_end_of_stream = j.value("probes_at_end_of_stream", 0L);
  r.samples_fed = j.value("samples_fed", 0L);
  r.samples_emitted = j.value("samples_emitted", 0L);
  r.realtime_capable = j["realtime_capable"];
  r.cpu = j.value("cpu", "");
  return r;
}

std::string cpu_identification() {
  std::ifstream f("/proc/cpuinfo");
  std::string line;
  while (std::getline(f, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        auto s = line.substr(colon + 1);
        s.erase(0, s.find_first_not_of(' '));
        return s;
      }
    }
  }
  return "unknown";
}

}  // namespace declip::streamsim
