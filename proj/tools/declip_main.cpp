// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// declip: command-line front end (clip, declip, eval, spectrum, simulate, info).

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "declip/corpus.hpp"
#include "declip/demucs/dependency.hpp"
#include "declip/demucs/macs.hpp"
#include "declip/demucs/model.hpp"
#include "declip/demucs/parity.hpp"
#include "declip/errors.hpp"
#include "declip/streamsim.hpp"
#include "declip/wav.hpp"

namespace {

namespace fs = std::filesystem;
using namespace declip;

void log_stderr(const std::string& s) { std::cerr << s << "\n"; }

std::optional<fs::path> weights_or_env(const std::string& flag) {
  if (!flag.empty()) return fs::path(flag);
  if (const char* env = std::getenv("DDD_WEIGHTS"); env && *env) return fs::path(env);
  return std::nullopt;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
  if (!text.empty() && text.back() != '\n') f << "\n";
}

demucs::DemucsConfig config_from_flags(int depth, int channels, int lstm_layers, int resample) {
  demucs::DemucsConfig cfg;
  cfg.depth = depth;
  cfg.initial_channels = channels;
  cfg.lstm_layers = lstm_layers;
  cfg.resample_factor = resample;
  cfg.validate();
  return cfg;
}

}  // namespace

const CLI::Range kAtLeastOne(1, std::numeric_limits<int>::max());

int main(int argc, char** argv) {
  CLI::App app{"Speech declipping toolkit: corpus construction, declipping, evaluation, streaming simulation"};
  app.require_subcommand(1);
  int jobs = 1;

  // clip
  auto* clip = app.add_subcommand("clip", "Build a clipped testset at fixed SNRs");
  std::string clip_in, clip_out;
  std::vector<double> snrs{1.0, 3.0, 7.0, 15.0};
  double tol = 0.01;
  bool clip_float = false;
  clip->add_option("--in", clip_in, "Directory of clean mono 16 kHz WAVs")->required();
  clip->add_option("--out", clip_out, "Output directory")->required();
  clip->add_option("--snr", snrs, "Target SNRs in dB")->delimiter(',')->expected(0, -1);
  clip->add_option("--tol", tol, "SNR tolerance in dB")->check(CLI::PositiveNumber);
  clip->add_flag("--float32", clip_float, "Write float32 instead of 16-bit PCM");
  clip->add_option("--jobs", jobs, "Parallel files")->check(kAtLeastOne);

  // declip
  auto* dec = app.add_subcommand("declip", "Restore a directory of clipped WAVs");
  std::string dec_in, dec_out, method, dec_weights, dec_manifest, dec_format;
  std::optional<double> dec_theta;
  dec->add_option("--in", dec_in, "Directory of clipped WAVs")->required();
  dec->add_option("--out", dec_out, "Output directory")->required();
  dec->add_option("--method", method, "ddd or aspade")->required()->check(CLI::IsMember({"ddd", "aspade"}));
  dec->add_option("--weights", dec_weights, "Weight file for ddd (default: $DDD_WEIGHTS)");
  dec->add_option("--theta", dec_theta, "Clipping threshold for aspade (overrides the manifest)")
      ->check(CLI::Range(0.0, 1.0));
  dec->add_option("--manifest", dec_manifest, "Manifest with per-file thresholds (default: <in>/manifest.json)");
  dec->add_option("--format", dec_format, "Output format pcm16 or float32 (default: as input)")
      ->check(CLI::IsMember({"pcm16", "float32"}));
  dec->add_option("--jobs", jobs, "Parallel files")->check(kAtLeastOne);

  // eval
  auto* ev = app.add_subcommand("eval", "SNR, spectral and extrema table for restored files");
  std::string ev_clean, ev_restored, ev_clipped, ev_csv, ev_json, ev_method = "unknown";
  ev->add_option("--clean", ev_clean)->required();
  ev->add_option("--restored", ev_restored)->required();
  ev->add_option("--clipped", ev_clipped)->required();
  ev->add_option("--method", ev_method, "Method label written to the table");
  ev->add_option("--csv", ev_csv, "CSV output path (default: stdout)");
  ev->add_option("--json", ev_json, "JSON output path");
  ev->add_option("--jobs", jobs, "Parallel files")->check(kAtLeastOne);

  // spectrum
  auto* sp = app.add_subcommand("spectrum", "Magnitude spectrum of a region as CSV");
  std::string sp_file, sp_out;
  double sp_start = 0.0, sp_end = 0.0;
  std::size_t sp_fft = 2048;
  sp->add_option("--file", sp_file)->required();
  sp->add_option("--start", sp_start, "Region start (s)")->required();
  sp->add_option("--end", sp_end, "Region end (s)")->required();
  sp->add_option("--fft", sp_fft, "FFT size")->check(kAtLeastOne);
  sp->add_option("--out", sp_out, "CSV output path (default: stdout)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Streaming response-time / RTF simulation");
  bool sim_identity = false, sim_ddd = false, sim_virtual = false, sim_wall = false;
  std::optional<long> sim_block;
  std::optional<int> sim_frames;
  double sim_duration = 100.0, sim_cost_ms = 0.0;
  long sim_probe = 500;
  std::string sim_weights, sim_out;
  auto* g_proc = sim->add_option_group("processor");
  g_proc->add_flag("--identity", sim_identity, "Pass-through processor");
  g_proc->add_flag("--ddd", sim_ddd, "Streaming generator");
  g_proc->require_option(1);
  auto* g_pol = sim->add_option_group("policy");
  g_pol->add_option("--block", sim_block, "FixedBlock buffer size (samples)")->check(kAtLeastOne);
  g_pol->add_option("--frames", sim_frames, "FrameBuffered frame count")->check(kAtLeastOne);
  g_pol->require_option(1);
  auto* g_clock = sim->add_option_group("clock");
  g_clock->add_flag("--virtual", sim_virtual, "Virtual clock (default)");
  g_clock->add_flag("--wall", sim_wall, "Wall clock");
  g_clock->require_option(0, 1);
  sim->add_option("--duration", sim_duration, "Seconds of audio")->check(CLI::PositiveNumber);
  sim->add_option("--probe-every", sim_probe, "Probe spacing (samples)")->check(kAtLeastOne);
  sim->add_option("--cost-ms", sim_cost_ms, "Declared compute per invocation (virtual clock)")
      ->check(CLI::NonNegativeNumber);
  sim->add_option("--weights", sim_weights, "Weight file for --ddd (default: $DDD_WEIGHTS)");
  sim->add_option("--out", sim_out, "Report path (default: stdout)");

  // info
  auto* info = app.add_subcommand("info", "Architecture, lookahead, MACs, weight and parity checks");
  std::string info_weights, info_parity;
  info->add_option("--weights", info_weights, "Weight file (default: $DDD_WEIGHTS)");
  info->add_option("--parity", info_parity, "Parity file to replay against the weights");

  // fixture
  auto* fix = app.add_subcommand("fixture", "Write seeded random weights or parity vectors");
  fix->require_subcommand(1);
  auto* fix_w = fix->add_subcommand("weights", "Seeded random weight file");
  std::string fix_out, fix_weights;
  std::uint64_t fix_seed = 1;
  int fix_depth = 5, fix_channels = 64, fix_lstm = 2, fix_resample = 4, fix_count = 8;
  long fix_length = 24000;
  fix_w->add_option("--out", fix_out)->required();
  fix_w->add_option("--seed", fix_seed);
  fix_w->add_option("--depth", fix_depth)->check(kAtLeastOne);
  fix_w->add_option("--channels", fix_channels)->check(kAtLeastOne);
  fix_w->add_option("--lstm-layers", fix_lstm)->check(kAtLeastOne);
  fix_w->add_option("--resample", fix_resample)->check(CLI::IsMember({1, 2, 4}));
  auto* fix_p = fix->add_subcommand("parity", "Parity vectors from a weight file");
  fix_p->add_option("--weights", fix_weights)->required();
  fix_p->add_option("--out", fix_out)->required();
  fix_p->add_option("--seed", fix_seed);
  fix_p->add_option("--count", fix_count)->check(CLI::NonNegativeNumber);
  fix_p->add_option("--length", fix_length)->check(kAtLeastOne);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage errors share the validation exit code
  }

  try {
    if (*clip) {
      corpus::ClipOptions o;
      o.snr_db = snrs;
      o.tol_db = tol;
      o.format = clip_float ? SampleFormat::Float32 : SampleFormat::Pcm16;
      o.jobs = jobs;
      o.log = log_stderr;
      const auto s = corpus::clip_corpus(clip_in, clip_out, o);
      std::cout << "wrote " << s.entries.size() << " clipped files (" << s.skipped.size() << " inputs skipped)\n";
    } else if (*dec) {
      corpus::DeclipOptions o;
      o.method = corpus::parse_method(method);
      o.weights = weights_or_env(dec_weights);
      o.theta = dec_theta;
      if (!dec_manifest.empty()) o.manifest = fs::path(dec_manifest);
      if (dec_format == "pcm16") o.format = SampleFormat::Pcm16;
      if (dec_format == "float32") o.format = SampleFormat::Float32;
      o.jobs = jobs;
      o.log = log_stderr;
      const auto s = corpus::declip_corpus(dec_in, dec_out, o);
      std::cout << std::setprecision(6) << "files " << s.files.size() << ", skipped " << s.skipped.size()
                << ", audio " << s.audio_s << " s, runtime " << s.runtime_s << " s, RTF " << s.rtf << "\n";
      return s.skipped.empty() ? 0 : 1;
    } else if (*ev) {
      corpus::EvalOptions o;
      o.method = ev_method;
      o.jobs = jobs;
      o.log = log_stderr;
      const auto s = corpus::eval_corpus(ev_clean, ev_restored, ev_clipped, o);
      write_text(ev_csv, corpus::eval_csv(s.rows));
      if (!ev_json.empty()) write_text(ev_json, corpus::eval_json(s));
    } else if (*sp) {
      const auto w = read_wav(sp_file);
      write_text(sp_out, corpus::spectrum_csv(corpus::region_spectrum(w.wave, sp_start, sp_end, sp_fft)));
    } else if (*sim) {
      streamsim::SimulationConfig c;
      c.duration_s = sim_duration;
      c.probe_every = sim_probe;
      c.mode = sim_wall ? streamsim::ClockMode::Wall : streamsim::ClockMode::Virtual;
      const auto cost = streamsim::cost_per_invocation(sim_cost_ms * 1e-3);
      std::unique_ptr<streamsim::ProcessorUnderTest> p;
      std::optional<streamsim::BufferPolicy> policy;
      if (sim_ddd) {
        const auto wpath = weights_or_env(sim_weights);
        if (!wpath) throw ValidationError("simulate --ddd requires a weight file (--weights or DDD_WEIGHTS)");
        auto model = demucs::DemucsModel::load(*wpath);
        const int frames = sim_frames.value_or(4);
        if (sim_block) throw ValidationError("simulate --ddd uses --frames, not --block");
        policy = streamsim::BufferPolicy::frame_buffered(frames, model.config());
        p = std::make_unique<streamsim::EngineProcessor>(std::move(model), frames, cost);
      } else {
        if (!sim_block) throw ValidationError("simulate --identity uses --block");
        policy = streamsim::BufferPolicy::fixed_block(*sim_block);
        p = streamsim::identity_processor(cost);
      }
      const auto r = streamsim::simulate(*p, *policy, c);
      write_text(sim_out, streamsim::report_to_json(r));
      const auto d = streamsim::latency_decomposition(r, *policy);
      std::cerr << std::fixed << std::setprecision(3) << r.policy << ": mean " << r.mean_response_ms
                << " ms (buffering " << d.buffering_ms << ", algorithmic " << d.algorithmic_ms << ", compute "
                << d.compute_ms << "), RTF " << r.rtf << (r.realtime_capable ? "" : " NOT real-time capable")
                << "\n";
    } else if (*info) {
      std::optional<demucs::DemucsModel> model;
      demucs::DemucsConfig cfg;
      if (const auto wpath = weights_or_env(info_weights)) {
        model = demucs::DemucsModel::load(*wpath);
        cfg = model->config();
        std::cout << "weights: " << wpath->string() << " (valid, crc 0x" << std::hex
                  << demucs::weights_checksum(demucs::read_weights(*wpath)) << std::dec << ")\n";
      }
      std::cout << cfg.describe() << "\n";
      std::cout << "alignment delay: " << cfg.alignment_delay() << " samples\n";
      std::cout << "algorithmic lookahead (offline): " << demucs::algorithmic_lookahead(cfg) << " samples\n";
      for (int f : {1, 2, 4, 8}) {
        std::cout << "streaming lookahead, " << f << " frame(s): " << demucs::lookahead_samples(cfg, f)
                  << " samples\n";
      }
      const auto macs = demucs::mac_per_sample(cfg);
      std::cout << std::fixed << std::setprecision(1);
      for (const auto& e : macs.layers) std::cout << "  " << e.name << ": " << e.macs_per_sample() << "\n";
      std::cout << "MACs per sample: " << macs.macs_per_sample() << "\n";
      if (!info_parity.empty()) {
        if (!model) throw ValidationError("info --parity requires --weights");
        const auto set = demucs::read_parity(info_parity);
        const auto crc = demucs::weights_checksum(demucs::read_weights(*weights_or_env(info_weights)));
        const auto rep = demucs::replay_parity(*model, set, crc);
        std::cout << std::scientific << "parity: " << rep.vectors << " vectors, max abs error "
                  << rep.max_abs_error << "\n";
        return rep.max_abs_error <= 1e-4 ? 0 : 1;
      }
    } else if (*fix_w) {
      const auto cfg = config_from_flags(fix_depth, fix_channels, fix_lstm, fix_resample);
      demucs::write_weights(demucs::random_weights(cfg, fix_seed), fix_out);
    } else if (*fix_p) {
      const auto store = demucs::read_weights(fix_weights);
      const auto model = demucs::DemucsModel::load(fix_weights);
      demucs::write_parity(demucs::make_parity(model, store, fix_count, fix_length, fix_seed), fix_out);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const RangeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
