// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "declip/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "declip/demucs/model.hpp"
#include "declip/errors.hpp"
#include "declip/fft.hpp"
#include "declip/spectral.hpp"
#include "declip/streamsim.hpp"

namespace declip::corpus {

using nlohmann::json;

namespace {

// Runs fn(i) for i in [0, n) on up to `jobs` threads; the first exception wins.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const auto workers = static_cast<int>(std::min<std::size_t>(std::max(jobs, 1), std::max<std::size_t>(n, 1)));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void log_to(const Log& log, const std::string& msg) {
  if (log) log(msg);
}

std::string snr_dir_name(double snr) {
  std::ostringstream o;
  o << snr << "dB";
  return o.str();
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream o;
  o << std::setprecision(10) << v;
  return o.str();
}

json num_or_tag(double v) {
  if (std::isfinite(v)) return v;
  return fmt(v);
}

}  // namespace

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open manifest " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw FormatError("manifest " + path.string() + ": " + e.what());
  }
  if (!j.is_array()) throw FormatError("manifest " + path.string() + " is not a JSON array");
  std::vector<ManifestEntry> out;
  for (const auto& e : j) {
    try {
      out.push_back({e.at("file").get<std::string>(), e.at("target_snr_db").get<double>(),
                     e.at("theta").get<double>(), e.at("measured_snr_db").get<double>()});
    } catch (const json::exception& ex) {
      throw FormatError("manifest " + path.string() + ": bad entry: " + ex.what());
    }
  }
  return out;
}

void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries) {
  json j = json::array();
  for (const auto& e : entries) {
    j.push_back({{"file", e.file},
                 {"target_snr_db", e.target_snr_db},
                 {"theta", e.theta},
                 {"measured_snr_db", e.measured_snr_db}});
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << j.dump(2) << "\n";
  }
  fs::rename(tmp, path);
}

std::vector<fs::path> list_wavs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ValidationError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".wav") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return out;
}

ClipMask mask_for(const Waveform& x, double theta, SampleFormat format) {
  const double slack = format == SampleFormat::Pcm16 ? 0.5 * kPcm16Lsb : 0.0;
  return clip_mask(x, ClipThreshold(theta), slack);
}

ClipSummary clip_corpus(const fs::path& in_dir, const fs::path& out_dir, const ClipOptions& opts) {
  if (opts.snr_db.empty()) throw ValidationError("clip: SNR list is empty");
  for (double s : opts.snr_db) {
    if (!std::isfinite(s)) throw ValidationError("clip: SNR targets must be finite");
  }
  const auto files = list_wavs(in_dir);
  if (files.empty()) throw ValidationError("clip: no WAV files in " + in_dir.string());
  for (double s : opts.snr_db) fs::create_directories(out_dir / snr_dir_name(s));

  struct Job {
    std::vector<ManifestEntry> entries;  // one per SNR, relative to out_dir
    std::string skipped;
  };
  std::vector<Job> jobs(files.size());
  parallel_for(files.size(), opts.jobs, [&](std::size_t i) {
    const auto name = files[i].filename().string();
    WavData clean;
    try {
      clean = read_wav(files[i]);
      require_nonempty(clean.wave, name);
    } catch (const std::exception& e) {
      jobs[i].skipped = name + ": " + e.what();
      return;
    }
    for (double target : opts.snr_db) {
      try {
        double theta =
            threshold_for_target_snr(clean.wave, SnrDb::finite(target), opts.tol_db / 2.0).value();
        if (opts.format == SampleFormat::Pcm16) {
          // Put the rail on the 16-bit grid so the written file is clipped exactly at theta.
          theta = std::clamp(std::nearbyint(theta * 32768.0), 1.0, 32768.0) / 32768.0;
        }
        const auto rel = fs::path(snr_dir_name(target)) / name;
        write_wav(out_dir / rel, hard_clip(clean.wave, ClipThreshold(theta)), opts.format);
        const auto written = read_wav(out_dir / rel);
        const double measured = snr_db(clean.wave, written.wave).value_or_inf();
        if (std::fabs(measured - target) > opts.tol_db) {
          log_to(opts.log, name + ": measured " + fmt(measured) + " dB misses target " + fmt(target) + " dB");
        }
        jobs[i].entries.push_back({rel.generic_string(), target, theta, measured});
      } catch (const std::exception& e) {
        jobs[i].skipped = name + " @ " + fmt(target) + " dB: " + e.what();
        return;
      }
    }
  });

  ClipSummary s;
  std::map<std::string, std::vector<ManifestEntry>> per_dir;
  for (auto& j : jobs) {
    if (!j.skipped.empty()) {
      log_to(opts.log, "skip " + j.skipped);
      s.skipped.push_back(j.skipped);
    }
    for (auto& e : j.entries) {
      const fs::path rel(e.file);
      auto local = e;
      local.file = rel.filename().string();
      per_dir[rel.parent_path().string()].push_back(local);
      s.entries.push_back(std::move(e));
    }
  }
  for (double t : opts.snr_db) {
    const auto d = snr_dir_name(t);
    write_manifest(out_dir / d / "manifest.json", per_dir[d]);
  }
  write_manifest(out_dir / "manifest.json", s.entries);
  return s;
}

Method parse_method(const std::string& name) {
  if (name == "ddd") return Method::Ddd;
  if (name == "aspade") return Method::Aspade;
  throw ValidationError("unknown method '" + name + "'; valid methods: ddd, aspade");
}

std::string method_name(Method m) { return m == Method::Ddd ? "ddd" : "aspade"; }

DeclipSummary declip_corpus(const fs::path& in_dir, const fs::path& out_dir, const DeclipOptions& opts) {
  const auto files = list_wavs(in_dir);
  if (files.empty()) throw ValidationError("declip: no WAV files in " + in_dir.string());

  std::optional<demucs::DemucsModel> model;
  std::map<std::string, double> thetas;
  if (opts.method == Method::Ddd) {
    if (!opts.weights) throw ValidationError("declip: method ddd requires a weight file (--weights or DDD_WEIGHTS)");
    model = demucs::DemucsModel::load(*opts.weights);
  } else {
    opts.aspade.validate();
    if (!opts.theta) {
      const auto mpath = opts.manifest.value_or(in_dir / "manifest.json");
      if (!fs::exists(mpath)) {
        throw ValidationError("declip: method aspade needs a clipping threshold (--theta or a manifest; " +
                              mpath.string() + " not found)");
      }
      for (const auto& e : read_manifest(mpath)) thetas[fs::path(e.file).filename().string()] = e.theta;
    }
  }
  fs::create_directories(out_dir);

  std::vector<FileRuntime> runtimes(files.size());
  std::vector<std::string> skipped(files.size());
  parallel_for(files.size(), opts.jobs, [&](std::size_t i) {
    const auto name = files[i].filename().string();
    try {
      const auto in = read_wav(files[i]);
      Waveform out;
      const auto t0 = std::chrono::steady_clock::now();
      if (model) {
        out = model->forward(in.wave);
      } else {
        double theta = 0.0;
        if (opts.theta) {
          theta = *opts.theta;
        } else if (auto it = thetas.find(name); it != thetas.end()) {
          theta = it->second;
        } else {
          throw ValidationError("no manifest entry (theta unknown)");
        }
        auto cfg = opts.aspade;
        cfg.jobs = 1;
        out = aspade::declip(in.wave, mask_for(in.wave, theta, in.format), ClipThreshold(theta), cfg).restored;
      }
      const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      write_wav(out_dir / name, out, opts.format.value_or(in.format));
      runtimes[i] = {name, in.wave.duration_s(), dt};
      log_to(opts.log, name + ": " + fmt(in.wave.duration_s()) + " s audio in " + fmt(dt) + " s");
    } catch (const std::exception& e) {
      skipped[i] = name + ": " + e.what();
    }
  });

  DeclipSummary s;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!skipped[i].empty()) {
      log_to(opts.log, "skip " + skipped[i]);
      s.skipped.push_back(skipped[i]);
      continue;
    }
    s.audio_s += runtimes[i].audio_s;
    s.runtime_s += runtimes[i].runtime_s;
    s.files.push_back(runtimes[i]);
  }
  if (s.audio_s > 0.0) s.rtf = streamsim::rtf_offline(s.audio_s, s.runtime_s);
  return s;
}

EvalSummary eval_corpus(const fs::path& clean_dir, const fs::path& restored_dir, const fs::path& clipped_dir,
                        const EvalOptions& opts) {
  auto names = [](const fs::path& d) {
    std::set<std::string> s;
    for (const auto& p : list_wavs(d)) s.insert(p.filename().string());
    return s;
  };
  const auto clean = names(clean_dir);
  const auto restored = names(restored_dir);
  const auto clipped = names(clipped_dir);

  std::map<std::string, double> thetas;
  const auto manifest = clipped_dir / "manifest.json";
  if (fs::exists(manifest)) {
    for (const auto& e : read_manifest(manifest)) thetas[fs::path(e.file).filename().string()] = e.theta;
  } else if (opts.method == "aspade") {
    throw ValidationError("eval: aspade results need the clipping manifest (" + manifest.string() + " not found)");
  }

  EvalSummary s;
  std::vector<std::string> common;
  std::set<std::string> all;
  all.insert(clean.begin(), clean.end());
  all.insert(restored.begin(), restored.end());
  all.insert(clipped.begin(), clipped.end());
  for (const auto& n : all) {
    if (clean.contains(n) && restored.contains(n) && clipped.contains(n)) {
      common.push_back(n);
    } else {
      std::string missing;
      if (!clean.contains(n)) missing += " clean";
      if (!restored.contains(n)) missing += " restored";
      if (!clipped.contains(n)) missing += " clipped";
      s.skipped.push_back(n + ": missing from" + missing);
    }
  }

  std::vector<std::optional<EvalRow>> rows(common.size());
  std::vector<std::string> errors(common.size());
  parallel_for(common.size(), opts.jobs, [&](std::size_t i) {
    const auto& n = common[i];
    try {
      const auto y = read_wav(clean_dir / n);
      const auto out = read_wav(restored_dir / n);
      const auto x = read_wav(clipped_dir / n);
      require_same_length(y.wave, out.wave, n);
      require_same_length(y.wave, x.wave, n);
      double theta = 0.0;
      if (auto it = thetas.find(n); it != thetas.end()) {
        theta = it->second;
      } else {
        if (opts.method == "aspade") throw ValidationError("no manifest entry");
        for (float v : x.wave.samples) theta = std::max(theta, std::fabs(static_cast<double>(v)));
      }
      EvalRow r;
      r.file = n;
      r.method = opts.method;
      r.input_snr = snr_db(y.wave, x.wave);
      r.output_snr = snr_db(y.wave, out.wave);
      r.delta_snr_db = r.output_snr.value_or_inf() - r.input_snr.value_or_inf();
      if (r.output_snr.is_infinite() && r.input_snr.is_infinite()) r.delta_snr_db = 0.0;
      r.mrstft = y.wave.size() >= 2048 ? spectral::multi_res_stft_loss(y.wave, out.wave)
                                         : std::numeric_limits<double>::quiet_NaN();
      const auto mask = mask_for(x.wave, std::min(theta, 1.0), x.format);
      r.clipped_samples = mask.clipped_count();
      r.extrema_clean = count_saturated_extrema(y.wave, mask);
      r.extrema_restored = count_saturated_extrema(out.wave, mask);
      rows[i] = r;
    } catch (const std::exception& e) {
      errors[i] = n + ": " + e.what();
    }
  });
  for (std::size_t i = 0; i < common.size(); ++i) {
    if (rows[i]) {
      s.rows.push_back(*rows[i]);
    } else {
      s.skipped.push_back(errors[i]);
    }
  }
  for (const auto& k : s.skipped) log_to(opts.log, "skip " + k);
  return s;
}

std::string eval_csv(const std::vector<EvalRow>& rows) {
  std::ostringstream o;
  o << kEvalCsvHeader << "\n";
  for (const auto& r : rows) {
    o << r.file << "," << fmt(r.input_snr.value_or_inf()) << "," << r.method << ","
      << fmt(r.output_snr.value_or_inf()) << "," << fmt(r.delta_snr_db) << "," << fmt(r.mrstft) << ","
      << r.clipped_samples << "," << r.extrema_clean << "," << r.extrema_restored << "\n";
  }
  return o.str();
}

std::string eval_json(const EvalSummary& s) {
  json rows = json::array();
  std::map<std::string, std::vector<double>> cols;
  for (const auto& r : s.rows) {
    rows.push_back({{"file", r.file},
                    {"input_snr_db", num_or_tag(r.input_snr.value_or_inf())},
                    {"method", r.method},
                    {"output_snr_db", num_or_tag(r.output_snr.value_or_inf())},
                    {"delta_snr_db", num_or_tag(r.delta_snr_db)},
                    {"mrstft_distance", num_or_tag(r.mrstft)},
                    {"clipped_samples", r.clipped_samples},
                    {"extrema_clean", r.extrema_clean},
                    {"extrema_restored", r.extrema_restored}});
    cols["input_snr_db"].push_back(r.input_snr.value_or_inf());
    cols["output_snr_db"].push_back(r.output_snr.value_or_inf());
    cols["delta_snr_db"].push_back(r.delta_snr_db);
    cols["mrstft_distance"].push_back(r.mrstft);
    cols["extrema_clean"].push_back(static_cast<double>(r.extrema_clean));
    cols["extrema_restored"].push_back(static_cast<double>(r.extrema_restored));
  }
  json agg = json::object();
  for (auto& [k, v] : cols) {
    std::vector<double> f;
    std::copy_if(v.begin(), v.end(), std::back_inserter(f), [](double x) { return std::isfinite(x); });
    json a = {{"count", f.size()}, {"non_finite", v.size() - f.size()}};
    if (!f.empty()) {
      std::sort(f.begin(), f.end());
      double sum = 0.0;
      for (double x : f) sum += x;
      const std::size_t m = f.size() / 2;
      a["mean"] = sum / static_cast<double>(f.size());
      a["median"] = f.size() % 2 ? f[m] : 0.5 * (f[m - 1] + f[m]);
    }
    agg[k] = a;
  }
  return json{{"rows", rows}, {"aggregate", agg}, {"skipped", s.skipped}}.dump(2);
}

std::vector<SpectrumRow> region_spectrum(const Waveform& x, double start_s, double end_s, std::size_t fft) {
  if (fft < 2 || (fft & (fft - 1)) != 0) throw ValidationError("spectrum: fft size must be a power of two");
  if (!(start_s >= 0.0) || !(end_s > start_s)) throw ValidationError("spectrum: need 0 <= start < end");
  const auto a = static_cast<std::size_t>(std::llround(start_s * x.sample_rate));
  const auto b = static_cast<std::size_t>(std::llround(end_s * x.sample_rate));
  if (b > x.size() || a >= b) {
    throw RangeError("spectrum: region [" + fmt(start_s) + ", " + fmt(end_s) + ") s outside the " +
                     fmt(x.duration_s()) + " s signal");
  }
  const std::size_t len = b - a;
  const std::size_t frame = std::min(len, fft);
  const auto w = spectral::make_window(spectral::Window::Hann, frame);
  double wsum = 0.0;
  for (double v : w) wsum += v;
  const std::size_t hop = std::max<std::size_t>(frame / 2, 1);
  const RealFft plan(fft);
  std::vector<double> buf(fft), power(plan.bins(), 0.0);
  std::vector<std::complex<double>> spec(plan.bins());
  std::size_t frames = 0;
  for (std::size_t s = a; s + frame <= b; s += hop) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (std::size_t i = 0; i < frame; ++i) buf[i] = w[i] * x[s + i];
    plan.forward(buf, spec);
    for (std::size_t k = 0; k < spec.size(); ++k) power[k] += std::norm(spec[k]);
    ++frames;
    if (frame == len) break;
  }
  std::vector<SpectrumRow> rows(plan.bins());
  const double norm = wsum > 0.0 ? 2.0 / wsum : 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double mag = std::sqrt(power[k] / static_cast<double>(frames)) * norm;
    rows[k].frequency_hz = static_cast<double>(k) * x.sample_rate / static_cast<double>(fft);
    rows[k].magnitude_db = mag > 0.0 ? std::max(20.0 * std::log10(mag), kSpectrumFloorDb) : kSpectrumFloorDb;
  }
  return rows;
}

std::string spectrum_csv(const std::vector<SpectrumRow>& rows) {
  std::ostringstream o;
  o << "frequency_hz,magnitude_db\n";
  for (const auto& r : rows) o << fmt(r.frequency_hz) << "," << fmt(r.magnitude_db) << "\n";
  return o.str();
}

}  // namespace declip::corpus
