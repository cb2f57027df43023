// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "declip/corpus.hpp"
#include "declip/demucs/weights.hpp"
#include "declip/errors.hpp"
#include "signals.hpp"

using namespace declip;
using namespace declip::corpus;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void make_clean(const fs::path& dir, int files, std::size_t n = 16000) {
  fs::create_directories(dir);
  for (int i = 0; i < files; ++i) {
    write_wav(dir / ("utt" + std::to_string(i) + ".wav"), testsig::speech_like(n, 50 + i, 0.8));
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("method names") {
  CHECK(parse_method("ddd") == Method::Ddd);
  CHECK(parse_method("aspade") == Method::Aspade);
  try {
    (void)parse_method("wiener");
    FAIL("accepted unknown method");
  } catch (const ValidationError& e) {
    const std::string m = e.what();
    CHECK(m.find("ddd") != std::string::npos);
    CHECK(m.find("aspade") != std::string::npos);
  }
  CHECK(method_name(Method::Aspade) == "aspade");
}

TEST_CASE("manifest round trip") {
  TempDir t("declip_manifest");
  const std::vector<ManifestEntry> e{{"a.wav", 3.0, 0.25, 3.004}, {"b.wav", 7.0, 0.5, 6.999}};
  write_manifest(t.path / "m.json", e);
  const auto back = read_manifest(t.path / "m.json");
  REQUIRE(back.size() == 2);
  CHECK(back[1].file == "b.wav");
  CHECK(back[0].theta == 0.25);
  CHECK(back[1].measured_snr_db == 6.999);
  std::ofstream(t.path / "bad.json") << "{\"file\": 1}";
  CHECK_THROWS_AS(read_manifest(t.path / "bad.json"), FormatError);
}

TEST_CASE("clip corpus hits each target and writes manifests") {
  TempDir t("declip_clip");
  make_clean(t.path / "clean", 3);
  std::ofstream(t.path / "clean" / "notes.txt") << "ignored";
  ClipOptions opts;
  opts.snr_db = {3.0, 10.0};
  const auto s = clip_corpus(t.path / "clean", t.path / "clipped", opts);
  CHECK(s.skipped.empty());
  REQUIRE(s.entries.size() == 6);
  CHECK(read_manifest(t.path / "clipped" / "manifest.json").size() == 6);
  for (const char* d : {"3dB", "10dB"}) {
    const auto m = read_manifest(t.path / "clipped" / d / "manifest.json");
    REQUIRE(m.size() == 3);
    for (const auto& e : m) {
      const auto clean = read_wav(t.path / "clean" / e.file).wave;
      const auto clipped = read_wav(t.path / "clipped" / d / e.file).wave;
      INFO(d << "/" << e.file);
      // Independent SNR over the files as written.
      double sig = 0.0, err = 0.0, peak = 0.0;
      for (std::size_t i = 0; i < clean.size(); ++i) {
        sig += static_cast<double>(clean[i]) * clean[i];
        const double dlt = static_cast<double>(clipped[i]) - clean[i];
        err += dlt * dlt;
        peak = std::max(peak, std::fabs(static_cast<double>(clipped[i])));
      }
      const double measured = 10.0 * std::log10(sig / err);
      CHECK(std::fabs(measured - e.target_snr_db) <= opts.tol_db);
      CHECK(measured == Catch::Approx(e.measured_snr_db).margin(1e-9));
      CHECK(peak == e.theta);
      CHECK(e.theta * 32768.0 == std::round(e.theta * 32768.0));
      const auto mask = mask_for(clipped, e.theta, SampleFormat::Pcm16);
      std::size_t rail = 0;
      for (float v : clipped.samples) rail += std::fabs(v) == static_cast<float>(e.theta);
      CHECK(mask.clipped_count() == rail);
    }
  }
  ClipOptions none;
  none.snr_db.clear();
  CHECK_THROWS_AS(clip_corpus(t.path / "clean", t.path / "x", none), ValidationError);
  fs::create_directories(t.path / "empty");
  CHECK_THROWS_AS(clip_corpus(t.path / "empty", t.path / "x", opts), ValidationError);
}

TEST_CASE("declip corpus with both methods") {
  TempDir t("declip_declip");
  make_clean(t.path / "clean", 2, 8000);
  ClipOptions copts;
  copts.snr_db = {5.0};
  (void)clip_corpus(t.path / "clean", t.path / "clipped", copts);
  const auto in = t.path / "clipped" / "5dB";

  DeclipOptions a;
  a.method = Method::Aspade;
  const auto sa = declip_corpus(in, t.path / "aspade", a);
  CHECK(sa.skipped.empty());
  CHECK(sa.files.size() == 2);
  CHECK(sa.rtf == Catch::Approx(sa.runtime_s / sa.audio_s));
  for (const auto& f : sa.files) {
    const auto x = read_wav(in / f.file).wave;
    const auto y = read_wav(t.path / "aspade" / f.file).wave;
    const auto clean = read_wav(t.path / "clean" / f.file).wave;
    const auto m = read_manifest(in / "manifest.json");
    const auto mask = mask_for(x, m[0].file == f.file ? m[0].theta : m[1].theta, SampleFormat::Pcm16);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (mask[i] == ClipLabel::Reliable) CHECK(y[i] == x[i]);
    }
    CHECK(snr_db(clean, y).db() > snr_db(clean, x).db());
  }

  DeclipOptions d;
  d.method = Method::Ddd;
  CHECK_THROWS_AS(declip_corpus(in, t.path / "ddd", d), ValidationError);
  const auto cfg = testsig::small_config();
  demucs::write_weights(demucs::random_weights(cfg, 1), t.path / "w.dddw");
  d.weights = t.path / "w.dddw";
  d.format = SampleFormat::Float32;
  const auto sd = declip_corpus(in, t.path / "ddd", d);
  CHECK(sd.files.size() == 2);
  CHECK(read_wav(t.path / "ddd" / "utt0.wav").format == SampleFormat::Float32);

  DeclipOptions orphan;
  orphan.method = Method::Aspade;
  CHECK_THROWS_AS(declip_corpus(t.path / "clean", t.path / "o", orphan), ValidationError);
}

TEST_CASE("aspade at theta one leaves unclipped PCM untouched") {
  TempDir t("declip_identity");
  make_clean(t.path / "clean", 1, 6000);
  DeclipOptions a;
  a.theta = 1.0;
  (void)declip_corpus(t.path / "clean", t.path / "out", a);
  std::ifstream f1(t.path / "clean" / "utt0.wav", std::ios::binary), f2(t.path / "out" / "utt0.wav", std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)), {}), b2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(b1 == b2);
}

TEST_CASE("evaluation table") {
  TempDir t("declip_eval");
  make_clean(t.path / "clean", 2);
  write_wav(t.path / "clean" / "short.wav", testsig::speech_like(1000, 3));
  ClipOptions copts;
  copts.snr_db = {3.0};
  (void)clip_corpus(t.path / "clean", t.path / "clipped", copts);
  const auto clipped = t.path / "clipped" / "3dB";

  EvalOptions o;
  o.method = "identity";
  const auto s = eval_corpus(t.path / "clean", t.path / "clean", clipped, o);
  REQUIRE(s.rows.size() == 3);
  CHECK(s.rows[0].file == "short.wav");
  CHECK(std::isnan(s.rows[0].mrstft));
  for (const auto& r : s.rows) {
    CHECK(r.output_snr.is_infinite());
    CHECK(std::isinf(r.delta_snr_db));
    CHECK(r.input_snr.db() == Catch::Approx(3.0).margin(0.01));
    CHECK(r.clipped_samples > 0);
    CHECK(r.extrema_restored == r.extrema_clean);
  }
  const auto csv = eval_csv(s.rows);
  CHECK(csv.rfind(std::string(kEvalCsvHeader) + "\n", 0) == 0);
  CHECK(csv.find(",identity,inf,inf,") != std::string::npos);
  CHECK(csv.find("short.wav") != std::string::npos);
  CHECK(csv.find(",nan,") != std::string::npos);

  const auto j = nlohmann::json::parse(eval_json(s));
  CHECK(j["rows"].size() == 3);
  CHECK(j["aggregate"]["input_snr_db"]["count"] == 3);
  CHECK(j["aggregate"]["output_snr_db"]["count"] == 0);
  CHECK(j["aggregate"]["mrstft_distance"]["count"] == 2);
  CHECK(j["aggregate"]["mrstft_distance"]["mean"].get<double>() == Catch::Approx(0.0).margin(1e-12));

  fs::remove(clipped / "utt1.wav");
  const auto partial = eval_corpus(t.path / "clean", t.path / "clean", clipped, o);
  CHECK(partial.rows.size() == 2);
  REQUIRE(partial.skipped.size() == 1);
  CHECK(partial.skipped[0].find("utt1.wav") != std::string::npos);

  fs::remove(clipped / "manifest.json");
  EvalOptions asp;
  asp.method = "aspade";
  CHECK_THROWS_AS(eval_corpus(t.path / "clean", t.path / "clean", clipped, asp), ValidationError);
}

TEST_CASE("region spectrum of a bin-centred tone") {
  const auto x = testsig::sine(1000.0, 0.5, 16000);
  const auto rows = region_spectrum(x, 0.25, 0.75);
  REQUIRE(rows.size() == 1025);
  std::size_t best = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].magnitude_db > rows[best].magnitude_db) best = k;
  }
  CHECK(rows[best].frequency_hz == 1000.0);
  CHECK(rows[best].magnitude_db == Catch::Approx(20.0 * std::log10(0.5)).margin(0.05));
  CHECK(rows[600].magnitude_db < -80.0);

  const auto zero = region_spectrum(Waveform(std::vector<float>(4096, 0.0f)), 0.0, 0.2);
  for (const auto& r : zero) CHECK(r.magnitude_db == kSpectrumFloorDb);
  CHECK_THROWS_AS(region_spectrum(x, 0.5, 2.0), RangeError);
  CHECK_THROWS_AS(region_spectrum(x, 0.5, 0.4), ValidationError);
  CHECK(spectrum_csv(rows).rfind("frequency_hz,magnitude_db\n", 0) == 0);
}
