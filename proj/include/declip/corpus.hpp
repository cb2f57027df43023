// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Corpus-level operations behind the command-line tool: clipped testset
// construction, batch declipping, evaluation tables and region spectra.

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "declip/aspade.hpp"
#include "declip/clipping.hpp"
#include "declip/wav.hpp"

namespace declip::corpus {

namespace fs = std::filesystem;

using Log = std::function<void(const std::string&)>;

struct ManifestEntry {
  std::string file;  // relative to the manifest's directory
  double target_snr_db = 0.0;
  double theta = 0.0;
  double measured_snr_db = 0.0;
};

[[nodiscard]] std::vector<ManifestEntry> read_manifest(const fs::path& path);
void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries);

/// *.wav files directly inside dir, sorted by filename.
[[nodiscard]] std::vector<fs::path> list_wavs(const fs::path& dir);

/// Mask of a signal clipped at theta, with half an LSB of slack for PCM16 data.
[[nodiscard]] ClipMask mask_for(const Waveform& x, double theta, SampleFormat format);

struct ClipOptions {
  std::vector<double> snr_db{1.0, 3.0, 7.0, 15.0};
  double tol_db = 0.01;
  SampleFormat format = SampleFormat::Pcm16;
  int jobs = 1;
  Log log;
};

struct ClipSummary {
  std::vector<ManifestEntry> entries;  // file paths relative to out_dir
  std::vector<std::string> skipped;
};

/// Writes out_dir/<snr>dB/<name>.wav for every input and SNR, a manifest.json in
/// each SNR directory, and out_dir/manifest.json covering all of them.
ClipSummary clip_corpus(const fs::path& in_dir, const fs::path& out_dir, const ClipOptions& opts);

enum class Method { Ddd, Aspade };
/// Throws ValidationError listing the valid names.
[[nodiscard]] Method parse_method(const std::string& name);
[[nodiscard]] std::string method_name(Method m);

struct DeclipOptions {
  Method method = Method::Aspade;
  std::optional<fs::path> weights;   // ddd
  std::optional<double> theta;       // aspade: overrides the manifest
  std::optional<fs::path> manifest;  // aspade: default in_dir/manifest.json
  aspade::AspadeConfig aspade;
  std::optional<SampleFormat> format;  // default: same as each input
  int jobs = 1;
  Log log;
};

struct FileRuntime {
  std::string file;
  double audio_s = 0.0;
  double runtime_s = 0.0;
};

struct DeclipSummary {
  std::vector<FileRuntime> files;
  std::vector<std::string> skipped;
  double audio_s = 0.0;
  double runtime_s = 0.0;
  double rtf = 0.0;
};

DeclipSummary declip_corpus(const fs::path& in_dir, const fs::path& out_dir, const DeclipOptions& opts);

struct EvalRow {
  std::string file;
  SnrDb input_snr = SnrDb::infinite();
  std::string method;
  SnrDb output_snr = SnrDb::infinite();
  double delta_snr_db = 0.0;  // +inf when the output is exact
  double mrstft = 0.0;        // NaN when shorter than the largest FFT
  std::size_t clipped_samples = 0;
  std::size_t extrema_clean = 0;
  std::size_t extrema_restored = 0;
};

inline constexpr const char* kEvalCsvHeader =
    "file,input_snr_db,method,output_snr_db,delta_snr_db,mrstft_distance,clipped_samples,extrema_clean,"
    "extrema_restored";

struct EvalOptions {
  std::string method = "unknown";
  int jobs = 1;
  Log log;
};

struct EvalSummary {
  std::vector<EvalRow> rows;  // sorted by file
  std::vector<std::string> skipped;
};

/// Rows for every filename present in all three directories. The saturated
/// regions come from clipped_dir/manifest.json when present, else from the
/// peak of each clipped file; method "aspade" requires the manifest.
EvalSummary eval_corpus(const fs::path& clean_dir, const fs::path& restored_dir, const fs::path& clipped_dir,
                        const EvalOptions& opts);

[[nodiscard]] std::string eval_csv(const std::vector<EvalRow>& rows);
/// Rows plus count / mean / median aggregates over finite values.
[[nodiscard]] std::string eval_json(const EvalSummary& s);

struct SpectrumRow {
  double frequency_hz = 0.0;
  double magnitude_db = 0.0;
};

inline constexpr double kSpectrumFloorDb = -140.0;

/// Hann-windowed amplitude spectrum of samples [start_s, end_s). Regions longer
/// than fft are power-averaged over half-overlapping frames.
[[nodiscard]] std::vector<SpectrumRow> region_spectrum(const Waveform& x, double start_s, double end_s,
                                                       std::size_t fft = 2048);
[[nodiscard]] std::string spectrum_csv(const std::vector<SpectrumRow>& rows);

}  // namespace declip::corpus
