// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "declip/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "binary_io.hpp"
#include "declip/errors.hpp"

namespace declip {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

bool tag_is(std::span<const std::uint8_t> s, const char* tag) { return std::memcmp(s.data(), tag, 4) == 0; }

}  // namespace

std::int16_t quantize_pcm16(float x) noexcept {
  const double v = std::nearbyint(static_cast<double>(x) * 32768.0);
  return static_cast<std::int16_t>(std::clamp(v, -32768.0, 32767.0));
}

WavData decode_wav(std::span<const std::uint8_t> bytes, int required_rate) {
  bin::ByteReader r(bytes, "WAV file");
  if (!tag_is(r.take(4, "RIFF tag"), "RIFF")) throw FormatError("not a RIFF file");
  r.get<std::uint32_t>("RIFF size");
  if (!tag_is(r.take(4, "WAVE tag"), "WAVE")) throw FormatError("RIFF file is not WAVE");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::span<const std::uint8_t> data;
  bool have_data = false;
  while (r.remaining() >= 8) {
    const auto id = r.take(4, "chunk id");
    const auto size = r.get<std::uint32_t>("chunk size");
    if (tag_is(id, "data") && size == 0xFFFFFFFFu) {
      data = r.take(r.remaining(), "data");  // streaming writers leave the size unset
      have_data = true;
      break;
    }
    if (size > r.remaining()) throw FormatError("WAV chunk truncated");
    const auto body = r.take(size, "chunk body");
    if (size % 2 == 1 && r.remaining() > 0) r.take(1, "pad byte");
    if (tag_is(id, "fmt ")) {
      if (size < 16) throw FormatError("fmt chunk too short");
      bin::ByteReader f(body, "fmt chunk");
      format = f.get<std::uint16_t>("format");
      channels = f.get<std::uint16_t>("channels");
      rate = f.get<std::uint32_t>("sample rate");
      f.get<std::uint32_t>("byte rate");
      f.get<std::uint16_t>("block align");
      bits = f.get<std::uint16_t>("bits per sample");
      if (format == kFormatExtensible) {
        if (size < 40) throw FormatError("extensible fmt chunk too short");
        f.take(8, "extension header");
        format = f.get<std::uint16_t>("sub-format");
      }
      have_fmt = true;
    } else if (tag_is(id, "data")) {
      data = body;
      have_data = true;
    }
  }
  if (!have_fmt) throw FormatError("WAV file has no fmt chunk");
  if (!have_data) throw FormatError("WAV file has no data chunk");
  if (channels != 1) throw ValidationError("unsupported channel count " + std::to_string(channels) + " (mono only)");
  if (static_cast<int>(rate) != required_rate) {
    throw ValidationError("unsupported sample rate " + std::to_string(rate) + " Hz (need " +
                          std::to_string(required_rate) + " Hz)");
  }

  WavData out;
  out.wave.sample_rate = static_cast<int>(rate);
  if (format == kFormatPcm && bits == 16) {
    out.format = SampleFormat::Pcm16;
    const std::size_t n = data.size() / 2;
    out.wave.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::int16_t v;
      std::memcpy(&v, data.data() + 2 * i, 2);
      out.wave.samples[i] = static_cast<float>(v / 32768.0);
    }
  } else if (format == kFormatFloat && bits == 32) {
    out.format = SampleFormat::Float32;
    const std::size_t n = data.size() / 4;
    out.wave.samples.resize(n);
    std::memcpy(out.wave.samples.data(), data.data(), n * 4);
    require_finite(out.wave.view(), "WAV float payload");
  } else {
    throw ValidationError("unsupported sample format (format tag " + std::to_string(format) + ", " +
                          std::to_string(bits) + " bits); need PCM16 or float32");
  }
  return out;
}

WavData read_wav(const std::filesystem::path& path, int required_rate) {
  try {
    return decode_wav(bin::read_file(path), required_rate);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(const Waveform& w, SampleFormat format) {
  require_finite(w.view(), "encode_wav");
  const std::uint16_t bits = format == SampleFormat::Pcm16 ? 16 : 32;
  const std::uint16_t align = bits / 8;
  const auto data_bytes = static_cast<std::uint32_t>(w.size() * align);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  auto tag = [&](const char* t) { out.insert(out.end(), t, t + 4); };
  tag("RIFF");
  bin::put<std::uint32_t>(out, 36 + data_bytes);
  tag("WAVE");
  tag("fmt ");
  bin::put<std::uint32_t>(out, 16);
  bin::put<std::uint16_t>(out, format == SampleFormat::Pcm16 ? kFormatPcm : kFormatFloat);
  bin::put<std::uint16_t>(out, 1);
  bin::put<std::uint32_t>(out, static_cast<std::uint32_t>(w.sample_rate));
  bin::put<std::uint32_t>(out, static_cast<std::uint32_t>(w.sample_rate) * align);
  bin::put<std::uint16_t>(out, align);
  bin::put<std::uint16_t>(out, bits);
  tag("data");
  bin::put<std::uint32_t>(out, data_bytes);
  if (format == SampleFormat::Pcm16) {
    for (float v : w.samples) bin::put<std::int16_t>(out, quantize_pcm16(v));
  } else {
    bin::put_floats(out, w.samples);
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const Waveform& w, SampleFormat format) {
  bin::write_file_atomic(path, encode_wav(w, format));
}

}  // namespace declip
