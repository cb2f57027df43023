// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "declip/waveform.hpp"

namespace declip {

enum class SampleFormat { Pcm16, Float32 };

struct WavData {
  Waveform wave;
  SampleFormat format = SampleFormat::Pcm16;
};

/// RIFF/WAVE decoding. Only mono 16 kHz PCM16 or IEEE float32 is accepted;
/// anything else raises ValidationError naming the unsupported property, and
/// structural damage raises FormatError.
[[nodiscard]] WavData decode_wav(std::span<const std::uint8_t> bytes, int required_rate = kDefaultSampleRate);
[[nodiscard]] WavData read_wav(const std::filesystem::path& path, int required_rate = kDefaultSampleRate);

/// PCM16 maps x to clamp(round(32768 x), -32768, 32767); reading divides by 32768.
[[nodiscard]] std::vector<std::uint8_t> encode_wav(const Waveform& w, SampleFormat format);
void write_wav(const std::filesystem::path& path, const Waveform& w, SampleFormat format = SampleFormat::Pcm16);

[[nodiscard]] std::int16_t quantize_pcm16(float x) noexcept;
inline constexpr double kPcm16Lsb = 1.0 / 32768.0;

}  // namespace declip
