// Copyright 2026 declip contributors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <memory>
#include <span>
#include <vector>

#include "declip/demucs/model.hpp"

namespace declip::demucs {

/// Sample-streaming inference over a shared model. Every stage keeps only the
/// history it still needs (conv input tails, LSTM carry, resampler windows,
/// transposed-conv overlap), so the emitted signal reproduces the whole-signal
/// forward pass. Output is released in blocks of hop * buffer_frames samples.
///
/// One state per stream; a state may move between threads but must not be
/// used concurrently.
class DemucsStream {
 public:
  DemucsStream(DemucsModel model, int buffer_frames);
  ~DemucsStream();
  DemucsStream(DemucsStream&&) noexcept;
  DemucsStream& operator=(DemucsStream&&) noexcept;

  /// Consumes `chunk` and returns every newly completed output block (possibly empty).
  std::vector<float> push(std::span<const float> chunk);
  /// Drains the tail so that emitted() == consumed(); the stream becomes terminal.
  std::vector<float> flush();
  /// Back to the freshly constructed state.
  void reset();

  [[nodiscard]] long consumed() const noexcept;
  [[nodiscard]] long emitted() const noexcept;
  [[nodiscard]] bool finished() const noexcept;
  [[nodiscard]] int buffer_frames() const noexcept;
  [[nodiscard]] long block_size() const noexcept;
  [[nodiscard]] long lookahead() const noexcept;
  /// Input samples still required before the next block is released.
  [[nodiscard]] long samples_until_next_block() const noexcept;
  [[nodiscard]] const DemucsModel& model() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace declip::demucs
