/*
 * Copyright 2026 The Curator Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "curator/errors.hpp"
#include "curator/matrix.hpp"

namespace curator::dsp {

inline constexpr double kDefaultSampleRate = 16000.0;

/// Mono PCM samples in [-1, 1] nominal range.
struct AudioBuffer {
  std::vector<double> samples;
  double sample_rate = kDefaultSampleRate;

  [[nodiscard]] double duration() const noexcept {
    return static_cast<double>(samples.size()) / sample_rate;
  }

  /// Throws InvalidArgument on non-finite samples or a non-positive rate.
  void validate() const;
};

/// Reads a mono RIFF/WAVE file holding 16-bit PCM or 32-bit float samples.
AudioBuffer read_wav(const std::filesystem::path& path);

/// Writes 16-bit PCM (samples are clipped to [-1, 1]).
void write_wav(const std::filesystem::path& path, const AudioBuffer& buffer);

struct CropMode {
  enum class Kind { random, full } kind = Kind::full;
  std::uint64_t seed = 0;

  static CropMode random(std::uint64_t seed) { return {Kind::random, seed}; }
  static CropMode full() { return {Kind::full, 0}; }
};

/// Random mode: a window of exactly `seconds` at a seeded uniform offset.
/// Full mode: the input unchanged.
AudioBuffer crop_audio(const AudioBuffer& buffer, double seconds, CropMode mode);

struct StftOptions {
  std::size_t fft_size = 512;
  std::size_t window = 400;  // Hann window length, zero-padded to fft_size
  std::size_t hop = 160;
  std::optional<std::size_t> target_frames;  // center crop or zero pad the time axis
  bool log_compress = true;                  // log(1 + |X|) when set, |X| otherwise
};

/// Frequency bins x time frames magnitude spectrogram.
struct Spectrogram {
  Matrix values;  // rows: fft_size / 2 + 1 bins, cols: frames
  double bin_hz = 0.0;
  double frame_hop = 0.0;  // seconds

  [[nodiscard]] std::size_t bins() const noexcept { return values.rows(); }
  [[nodiscard]] std::size_t frames() const noexcept { return values.cols(); }
};

/// Number of STFT frames for `n` samples before crop or pad (at least 1).
std::size_t frame_count(std::size_t n, std::size_t window, std::size_t hop) noexcept;

/// Magnitude STFT with a periodic Hann window. Inputs shorter than one
/// window are zero-padded to a single frame.
Spectrogram stft_spectrogram(const AudioBuffer& buffer, const StftOptions& options = {});

/// Binary layout: rows and cols as uint32 little-endian, then row-major float32.
void write_spectrogram(const std::filesystem::path& path, const Matrix& values);
Matrix read_spectrogram(const std::filesystem::path& path);

}  // namespace curator::dsp
