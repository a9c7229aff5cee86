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

#include "curator/dsp.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <string>

#include <fftw3.h>

#include "curator/corpus.hpp"

namespace curator::dsp {

namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume little-endian");

template <typename T>
T read_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
void append_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

// FFTW planning is not thread-safe; execution on a plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

void AudioBuffer::validate() const {
  if (!(sample_rate > 0.0)) throw InvalidArgument("sample rate must be positive");
  for (double s : samples) {
    if (!std::isfinite(s)) throw InvalidArgument("audio buffer holds a non-finite sample");
  }
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CuratorError("cannot open '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 || bytes.compare(8, 4, "WAVE") != 0) {
    throw CuratorError("'" + path.string() + "' is not a RIFF/WAVE file");
  }

  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
  const char* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const auto id = bytes.substr(pos, 4);
    const auto size = read_le<std::uint32_t>(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw CuratorError("truncated WAV chunk in '" + path.string() + "'");
    if (id == "fmt ") {
      if (size < 16) throw CuratorError("short fmt chunk in '" + path.string() + "'");
      format = read_le<std::uint16_t>(bytes.data() + body);
      channels = read_le<std::uint16_t>(bytes.data() + body + 2);
      rate = read_le<std::uint32_t>(bytes.data() + body + 4);
      bits = read_le<std::uint16_t>(bytes.data() + body + 14);
      if (format == 0xFFFE && size >= 26) format = read_le<std::uint16_t>(bytes.data() + body + 24);
    } else if (id == "data") {
      data = bytes.data() + body;
      data_size = size;
    }
    pos = body + size + (size & 1U);
  }
  if (data == nullptr || rate == 0) throw CuratorError("'" + path.string() + "' lacks fmt or data");
  if (channels != 1) throw CuratorError("'" + path.string() + "' is not mono");

  AudioBuffer buf;
  buf.sample_rate = rate;
  if (format == 1 && bits == 16) {
    buf.samples.resize(data_size / 2);
    for (std::size_t i = 0; i < buf.samples.size(); ++i) {
      buf.samples[i] = read_le<std::int16_t>(data + 2 * i) / 32768.0;
    }
  } else if (format == 3 && bits == 32) {
    buf.samples.resize(data_size / 4);
    for (std::size_t i = 0; i < buf.samples.size(); ++i) {
      buf.samples[i] = read_le<float>(data + 4 * i);
    }
  } else {
    throw CuratorError("'" + path.string() + "': only 16-bit PCM and 32-bit float are supported");
  }
  buf.validate();
  return buf;
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& buffer) {
  buffer.validate();
  const auto n = static_cast<std::uint32_t>(buffer.samples.size());
  const auto rate = static_cast<std::uint32_t>(std::lround(buffer.sample_rate));
  std::string out;
  out.reserve(44 + 2 * static_cast<std::size_t>(n));
  out += "RIFF";
  append_le<std::uint32_t>(out, 36 + 2 * n);
  out += "WAVEfmt ";
  append_le<std::uint32_t>(out, 16);
  append_le<std::uint16_t>(out, 1);
  append_le<std::uint16_t>(out, 1);
  append_le<std::uint32_t>(out, rate);
  append_le<std::uint32_t>(out, rate * 2);
  append_le<std::uint16_t>(out, 2);
  append_le<std::uint16_t>(out, 16);
  out += "data";
  append_le<std::uint32_t>(out, 2 * n);
  for (double s : buffer.samples) {
    const auto q = std::clamp<long>(std::lround(std::clamp(s, -1.0, 1.0) * 32768.0), -32768, 32767);
    append_le<std::int16_t>(out, static_cast<std::int16_t>(q));
  }
  write_file_atomic(path, out);
}

AudioBuffer crop_audio(const AudioBuffer& buffer, double seconds, CropMode mode) {
  if (mode.kind == CropMode::Kind::full) return buffer;
  if (!(seconds > 0.0)) throw InvalidArgument("crop length must be positive");
  const auto want = static_cast<std::size_t>(std::llround(seconds * buffer.sample_rate));
  if (buffer.samples.size() < want) {
    throw InvalidArgument("buffer of " + std::to_string(buffer.duration()) +
                          " s is shorter than the requested " + std::to_string(seconds) + " s");
  }
  std::mt19937_64 rng(mode.seed);
  std::uniform_int_distribution<std::size_t> offset_dist(0, buffer.samples.size() - want);
  const auto offset = offset_dist(rng);
  AudioBuffer out;
  out.sample_rate = buffer.sample_rate;
  out.samples.assign(buffer.samples.begin() + static_cast<std::ptrdiff_t>(offset),
                     buffer.samples.begin() + static_cast<std::ptrdiff_t>(offset + want));
  return out;
}

std::size_t frame_count(std::size_t n, std::size_t window, std::size_t hop) noexcept {
  if (n <= window) return 1;
  return (n - window) / hop + 1;
}

Spectrogram stft_spectrogram(const AudioBuffer& buffer, const StftOptions& options) {
  if (buffer.samples.empty()) throw InvalidArgument("cannot transform an empty buffer");
  if (options.fft_size < 2 || options.window == 0 || options.hop == 0 ||
      options.window > options.fft_size) {
    throw InvalidArgument("invalid STFT parameters");
  }
  buffer.validate();

  const std::size_t n_fft = options.fft_size;
  const std::size_t bins = n_fft / 2 + 1;
  const std::size_t frames = frame_count(buffer.samples.size(), options.window, options.hop);

  std::vector<double> hann(options.window);
  for (std::size_t i = 0; i < hann.size(); ++i) {
    hann[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                   static_cast<double>(options.window));
  }

  std::unique_ptr<double, FftwDeleter> in(fftw_alloc_real(n_fft));
  std::unique_ptr<fftw_complex, FftwDeleter> out(fftw_alloc_complex(bins));
  Plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n_fft), in.get(), out.get(), FFTW_ESTIMATE));
  }
  if (!plan) throw CuratorError("FFTW planning failed");

  Matrix raw(bins, frames);
  const auto& x = buffer.samples;
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t offset = f * options.hop;
    std::fill(in.get(), in.get() + n_fft, 0.0);
    for (std::size_t i = 0; i < options.window && offset + i < x.size(); ++i) {
      in.get()[i] = x[offset + i] * hann[i];
    }
    fftw_execute(plan.get());
    for (std::size_t b = 0; b < bins; ++b) {
      const double mag = std::hypot(out.get()[b][0], out.get()[b][1]);
      raw(b, f) = options.log_compress ? std::log1p(mag) : mag;
    }
  }

  Spectrogram spec;
  spec.bin_hz = buffer.sample_rate / static_cast<double>(n_fft);
  spec.frame_hop = static_cast<double>(options.hop) / buffer.sample_rate;
  if (!options.target_frames || *options.target_frames == frames) {
    spec.values = std::move(raw);
    return spec;
  }

  const std::size_t target = *options.target_frames;
  spec.values = Matrix(bins, target, 0.0);
  if (target > frames) {
    const std::size_t pad_left = (target - frames) / 2;
    for (std::size_t b = 0; b < bins; ++b) {
      for (std::size_t f = 0; f < frames; ++f) spec.values(b, pad_left + f) = raw(b, f);
    }
  } else {
    const std::size_t skip = (frames - target) / 2;
    for (std::size_t b = 0; b < bins; ++b) {
      for (std::size_t f = 0; f < target; ++f) spec.values(b, f) = raw(b, skip + f);
    }
  }
  return spec;
}

void write_spectrogram(const std::filesystem::path& path, const Matrix& values) {
  std::string out;
  out.reserve(8 + 4 * values.rows() * values.cols());
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(values.rows()));
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(values.cols()));
  for (double v : values.data()) append_le<float>(out, static_cast<float>(v));
  write_file_atomic(path, out);
}

Matrix read_spectrogram(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CuratorError("cannot open '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 8) throw CuratorError("'" + path.string() + "': missing header");
  const auto rows = read_le<std::uint32_t>(bytes.data());
  const auto cols = read_le<std::uint32_t>(bytes.data() + 4);
  const std::size_t expected = 8 + 4 * static_cast<std::size_t>(rows) * cols;
  if (bytes.size() != expected) throw CuratorError("'" + path.string() + "': size mismatch");
  Matrix m(rows, cols);
  auto data = m.data();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = read_le<float>(bytes.data() + 8 + 4 * i);
  return m;
}

}  // namespace curator::dsp
