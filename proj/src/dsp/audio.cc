// Copyright (c) 2026 The SVS Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "svs/dsp/audio.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace svs::dsp {

namespace {

uint32_t read_u32(const char* p) {
  uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

uint16_t read_u16(const char* p) {
  uint16_t v;
  std::memcpy(&v, p, 2);
  return v;
}

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

void validate(const AudioClip& audio) {
  require(audio.sample_rate > 0, "invalid audio: sample rate must be positive");
  require(audio.samples.allFinite(), "invalid audio: non-finite samples");
}

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open wav file: " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  require(bytes.size() >= 12 && std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
              std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
          "not a RIFF/WAVE file: " + path.string());

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const char* data = nullptr;
  size_t data_size = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* chunk = bytes.data() + pos;
    const uint32_t size = read_u32(chunk + 4);
    const size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      require(body + 16 <= bytes.size(), "truncated fmt chunk: " + path.string());
      format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      if (format == 0xFFFE && size >= 26)  // WAVE_FORMAT_EXTENSIBLE
        format = read_u16(bytes.data() + body + 24);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = std::min<size_t>(size, bytes.size() - body);
    }
    pos = body + size + (size & 1);
  }
  require(data != nullptr && channels > 0, "wav file lacks fmt/data: " + path.string());
  const bool pcm16 = format == 1 && bits == 16;
  const bool float32 = format == 3 && bits == 32;
  require(pcm16 || float32,
          "unsupported wav encoding (need 16-bit PCM or 32-bit float): " +
              path.string());

  const size_t frame_bytes = static_cast<size_t>(bits / 8) * channels;
  const size_t frames = data_size / frame_bytes;
  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.samples = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(frames));
  for (size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (uint16_t c = 0; c < channels; ++c) {
      const char* p = data + i * frame_bytes + c * (bits / 8);
      if (pcm16) {
        int16_t s;
        std::memcpy(&s, p, 2);
        acc += s / 32768.0;
      } else {
        float s;
        std::memcpy(&s, p, 4);
        acc += s;
      }
    }
    clip.samples(static_cast<Eigen::Index>(i)) = acc / channels;
  }
  validate(clip);
  return clip;
}

void write_wav(const std::filesystem::path& path, const AudioClip& audio) {
  validate(audio);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot write wav file: " + path.string());
  const uint32_t n = static_cast<uint32_t>(audio.samples.size());
  const uint32_t data_bytes = n * 2;
  out.write("RIFF", 4);
  put<uint32_t>(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  put<uint32_t>(out, 16);
  put<uint16_t>(out, 1);
  put<uint16_t>(out, 1);
  put<uint32_t>(out, static_cast<uint32_t>(audio.sample_rate));
  put<uint32_t>(out, static_cast<uint32_t>(audio.sample_rate) * 2);
  put<uint16_t>(out, 2);
  put<uint16_t>(out, 16);
  out.write("data", 4);
  put<uint32_t>(out, data_bytes);
  for (uint32_t i = 0; i < n; ++i) {
    const double s = std::clamp(audio.samples(i), -1.0, 1.0);
    put<int16_t>(out, static_cast<int16_t>(std::lrint(s * 32767.0)));
  }
  require(out.good(), "failed writing wav file: " + path.string());
}

AudioClip resample(const AudioClip& audio, int target_rate) {
  validate(audio);
  require(target_rate > 0, "target sample rate must be positive");
  if (audio.sample_rate == target_rate) return audio;

  const double ratio = static_cast<double>(target_rate) / audio.sample_rate;
  const double cutoff = std::min(1.0, ratio);  // relative to input Nyquist
  constexpr int kZeroCrossings = 16;
  const double half_width = kZeroCrossings / cutoff;
  const Eigen::Index in_len = audio.samples.size();
  const auto out_len = static_cast<Eigen::Index>(std::floor(in_len * ratio));

  AudioClip out;
  out.sample_rate = target_rate;
  out.samples = Eigen::VectorXd::Zero(out_len);
  for (Eigen::Index j = 0; j < out_len; ++j) {
    const double center = j / ratio;
    const auto lo = static_cast<Eigen::Index>(std::ceil(center - half_width));
    const auto hi = static_cast<Eigen::Index>(std::floor(center + half_width));
    double acc = 0.0;
    for (Eigen::Index i = std::max<Eigen::Index>(lo, 0);
         i <= std::min<Eigen::Index>(hi, in_len - 1); ++i) {
      const double x = (i - center) * cutoff;
      const double sinc = x == 0.0 ? 1.0 : std::sin(M_PI * x) / (M_PI * x);
      const double window =
          0.5 + 0.5 * std::cos(M_PI * (i - center) / half_width);
      acc += audio.samples(i) * cutoff * sinc * window;
    }
    out.samples(j) = acc;
  }
  return out;
}

AudioClip load_audio(const std::filesystem::path& path, int target_rate) {
  AudioClip clip = read_wav(path);
  if (clip.sample_rate != target_rate) clip = resample(clip, target_rate);
  return clip;
}

}  // namespace svs::dsp
