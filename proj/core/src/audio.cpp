// core/src/audio.cpp

// Copyright 2026  FastVC Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "fastvc/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "fastvc/error.hpp"

namespace fastvc {

namespace {

uint32_t ReadU32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t ReadU16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
}

void PutU16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
}

float BitsToFloat(uint32_t bits) {
  float f;
  std::memcpy(&f, &bits, sizeof(f));
  return f;
}

uint32_t FloatToBits(float f) {
  uint32_t bits;
  std::memcpy(&bits, &f, sizeof(bits));
  return bits;
}

}  // namespace

Waveform ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("ReadWav: cannot open '" + path + "'");
  std::vector<uint8_t> data((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
  if (data.size() < 44 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
      std::memcmp(data.data() + 8, "WAVE", 4) != 0) {
    throw ValidationError("ReadWav: '" + path + "' is not a RIFF/WAVE file");
  }

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const uint8_t* samples = nullptr;
  size_t data_len = 0;
  bool have_fmt = false;

  size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const uint8_t* chunk = data.data() + pos;
    uint32_t chunk_len = ReadU32(chunk + 4);
    const uint8_t* body = chunk + 8;
    if (pos + 8 + chunk_len > data.size()) {
      chunk_len = static_cast<uint32_t>(data.size() - pos - 8);
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0 && chunk_len >= 16) {
      format = ReadU16(body);
      channels = ReadU16(body + 2);
      rate = ReadU32(body + 4);
      bits = ReadU16(body + 14);
      // WAVE_FORMAT_EXTENSIBLE wraps the real format in a sub-GUID.
      if (format == 0xfffe && chunk_len >= 26) {
        format = ReadU16(body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      samples = body;
      data_len = chunk_len;
    }
    pos += 8 + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  if (!have_fmt || samples == nullptr) {
    throw ValidationError("ReadWav: '" + path + "' lacks fmt or data chunk");
  }
  if (channels == 0 || rate == 0) {
    throw ValidationError("ReadWav: '" + path + "' has a malformed fmt chunk");
  }

  Waveform w;
  w.sample_rate = static_cast<int>(rate);

  if (format == 1 && bits == 16) {
    size_t n_frames = data_len / (2 * channels);
    w.samples.resize(n_frames);
    for (size_t i = 0; i < n_frames; ++i) {
      double acc = 0.0;
      for (int c = 0; c < channels; ++c) {
        const uint8_t* p = samples + (i * channels + c) * 2;
        int16_t v = static_cast<int16_t>(p[0] | (p[1] << 8));
        acc += static_cast<double>(v) / 32768.0;
      }
      w.samples[i] = acc / channels;
    }
  } else if (format == 3 && bits == 32) {
    size_t n_frames = data_len / (4 * channels);
    w.samples.resize(n_frames);
    for (size_t i = 0; i < n_frames; ++i) {
      double acc = 0.0;
      for (int c = 0; c < channels; ++c) {
        const uint8_t* p = samples + (i * channels + c) * 4;
        acc += static_cast<double>(BitsToFloat(ReadU32(p)));
      }
      w.samples[i] = acc / channels;
    }
  } else {
    throw ValidationError("ReadWav: '" + path +
                          "' uses an unsupported encoding (format=" +
                          std::to_string(format) +
                          ", bits=" + std::to_string(bits) +
                          "); expected PCM16 or float32");
  }

  if (w.samples.empty()) {
    throw ValidationError("ReadWav: '" + path + "' contains no samples");
  }
  return w;
}

void WriteWav(const std::string& path, const Waveform& w,
              WavEncoding encoding) {
  if (w.sample_rate <= 0) {
    throw ArgumentError("WriteWav: sample rate must be positive");
  }
  const uint16_t channels = 1;
  uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : 32;
  uint16_t fmt = encoding == WavEncoding::kPcm16 ? 1 : 3;
  uint32_t n = static_cast<uint32_t>(w.samples.size());
  uint32_t bytes_per_sample = bits / 8;
  uint32_t data_len = n * bytes_per_sample;

  std::vector<uint8_t> out;
  out.reserve(44 + data_len);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  PutU32(out, 36 + data_len);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  PutU32(out, 16);
  PutU16(out, fmt);
  PutU16(out, channels);
  PutU32(out, static_cast<uint32_t>(w.sample_rate));
  PutU32(out, static_cast<uint32_t>(w.sample_rate) * bytes_per_sample);
  PutU16(out, static_cast<uint16_t>(bytes_per_sample));
  PutU16(out, bits);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  PutU32(out, data_len);

  if (encoding == WavEncoding::kPcm16) {
    for (double s : w.samples) {
      double clamped = std::clamp(s, -1.0, 1.0);
      int v = static_cast<int>(std::lrint(clamped * 32767.0));
      PutU16(out, static_cast<uint16_t>(static_cast<int16_t>(v)));
    }
  } else {
    for (double s : w.samples) {
      PutU32(out, FloatToBits(static_cast<float>(s)));
    }
  }

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("WriteWav: cannot open '" + path + "' for writing");
  os.write(reinterpret_cast<const char*>(out.data()),
           static_cast<std::streamsize>(out.size()));
  if (!os) throw IoError("WriteWav: short write to '" + path + "'");
}

void PeakNormalize(Waveform& w, double peak) {
  double maxabs = 0.0;
  for (double s : w.samples) maxabs = std::max(maxabs, std::fabs(s));
  if (maxabs <= 0.0) return;
  double scale = peak / maxabs;
  for (double& s : w.samples) s *= scale;
}

double Rms(const Waveform& w) {
  if (w.samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : w.samples) acc += s * s;
  return std::sqrt(acc / static_cast<double>(w.samples.size()));
}

}  // namespace fastvc
