// core/include/fastvc/audio.hpp

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

#ifndef FASTVC_AUDIO_HPP_
#define FASTVC_AUDIO_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace fastvc {

/// Mono waveform with amplitudes nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 0;

  int64_t length() const { return static_cast<int64_t>(samples.size()); }
  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(length()) / sample_rate : 0.0;
  }
};

enum class WavEncoding { kPcm16, kFloat32 };

/// Reads a RIFF/WAVE file. Accepts PCM16 and IEEE float32; stereo input is
/// down-mixed by channel averaging.
Waveform ReadWav(const std::string& path);

void WriteWav(const std::string& path, const Waveform& w,
              WavEncoding encoding = WavEncoding::kPcm16);

/// Scales so the absolute peak equals `peak` (no-op on all-zero input).
void PeakNormalize(Waveform& w, double peak = 0.95);

double Rms(const Waveform& w);

}  // namespace fastvc

#endif  // FASTVC_AUDIO_HPP_
