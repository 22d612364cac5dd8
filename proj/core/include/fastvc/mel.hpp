// core/include/fastvc/mel.hpp

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

#ifndef FASTVC_MEL_HPP_
#define FASTVC_MEL_HPP_

#include <Eigen/Core>
#include <complex>
#include <vector>

#include "fastvc/audio.hpp"

namespace fastvc {

// Log-amplitude Mel features, channels x frames. Frame t is centered on
// sample t*hop of the source waveform.
struct MelSpectrogram {
  Eigen::MatrixXd values;  // n_mels x T, every entry >= log(floor)
  double frame_rate = 0.0;
  int hop = 0;

  int n_mels() const { return static_cast<int>(values.rows()); }
  int frames() const { return static_cast<int>(values.cols()); }
};

struct MelFrontConfig {
  int sample_rate = 22050;
  int n_fft = 1024;
  int hop = 256;
  int win = 1024;
  int n_mels = 80;
  double f_min = 0.0;
  double f_max = 11025.0;
  double floor_eps = 1e-5;
  bool trainable = false;

  void Validate() const;
  int bins() const { return n_fft / 2 + 1; }
  double frame_rate() const {
    return static_cast<double>(sample_rate) / hop;
  }
  // Centered framing: one frame per started hop.
  int FrameCount(long n_samples) const {
    return static_cast<int>((n_samples + hop - 1) / hop);
  }
};

// Periodic Hann window of length n.
std::vector<double> HannWindow(int n);

// Triangular Mel filterbank, n_mels x bins, area-normalized so that each
// row integrates to the same energy (Slaney convention; linear below 1 kHz,
// logarithmic above).
Eigen::MatrixXd MelFilterbank(const MelFrontConfig& cfg);

// Center frequency (Hz) of each Mel channel, used by tests to locate tones.
std::vector<double> MelCenterFrequencies(const MelFrontConfig& cfg);

// Maps position p of a virtually padded signal onto a concrete sample index
// in [0, n), reflecting at both edges without repeating the edge sample.
long BounceIndex(long p, long n);

// Sample indices feeding the analysis stage: positions -win/2 .. covering
// FrameCount(n) frames, reflection-padded. Length (T-1)*hop + win.
std::vector<long> AnalysisIndices(long n_samples, const MelFrontConfig& cfg);

// Magnitude-preserving complex STFT under the same framing, bins x T.
Eigen::MatrixXcd Stft(const std::vector<double>& samples,
                      const MelFrontConfig& cfg);

// Overlap-add inverse with squared-window normalization, trimmed to
// out_len samples aligned to the unpadded origin.
std::vector<double> Istft(const Eigen::MatrixXcd& spec,
                          const MelFrontConfig& cfg, long out_len);

// The fixed front end: magnitude STFT, Mel filterbank, natural log with a
// floor. Functions as the initialization target and test oracle for the
// trainable front end.
MelSpectrogram ReferenceLogMel(const Waveform& w, const MelFrontConfig& cfg);

}  // namespace fastvc

#endif  // FASTVC_MEL_HPP_
