// core/include/fastvc/vocoder.hpp

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

#ifndef FASTVC_VOCODER_HPP_
#define FASTVC_VOCODER_HPP_

#include <memory>
#include <vector>

#include "fastvc/mel.hpp"
#include "fastvc/nn.hpp"

namespace fastvc {

struct GeneratorConfig {
  // Product must equal the front end hop so frame count maps to sample
  // count exactly. Factors must be even (transposed-conv padding k/2).
  std::vector<int> upsample_factors = {8, 8, 2, 2};
  std::vector<int> dilations = {1, 3, 9};
  int base_width = 32;  // channels at the waveform-rate stage

  void Validate(int hop) const;
};

// Fully convolutional spectrogram inverter: one widening convolution, a
// chain of transposed-convolution upsampling stages each followed by dilated
// residual blocks, then a projection to one channel under tanh. All
// convolutions are weight-normalized. One forward pass per utterance; no
// per-sample recurrence.
class MelGanGenerator {
 public:
  MelGanGenerator(ParameterStore& ps, const GeneratorConfig& cfg, int n_mels,
                  int hop, uint64_t seed);

  // mel: n_mels x T -> waveform 1 x (hop * T).
  ag::Var Apply(ag::Tape& t, ag::Var mel) const;

  // Evaluation path; bounded memory via chunking with a receptive-field
  // halo, valid because interior outputs do not depend on far-away frames.
  Waveform Generate(const MelSpectrogram& mel, int sample_rate,
                    int chunk_frames = 64) const;

  int hop() const { return hop_; }
  // Frames of context around a chunk that can influence its samples.
  int HaloFrames() const { return halo_frames_; }

 private:
  GeneratorConfig cfg_;
  int n_mels_;
  int hop_;
  int halo_frames_;
  std::unique_ptr<Conv1dLayer> pre_;
  std::vector<ConvTranspose1dLayer> ups_;
  // res_[stage][block]: two dilated/pointwise convolutions plus a shortcut.
  struct ResBlock {
    std::unique_ptr<Conv1dLayer> dilated;
    std::unique_ptr<Conv1dLayer> pointwise;
    std::unique_ptr<Conv1dLayer> shortcut;
  };
  std::vector<std::vector<ResBlock>> res_;
  std::unique_ptr<Conv1dLayer> post_;
};

struct DiscriminatorConfig {
  int n_scales = 3;
  int base_width = 16;
  int max_width = 256;
  int n_strided = 3;
  int stride = 4;

  void Validate() const;
};

// Realness critics at n_scales temporal resolutions; scale i runs on the
// waveform average-pooled by 2^i. Each returns a score map plus the
// intermediate feature maps used for feature matching.
class DiscriminatorBank {
 public:
  DiscriminatorBank(ParameterStore& ps, const DiscriminatorConfig& cfg,
                    uint64_t seed);

  struct ScaleTape {
    ag::Var score;
    std::vector<ag::Var> features;
  };
  std::vector<ScaleTape> Apply(ag::Tape& t, ag::Var wave) const;

  struct ScaleOutput {
    Eigen::MatrixXd score;
    std::vector<Eigen::MatrixXd> features;
  };
  std::vector<ScaleOutput> Discriminate(const Waveform& w) const;

  // Smallest input giving every scale a nonempty score map over its full
  // receptive field.
  long MinInputLength() const;

 private:
  DiscriminatorConfig cfg_;
  struct Scale {
    std::vector<Conv1dLayer> convs;  // all but the score head
    std::unique_ptr<Conv1dLayer> head;
  };
  std::vector<Scale> scales_;
};

struct GriffinLimResult {
  Waveform audio;
  // Spectral convergence after each phase update (relative magnitude
  // mismatch of the current iterate).
  std::vector<double> residuals;
};

// Deterministic phase-reconstruction fallback: pseudo-inverts the Mel
// filterbank (transpose, rows renormalized), then alternates between the
// time domain and the target magnitudes starting from zero phase.
GriffinLimResult GriffinLim(const MelSpectrogram& mel,
                            const MelFrontConfig& cfg, int n_iters);

}  // namespace fastvc

#endif  // FASTVC_VOCODER_HPP_
