// core/include/fastvc/melfront.hpp

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

#ifndef FASTVC_MELFRONT_HPP_
#define FASTVC_MELFRONT_HPP_

#include "fastvc/mel.hpp"
#include "fastvc/nn.hpp"

namespace fastvc {

// Trainable front end. Two linear stages wrap fixed nonlinearities:
//   analysis   2*bins x win   strided convolution, cosine and sine banks
//   projection n_mels x bins  Mel filterbank matrix applied to magnitudes
// InitFromReference() sets both so the output reproduces ReferenceLogMel;
// training may then move them. Parameters are created frozen; the training
// stages decide when to unfreeze.
class MelFrontEnd {
 public:
  MelFrontEnd(ParameterStore& ps, const MelFrontConfig& cfg);

  void InitFromReference();
  // For parameters restored from a checkpoint rather than initialized here.
  void MarkInitialized() { initialized_ = true; }
  bool initialized() const { return initialized_; }

  // x: 1 x L waveform node. Returns n_mels x FrameCount(L) log-Mel node.
  ag::Var Apply(ag::Tape& t, ag::Var x) const;

  // Evaluation path on a private tape.
  MelSpectrogram Forward(const Waveform& w) const;

  const MelFrontConfig& cfg() const { return cfg_; }

 private:
  MelFrontConfig cfg_;
  Parameter* analysis_ = nullptr;
  Parameter* projection_ = nullptr;
  bool initialized_ = false;
};

}  // namespace fastvc

#endif  // FASTVC_MELFRONT_HPP_
