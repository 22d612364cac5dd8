// core/include/fastvc/checkpoint.hpp

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

#ifndef FASTVC_CHECKPOINT_HPP_
#define FASTVC_CHECKPOINT_HPP_

#include <memory>
#include <string>

#include "fastvc/config.hpp"
#include "fastvc/corpus.hpp"
#include "fastvc/melfront.hpp"
#include "fastvc/model.hpp"
#include "fastvc/vocoder.hpp"

namespace fastvc {

struct StageTimings {
  double melfront_s = 0.0;
  double model_s = 0.0;
  double vocoder_s = 0.0;

  double total() const { return melfront_s + model_s + vocoder_s; }
};

// The assembled system: front end, autoencoder, vocoder, training-only
// heads, and the bookkeeping that must survive a save/load cycle. A loaded
// pipeline is immutable during conversion; training mutates it exclusively.
struct Pipeline {
  RunConfig cfg;
  SpeakerRegistry registry;
  ParameterStore params;
  std::unique_ptr<MelFrontEnd> melfront;
  std::unique_ptr<ConversionModel> model;
  std::unique_ptr<MelGanGenerator> vocoder;
  std::unique_ptr<DiscriminatorBank> discriminator;
  std::unique_ptr<SpeakerClassifier> classifier;  // confusion regularizer
  // Snapshot of the encoder taken when adversarial training starts; the
  // content term of that stage re-encodes generated audio with it. Frozen.
  std::unique_ptr<Encoder> ref_encoder;

  int epoch = 0;
  std::string stage = "init";  // init | ae | e2e
  int64_t steps_g = 0;  // generator-side optimizer steps
  int64_t steps_d = 0;  // discriminator optimizer steps
  int64_t steps_c = 0;  // confusion classifier optimizer steps

  static std::unique_ptr<Pipeline> Build(const RunConfig& cfg,
                                         const SpeakerRegistry& registry);

  // melfront -> encode(source) -> hold-upsample -> decode(target) ->
  // inverter. Input is resampled if its rate differs from the config.
  Waveform Convert(const Waveform& w, const std::string& source,
                   const std::string& target,
                   StageTimings* timings = nullptr,
                   bool use_griffin_lim = false,
                   int griffin_lim_iters = 60) const;
};

// Single-file archive: magic, format version, JSON header (configs,
// registry, counters), then named float32 little-endian row-major blobs.
// Saving rounds all parameters and optimizer moments to float32 in memory
// first, so a save/load cycle is a fixed point and resumed runs replay
// exactly.
void SaveCheckpoint(Pipeline& p, const std::string& path);
std::unique_ptr<Pipeline> LoadCheckpoint(const std::string& path);

// Reads just the embedded RunConfig of a checkpoint.
RunConfig PeekCheckpointConfig(const std::string& path);

// External parameter archives (for example a separately trained inverter):
// same container with a name-mapping header; values land in the matching
// parameters of the pipeline.
void SaveVocoderArchive(Pipeline& p, const std::string& path);
void ImportVocoderArchive(Pipeline& p, const std::string& path);

}  // namespace fastvc

#endif  // FASTVC_CHECKPOINT_HPP_
