// core/include/fastvc/config.hpp

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

#ifndef FASTVC_CONFIG_HPP_
#define FASTVC_CONFIG_HPP_

#include <cstdint>
#include <string>

#include "fastvc/mel.hpp"
#include "fastvc/model.hpp"
#include "fastvc/nn.hpp"
#include "fastvc/vocoder.hpp"

namespace fastvc {

// Reconstruction pre-training of the autoencoder alone.
struct Stage1Config {
  AdamConfig optimizer{0.001, 0.9, 0.99, 1e-8};
  int epochs = 200;
  int batch = 16;
  long chunk = 8192;

  void Validate() const;
};

// End-to-end adversarial stage on top of a stage-1 warm start.
struct Stage2Config {
  AdamConfig optimizer{1e-4, 0.5, 0.9, 1e-8};
  int epochs = 200;
  int batch = 16;
  long chunk = 8192;
  double content_weight = 20.0;
  double feature_weight = 10.0;
  bool learnable_mel = false;

  void Validate() const;
};

// Optional adversarial speaker classifier on the codes. The classifier has
// its own optimizer; the encoder receives the negated classifier loss.
struct ConfusionConfig {
  bool enabled = false;
  double weight = 0.1;
  AdamConfig optimizer{0.001, 0.9, 0.99, 1e-8};
  int hidden = 256;

  void Validate() const;
};

struct ProbeConfig {
  int hidden = 256;
  double lr = 0.5;
  int max_iters = 2000;
  int patience = 10;
  double train_frac = 0.7;
  double val_frac = 0.1;

  void Validate() const;
};

// Everything one run needs, loadable from a single JSON file with
// command-line overrides. Serialized into every checkpoint and report.
struct RunConfig {
  uint64_t seed = 1234;
  MelFrontConfig mel;
  ModelConfig model;
  GeneratorConfig vocoder;
  DiscriminatorConfig discriminator;
  Stage1Config stage1;
  Stage2Config stage2;
  ConfusionConfig confusion;
  ProbeConfig probe;
  std::string data_dir;
  std::string out_dir;

  void Validate() const;
  std::string ToJson(int indent = -1) const;

  static RunConfig FromJson(const std::string& text);
  static RunConfig Load(const std::string& path);
};

// Applies "dotted.path=value" onto a config's JSON form; value is parsed as
// JSON when possible, else taken as a string.
RunConfig ApplyOverride(const RunConfig& cfg, const std::string& assignment);

}  // namespace fastvc

#endif  // FASTVC_CONFIG_HPP_
