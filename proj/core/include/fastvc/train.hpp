// core/include/fastvc/train.hpp

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

#ifndef FASTVC_TRAIN_HPP_
#define FASTVC_TRAIN_HPP_

#include <fstream>
#include <string>

#include "fastvc/checkpoint.hpp"
#include "fastvc/corpus.hpp"

namespace fastvc {

// Append-only CSV: step, epoch, term, value. Values are printed with full
// double precision so two runs can be compared byte for byte.
class MetricsLog {
 public:
  explicit MetricsLog(const std::string& path);

  void Append(int64_t step, int epoch, const std::string& term, double value);

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream os_;
};

struct TrainResult {
  std::string last_checkpoint;
  std::string metrics_path;
  // Total objective at the first and last optimizer step of this call.
  double initial_loss = 0.0;
  double final_loss = 0.0;
  int64_t steps_run = 0;
};

// Reconstruction pre-training of the autoencoder. The front end stays at its
// reference initialization and the inverter is untouched; source and target
// speaker are identical for every sample. Writes one checkpoint per epoch
// under cfg.out_dir and continues from p.epoch when resuming.
TrainResult TrainStage1(Pipeline& p, const PreparedDataset& data);

// Adversarial end-to-end stage on top of a completed reconstruction stage.
// The whole waveform-to-waveform path is the generator; critics and
// generator alternate one update each per batch. The content term re-encodes
// the generated waveform with the encoder as it was when this stage began.
TrainResult TrainStage2(Pipeline& p, const PreparedDataset& data);

}  // namespace fastvc

#endif  // FASTVC_TRAIN_HPP_
