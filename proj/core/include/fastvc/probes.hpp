// core/include/fastvc/probes.hpp

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

#ifndef FASTVC_PROBES_HPP_
#define FASTVC_PROBES_HPP_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fastvc/config.hpp"
#include "fastvc/corpus.hpp"

namespace fastvc {

// Code i summarizes the sample span [i*k*hop, (i+1)*k*hop); spans tile the
// utterance. Each code takes the phoneme with the largest temporal overlap
// with its span; exact ties go to the earlier-starting phoneme.
std::vector<std::string> LabelCodes(int n_codes,
                                    const PhonemeAlignment& align, int hop,
                                    int k);

// Column j of codes is one sample with labels[j] indexing a class inventory.
struct CodeDataset {
  Eigen::MatrixXd codes;
  std::vector<int> labels;

  int size() const { return static_cast<int>(labels.size()); }
};

// Seeded disjoint sample split in the configured proportions.
void SplitCodes(const CodeDataset& all, const ProbeConfig& cfg, uint64_t seed,
                CodeDataset* train, CodeDataset* val, CodeDataset* test);

struct ProbeReport {
  double accuracy = 0.0;
  double baseline_random = 0.0;  // 1 / n_classes, analytic
  double baseline_prior = 0.0;   // train-majority class frequency on test
  int n_classes = 0;
  int majority_class = 0;
  int n_train = 0;
  int n_val = 0;
  int n_test = 0;
  int iters_run = 0;
  std::vector<std::string> classes;
  // confusion(i, j): true class i predicted as j, counts over the test set.
  Eigen::MatrixXi confusion;
};

// Single-hidden-layer perceptron, full-batch gradient descent, early
// stopping on validation loss; evaluates on the test set and reports both
// chance baselines next to the accuracy.
ProbeReport TrainPhonemeProbe(const CodeDataset& train,
                              const CodeDataset& val,
                              const CodeDataset& test,
                              const ProbeConfig& cfg,
                              const std::vector<std::string>& classes,
                              uint64_t seed);

struct UtteranceCodes {
  Eigen::MatrixXd codes;  // d x T' for one utterance
  int speaker = 0;
  int utterance = 0;
};

struct SpeakerReport {
  double accuracy = 0.0;
  double chance = 0.0;  // 1 / n_speakers
  double gap = 0.0;     // accuracy - chance; sign carries no judgment
  int n_speakers = 0;
  int n_train = 0;
  int n_test = 0;
  int n_utterances = 0;
};

// Trains a fresh speaker classifier on codes from a training subset of
// utterances and scores individual held-out code frames. Reports the
// accuracy against chance without judging it.
SpeakerReport SpeakerIndependenceReport(
    const std::vector<UtteranceCodes>& utterances, int n_speakers,
    const ProbeConfig& cfg, uint64_t seed);

std::string ProbeReportJson(const ProbeReport& r,
                            const std::string& run_config_json);
std::string ProbeReportText(const ProbeReport& r);
std::string SpeakerReportJson(const SpeakerReport& r,
                              const std::string& run_config_json);
std::string SpeakerReportText(const SpeakerReport& r);

}  // namespace fastvc

#endif  // FASTVC_PROBES_HPP_
