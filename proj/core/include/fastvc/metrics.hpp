// core/include/fastvc/metrics.hpp

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

#ifndef FASTVC_METRICS_HPP_
#define FASTVC_METRICS_HPP_

#include <string>
#include <utility>
#include <vector>

#include "fastvc/checkpoint.hpp"
#include "fastvc/mel.hpp"

namespace fastvc {

// All built-in metrics are zero when both inputs are identical.

// Mean over all elements of the squared log-Mel difference.
double MelL2(const MelSpectrogram& a, const MelSpectrogram& b);

// Mean over frames of the standard dB-scaled cepstral distance; cepstra are
// an orthonormal cosine transform of the log-Mel columns, coefficient 0
// (overall energy) excluded.
double MelCepstralDistortion(const MelSpectrogram& a, const MelSpectrogram& b,
                             int n_coeffs = 13);

// Root-mean-square distance of dB magnitude spectra, averaged over frames.
double LogSpectralDistance(const Waveform& a, const Waveform& b,
                           const MelFrontConfig& cfg);

struct MetricStats {
  double mean = 0.0;
  double stddev = 0.0;
  int n = 0;
  bool available = false;
};

struct EvalReport {
  MetricStats mel_l2;
  MetricStats mcd;
  MetricStats lsd;
  MetricStats external;
  std::string external_cmd;
  int n_pairs = 0;
};

// Scores aligned (reference, degraded) pairs. Length differences up to one
// hop are trimmed; larger ones are an error. externally supplied scorer:
// an executable called as `scorer ref.wav deg.wav`, printing one decimal
// scalar; any failure marks that metric unavailable rather than aborting.
EvalReport ObjectiveEval(
    const std::vector<std::pair<Waveform, Waveform>>& pairs,
    const MelFrontConfig& cfg, const std::string& scorer_cmd = "");

std::string EvalReportJson(const EvalReport& r,
                           const std::string& run_config_json);
std::string EvalReportText(const EvalReport& r);

struct RtfResult {
  double audio_seconds = 0.0;
  // Per-stage medians over the timed repeats.
  double melfront_s = 0.0;
  double model_s = 0.0;
  double vocoder_s = 0.0;
  double total_s = 0.0;
  double rtf = 0.0;  // audio_seconds / total_s; > 1 is faster than real time
  int repeats = 0;
  std::string machine;
};

// Times one conversion per repeat after an untimed warm-up pass.
RtfResult BenchRtf(const Pipeline& p, const Waveform& w,
                   const std::string& source, const std::string& target,
                   int repeats);

std::string RtfResultJson(const RtfResult& r,
                          const std::string& run_config_json);
std::string RtfResultText(const RtfResult& r);

std::string MachineDescriptor();

}  // namespace fastvc

#endif  // FASTVC_METRICS_HPP_
