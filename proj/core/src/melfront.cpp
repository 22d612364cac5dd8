// core/src/melfront.cpp

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

#include "fastvc/melfront.hpp"

#include <cmath>

#include "fastvc/error.hpp"

namespace fastvc {

// Keeps the magnitude differentiable at zero; small enough that a silent
// input still lands below the log floor after the Mel projection.
static constexpr double kMagnitudeDelta = 1e-12;

MelFrontEnd::MelFrontEnd(ParameterStore& ps, const MelFrontConfig& cfg)
    : cfg_(cfg) {
  cfg_.Validate();
  analysis_ = &ps.Create("melfront.analysis", 2 * cfg_.bins(), cfg_.win);
  projection_ = &ps.Create("melfront.projection", cfg_.n_mels, cfg_.bins());
  analysis_->trainable = false;
  projection_->trainable = false;
}

void MelFrontEnd::InitFromReference() {
  std::vector<double> window = HannWindow(cfg_.win);
  int bins = cfg_.bins();
  for (int k = 0; k < bins; ++k) {
    for (int n = 0; n < cfg_.win; ++n) {
      double phase = 2.0 * M_PI * k * n / cfg_.n_fft;
      double w = window[static_cast<size_t>(n)];
      analysis_->value(k, n) = w * std::cos(phase);
      analysis_->value(bins + k, n) = -w * std::sin(phase);
    }
  }
  projection_->value = MelFilterbank(cfg_);
  initialized_ = true;
}

ag::Var MelFrontEnd::Apply(ag::Tape& t, ag::Var x) const {
  if (!initialized_) {
    throw StateError("melfront: parameters not initialized");
  }
  if (x.rows() != 1) throw ShapeError("melfront: input must be 1 x L");
  long n = x.cols();
  std::vector<long> idx = AnalysisIndices(n, cfg_);
  std::vector<int> gather(idx.begin(), idx.end());
  ag::Var padded = t.GatherCols(x, std::move(gather));
  ag::Var spec = t.Conv1d(padded, t.Param(*analysis_), cfg_.win, cfg_.hop,
                          /*dilation=*/1, /*pad_left=*/0, /*pad_right=*/0);
  int bins = cfg_.bins();
  long frames = spec.cols();
  ag::Var re = t.Block(spec, 0, bins, 0, static_cast<int>(frames));
  ag::Var im = t.Block(spec, bins, bins, 0, static_cast<int>(frames));
  ag::Var mag =
      t.SqrtShift(t.Add(t.Square(re), t.Square(im)), kMagnitudeDelta);
  ag::Var mel = t.MatMul(t.Param(*projection_), mag);
  return t.LogFloor(mel, cfg_.floor_eps);
}

MelSpectrogram MelFrontEnd::Forward(const Waveform& w) const {
  if (w.sample_rate != cfg_.sample_rate) {
    throw ArgumentError("melfront: waveform at " +
                        std::to_string(w.sample_rate) + " Hz, config expects " +
                        std::to_string(cfg_.sample_rate));
  }
  if (w.samples.empty()) throw ArgumentError("melfront: empty signal");
  ag::Tape t;
  ag::Matrix row(1, static_cast<long>(w.samples.size()));
  for (long i = 0; i < row.cols(); ++i) {
    row(0, i) = w.samples[static_cast<size_t>(i)];
  }
  ag::Var y = Apply(t, t.Input(std::move(row)));
  MelSpectrogram out;
  out.values = y.val();
  out.frame_rate = cfg_.frame_rate();
  out.hop = cfg_.hop;
  return out;
}

}  // namespace fastvc
