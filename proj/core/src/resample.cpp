// core/src/resample.cpp

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

#include "fastvc/resample.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "fastvc/error.hpp"

namespace fastvc {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

double Sinc(double x) {
  if (std::fabs(x) < 1e-12) return 1.0;
  double px = kPi * x;
  return std::sin(px) / px;
}

// Blackman window over [-half, half], zero outside.
double Blackman(double x, double half) {
  if (std::fabs(x) >= half) return 0.0;
  double t = (x / half + 1.0) * 0.5;  // [0, 1]
  return 0.42 - 0.5 * std::cos(2.0 * kPi * t) + 0.08 * std::cos(4.0 * kPi * t);
}

}  // namespace

Waveform Resample(const Waveform& w, int target_rate) {
  if (target_rate <= 0) {
    throw ArgumentError("Resample: target rate must be positive, got " +
                        std::to_string(target_rate));
  }
  if (w.sample_rate <= 0) {
    throw ArgumentError("Resample: input has no sample rate");
  }
  if (w.samples.empty()) {
    throw ArgumentError("Resample: input waveform is empty");
  }
  if (target_rate == w.sample_rate) return w;

  int64_t g = std::gcd<int64_t>(target_rate, w.sample_rate);
  int64_t up = target_rate / g;
  int64_t down = w.sample_rate / g;
  double ratio = static_cast<double>(up) / static_cast<double>(down);

  // Anti-alias cutoff at 95% of the narrower Nyquist, as a fraction of the
  // input rate. The sinc zero spacing is 1/(2*cutoff) input samples; keep
  // 16 lobes per side.
  double cutoff = 0.475 * std::min(1.0, ratio);
  int reach = static_cast<int>(std::ceil(16.0 / (2.0 * cutoff)));
  double window_half = reach + 1.0;

  int64_t in_len = w.length();
  int64_t out_len = (in_len * up + down - 1) / down;  // ceil

  Waveform out;
  out.sample_rate = target_rate;
  out.samples.resize(static_cast<size_t>(out_len));

  // Output sample n sits at input position n*down/up. Each output gathers a
  // windowed-sinc neighborhood; kernels are DC-normalized per phase so a
  // constant signal passes through exactly. Phase count is `up`, so the
  // kernel table stays modest even for ratios like 441/320.
  std::vector<std::vector<double>> phase_kernels(static_cast<size_t>(up));
  for (int64_t p = 0; p < up; ++p) {
    double frac = static_cast<double>(p * down % up) / static_cast<double>(up);
    std::vector<double>& k = phase_kernels[static_cast<size_t>(p)];
    k.resize(2 * reach + 2);
    double norm = 0.0;
    for (int j = -reach; j <= reach + 1; ++j) {
      double t = static_cast<double>(j) - frac;
      double h = Sinc(2.0 * cutoff * t) * Blackman(t, window_half);
      k[static_cast<size_t>(j + reach)] = h;
      norm += h;
    }
    for (double& h : k) h /= norm;
  }

  for (int64_t n = 0; n < out_len; ++n) {
    int64_t num = n * down;
    int64_t center = num / up;
    const std::vector<double>& k = phase_kernels[static_cast<size_t>(n % up)];
    double acc = 0.0;
    for (int j = -reach; j <= reach + 1; ++j) {
      int64_t idx = center + j;
      if (idx < 0 || idx >= in_len) continue;  // zero beyond the edges
      acc += k[static_cast<size_t>(j + reach)] *
             w.samples[static_cast<size_t>(idx)];
    }
    out.samples[static_cast<size_t>(n)] = acc;
  }
  return out;
}

}  // namespace fastvc
