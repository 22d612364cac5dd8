// core/src/mel.cpp

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

#include "fastvc/mel.hpp"

#include <cmath>

#include "fastvc/error.hpp"
#include "fastvc/fft.hpp"

namespace fastvc {

void MelFrontConfig::Validate() const {
  if (sample_rate < 1) throw ConfigError("mel: sample_rate must be positive");
  if (hop < 1 || win < 1 || n_fft < 1) {
    throw ConfigError("mel: n_fft, win, hop must be positive");
  }
  if (!(hop <= win && win <= n_fft)) {
    throw ConfigError("mel: need hop <= win <= n_fft");
  }
  if (!IsPowerOfTwo(n_fft)) throw ConfigError("mel: n_fft must be 2^m");
  if (n_mels < 1) throw ConfigError("mel: n_mels must be positive");
  if (!(f_min >= 0.0 && f_min < f_max && f_max <= sample_rate / 2.0)) {
    throw ConfigError("mel: need 0 <= f_min < f_max <= sample_rate/2");
  }
  if (floor_eps <= 0.0) throw ConfigError("mel: floor must be positive");
}

std::vector<double> HannWindow(int n) {
  if (n < 1) throw ArgumentError("HannWindow: n must be positive");
  std::vector<double> w(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    w[static_cast<size_t>(i)] =
        0.5 - 0.5 * std::cos(2.0 * M_PI * i / n);
  }
  return w;
}

namespace {

// Piecewise Hz<->Mel map: linear up to 1 kHz, log-spaced above.
constexpr double kMelHzStep = 200.0 / 3.0;
constexpr double kMelLogHz = 1000.0;
constexpr double kMelLogMel = kMelLogHz / kMelHzStep;

double HzToMel(double hz) {
  if (hz < kMelLogHz) return hz / kMelHzStep;
  return kMelLogMel + std::log(hz / kMelLogHz) / (std::log(6.4) / 27.0);
}

double MelToHz(double mel) {
  if (mel < kMelLogMel) return mel * kMelHzStep;
  return kMelLogHz * std::exp((std::log(6.4) / 27.0) * (mel - kMelLogMel));
}

std::vector<double> MelBreakpoints(const MelFrontConfig& cfg) {
  std::vector<double> hz(static_cast<size_t>(cfg.n_mels) + 2);
  double lo = HzToMel(cfg.f_min);
  double hi = HzToMel(cfg.f_max);
  for (int i = 0; i < cfg.n_mels + 2; ++i) {
    hz[static_cast<size_t>(i)] =
        MelToHz(lo + (hi - lo) * i / (cfg.n_mels + 1));
  }
  return hz;
}

}  // namespace

Eigen::MatrixXd MelFilterbank(const MelFrontConfig& cfg) {
  cfg.Validate();
  std::vector<double> hz = MelBreakpoints(cfg);
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(cfg.n_mels, cfg.bins());
  for (int m = 0; m < cfg.n_mels; ++m) {
    double left = hz[static_cast<size_t>(m)];
    double center = hz[static_cast<size_t>(m) + 1];
    double right = hz[static_cast<size_t>(m) + 2];
    double area = 2.0 / (right - left);
    for (int k = 0; k < cfg.bins(); ++k) {
      double f = static_cast<double>(k) * cfg.sample_rate / cfg.n_fft;
      double up = (f - left) / (center - left);
      double down = (right - f) / (right - center);
      double wgt = std::min(up, down);
      if (wgt > 0.0) fb(m, k) = wgt * area;
    }
  }
  return fb;
}

std::vector<double> MelCenterFrequencies(const MelFrontConfig& cfg) {
  std::vector<double> hz = MelBreakpoints(cfg);
  return std::vector<double>(hz.begin() + 1, hz.end() - 1);
}

long BounceIndex(long p, long n) {
  if (n < 1) throw ArgumentError("BounceIndex: empty signal");
  if (n == 1) return 0;
  long period = 2 * (n - 1);
  p = ((p % period) + period) % period;
  return p < n ? p : period - p;
}

std::vector<long> AnalysisIndices(long n_samples, const MelFrontConfig& cfg) {
  if (n_samples < 1) throw ArgumentError("AnalysisIndices: empty signal");
  long frames = cfg.FrameCount(n_samples);
  long padded = (frames - 1) * cfg.hop + cfg.win;
  std::vector<long> idx(static_cast<size_t>(padded));
  long start = -(cfg.win / 2);
  for (long i = 0; i < padded; ++i) {
    idx[static_cast<size_t>(i)] = BounceIndex(start + i, n_samples);
  }
  return idx;
}

Eigen::MatrixXcd Stft(const std::vector<double>& samples,
                      const MelFrontConfig& cfg) {
  cfg.Validate();
  long n = static_cast<long>(samples.size());
  if (n < 1) throw ArgumentError("Stft: empty signal");
  std::vector<long> idx = AnalysisIndices(n, cfg);
  std::vector<double> window = HannWindow(cfg.win);
  long frames = cfg.FrameCount(n);
  Eigen::MatrixXcd out(cfg.bins(), frames);
  Fft fft(cfg.n_fft);
  std::vector<std::complex<double>> buf(static_cast<size_t>(cfg.n_fft));
  for (long t = 0; t < frames; ++t) {
    std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
    for (int i = 0; i < cfg.win; ++i) {
      buf[static_cast<size_t>(i)] =
          samples[static_cast<size_t>(idx[static_cast<size_t>(t * cfg.hop + i)])] *
          window[static_cast<size_t>(i)];
    }
    fft.Forward(buf);
    for (int k = 0; k < cfg.bins(); ++k) {
      out(k, t) = buf[static_cast<size_t>(k)];
    }
  }
  return out;
}

std::vector<double> Istft(const Eigen::MatrixXcd& spec,
                          const MelFrontConfig& cfg, long out_len) {
  cfg.Validate();
  if (spec.rows() != cfg.bins()) {
    throw ShapeError("Istft: expected " + std::to_string(cfg.bins()) +
                     " bins, got " + std::to_string(spec.rows()));
  }
  long frames = spec.cols();
  if (frames < 1) throw ArgumentError("Istft: no frames");
  long padded = (frames - 1) * cfg.hop + cfg.win;
  std::vector<double> acc(static_cast<size_t>(padded), 0.0);
  std::vector<double> norm(static_cast<size_t>(padded), 0.0);
  std::vector<double> window = HannWindow(cfg.win);
  Fft fft(cfg.n_fft);
  std::vector<std::complex<double>> buf(static_cast<size_t>(cfg.n_fft));
  for (long t = 0; t < frames; ++t) {
    for (int k = 0; k < cfg.bins(); ++k) {
      buf[static_cast<size_t>(k)] = spec(k, t);
    }
    // Hermitian completion of the one-sided spectrum.
    for (int k = cfg.bins(); k < cfg.n_fft; ++k) {
      buf[static_cast<size_t>(k)] =
          std::conj(buf[static_cast<size_t>(cfg.n_fft - k)]);
    }
    fft.Inverse(buf);
    for (int i = 0; i < cfg.win; ++i) {
      size_t pos = static_cast<size_t>(t * cfg.hop + i);
      double wi = window[static_cast<size_t>(i)];
      acc[pos] += wi * buf[static_cast<size_t>(i)].real();
      norm[pos] += wi * wi;
    }
  }
  long off = cfg.win / 2;
  if (out_len < 0 || off + out_len > padded) {
    throw ArgumentError("Istft: out_len exceeds the synthesizable span");
  }
  std::vector<double> out(static_cast<size_t>(out_len));
  for (long i = 0; i < out_len; ++i) {
    size_t pos = static_cast<size_t>(off + i);
    out[static_cast<size_t>(i)] =
        norm[pos] > 1e-9 ? acc[pos] / norm[pos] : 0.0;
  }
  return out;
}

MelSpectrogram ReferenceLogMel(const Waveform& w, const MelFrontConfig& cfg) {
  cfg.Validate();
  if (w.sample_rate != cfg.sample_rate) {
    throw ArgumentError("ReferenceLogMel: waveform at " +
                        std::to_string(w.sample_rate) + " Hz, config expects " +
                        std::to_string(cfg.sample_rate));
  }
  if (w.samples.empty()) throw ArgumentError("ReferenceLogMel: empty signal");
  Eigen::MatrixXcd spec = Stft(w.samples, cfg);
  Eigen::MatrixXd mag = spec.cwiseAbs();
  Eigen::MatrixXd energy = MelFilterbank(cfg) * mag;
  MelSpectrogram out;
  out.values = energy.array().max(cfg.floor_eps).log();
  out.frame_rate = cfg.frame_rate();
  out.hop = cfg.hop;
  return out;
}

}  // namespace fastvc
