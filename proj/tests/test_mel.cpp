// tests/test_mel.cpp

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fastvc/error.hpp"
#include "fastvc/mel.hpp"
#include "fastvc/rng.hpp"

using namespace fastvc;

namespace {

Waveform Sine(double freq, int rate, int n, double amp = 0.8) {
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    w.samples[static_cast<size_t>(i)] =
        amp * std::sin(2.0 * M_PI * freq * i / rate);
  }
  return w;
}

Waveform Noise(int rate, int n, uint64_t salt) {
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(static_cast<size_t>(n));
  Rng rng = Rng::Derive(300, {salt});
  for (double& s : w.samples) s = rng.Uniform(-0.5, 0.5);
  return w;
}

// Mel scale in the same convention the filterbank documents: linear to
// 1 kHz, logarithmic above. Written out independently here.
double HzToMelSlaney(double hz) {
  if (hz < 1000.0) return hz * 3.0 / 200.0;
  return 15.0 + 27.0 * std::log(hz / 1000.0) / std::log(6.4);
}

}  // namespace

TEST_CASE("periodic Hann window matches its formula") {
  const int n = 16;
  std::vector<double> w = HannWindow(n);
  REQUIRE(w.size() == static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double want = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n);
    CHECK(w[static_cast<size_t>(i)] == doctest::Approx(want).epsilon(1e-12));
  }
  CHECK(w[0] == doctest::Approx(0.0));
  // Periodic windows overlap-add to a constant at half-window hop.
  double sum = 0.0;
  for (double v : w) sum += v;
  CHECK(sum == doctest::Approx(n / 2.0));
}

TEST_CASE("filterbank rows are nonnegative with increasing peak position") {
  MelFrontConfig cfg;
  Eigen::MatrixXd fb = MelFilterbank(cfg);
  REQUIRE(fb.rows() == cfg.n_mels);
  REQUIRE(fb.cols() == cfg.bins());
  CHECK(fb.minCoeff() >= 0.0);
  int prev_peak = -1;
  for (int m = 0; m < fb.rows(); ++m) {
    CHECK(fb.row(m).sum() > 0.0);  // every channel covers some bins
    int peak = 0;
    fb.row(m).maxCoeff(&peak);
    CHECK(peak >= prev_peak);
    prev_peak = peak;
  }
}

TEST_CASE("filterbank rows have equal area in frequency") {
  // A fine transform grid keeps the Riemann sums of the narrow low-band
  // triangles close to their true areas.
  MelFrontConfig cfg;
  cfg.n_fft = 8192;
  Eigen::MatrixXd fb = MelFilterbank(cfg);
  double df = static_cast<double>(cfg.sample_rate) / cfg.n_fft;
  for (int m = 1; m < fb.rows() - 1; ++m) {
    CHECK(fb.row(m).sum() * df == doctest::Approx(1.0).epsilon(0.03));
  }
}

TEST_CASE("center frequencies follow the documented scale") {
  MelFrontConfig cfg;
  std::vector<double> centers = MelCenterFrequencies(cfg);
  REQUIRE(centers.size() == static_cast<size_t>(cfg.n_mels));
  // Monotone, inside [f_min, f_max].
  for (size_t i = 1; i < centers.size(); ++i) {
    CHECK(centers[i] > centers[i - 1]);
  }
  CHECK(centers.front() > cfg.f_min);
  CHECK(centers.back() < cfg.f_max);
  // Evenly spaced on the Mel axis: consecutive differences agree.
  double d0 = HzToMelSlaney(centers[1]) - HzToMelSlaney(centers[0]);
  for (size_t i = 2; i < centers.size(); ++i) {
    double d = HzToMelSlaney(centers[i]) - HzToMelSlaney(centers[i - 1]);
    CHECK(d == doctest::Approx(d0).epsilon(1e-6));
  }
}

TEST_CASE("BounceIndex reflects without repeating the edge sample") {
  const long n = 5;
  CHECK(BounceIndex(0, n) == 0);
  CHECK(BounceIndex(4, n) == 4);
  CHECK(BounceIndex(-1, n) == 1);
  CHECK(BounceIndex(-2, n) == 2);
  CHECK(BounceIndex(5, n) == 3);
  CHECK(BounceIndex(6, n) == 2);
  CHECK(BounceIndex(7, n) == 1);
  // Stays in range over a long span on both sides.
  for (long p = -40; p < 40; ++p) {
    long i = BounceIndex(p, n);
    CHECK(i >= 0);
    CHECK(i < n);
  }
}

TEST_CASE("analysis indices cover every frame and stay in range") {
  MelFrontConfig cfg;
  const long n = 22050;
  std::vector<long> idx = AnalysisIndices(n, cfg);
  int frames = cfg.FrameCount(n);
  CHECK(frames == 87);  // ceil(22050 / 256)
  CHECK(idx.size() == static_cast<size_t>((frames - 1) * cfg.hop + cfg.win));
  for (long i : idx) {
    CHECK(i >= 0);
    CHECK(i < n);
  }
  // The center of frame t is sample t*hop: position t*hop - win/2 + win/2.
  CHECK(idx[static_cast<size_t>(cfg.win / 2)] == 0);
}

TEST_CASE("frame count is one per started hop") {
  MelFrontConfig cfg;
  CHECK(cfg.FrameCount(22050) == 87);
  CHECK(cfg.FrameCount(256) == 1);
  CHECK(cfg.FrameCount(257) == 2);
  CHECK(cfg.FrameCount(8192) == 32);
}

TEST_CASE("silence maps to the log floor exactly") {
  MelFrontConfig cfg;
  Waveform w;
  w.sample_rate = cfg.sample_rate;
  w.samples.assign(4096, 0.0);
  MelSpectrogram mel = ReferenceLogMel(w, cfg);
  CHECK(mel.n_mels() == cfg.n_mels);
  CHECK(mel.frames() == cfg.FrameCount(4096));
  double floor = std::log(cfg.floor_eps);
  for (int m = 0; m < mel.n_mels(); ++m) {
    for (int t = 0; t < mel.frames(); ++t) {
      CHECK(mel.values(m, t) == doctest::Approx(floor).epsilon(1e-12));
    }
  }
}

TEST_CASE("a pure tone peaks in the channel nearest its frequency") {
  MelFrontConfig cfg;
  Waveform w = Sine(1000.0, cfg.sample_rate, 22050);
  MelSpectrogram mel = ReferenceLogMel(w, cfg);
  std::vector<double> centers = MelCenterFrequencies(cfg);
  int want = 0;
  double best = 1e18;
  for (int m = 0; m < cfg.n_mels; ++m) {
    double d = std::abs(centers[static_cast<size_t>(m)] - 1000.0);
    if (d < best) {
      best = d;
      want = m;
    }
  }
  // Use an interior frame; edge frames see reflected padding.
  int t = mel.frames() / 2;
  int got = 0;
  mel.values.col(t).maxCoeff(&got);
  CHECK(std::abs(got - want) <= 1);
}

TEST_CASE("shifting the input by one hop shifts the interior frames") {
  MelFrontConfig cfg;
  Waveform w = Noise(cfg.sample_rate, 8192, 7);
  Waveform shifted;
  shifted.sample_rate = cfg.sample_rate;
  shifted.samples.assign(static_cast<size_t>(8192 + cfg.hop), 0.0);
  for (size_t i = 0; i < w.samples.size(); ++i) {
    shifted.samples[i + static_cast<size_t>(cfg.hop)] = w.samples[i];
  }
  MelSpectrogram a = ReferenceLogMel(w, cfg);
  MelSpectrogram b = ReferenceLogMel(shifted, cfg);
  // Frame t+1 of the shifted signal sees the same interior samples as
  // frame t of the original; edges differ through the reflection pad.
  int margin = cfg.win / cfg.hop;
  for (int t = margin; t < a.frames() - margin; ++t) {
    for (int m = 0; m < a.n_mels(); ++m) {
      CHECK(b.values(m, t + 1) ==
            doctest::Approx(a.values(m, t)).epsilon(1e-9));
    }
  }
}

TEST_CASE("every output is at or above the floor and finite") {
  MelFrontConfig cfg;
  Waveform w = Noise(cfg.sample_rate, 22050, 8);
  MelSpectrogram mel = ReferenceLogMel(w, cfg);
  double floor = std::log(cfg.floor_eps);
  for (int m = 0; m < mel.n_mels(); ++m) {
    for (int t = 0; t < mel.frames(); ++t) {
      CHECK(mel.values(m, t) >= floor - 1e-12);
      CHECK(std::isfinite(mel.values(m, t)));
    }
  }
}

TEST_CASE("raising the floor never lowers an output") {
  MelFrontConfig lo;
  MelFrontConfig hi;
  hi.floor_eps = 1e-2;
  Waveform w = Noise(lo.sample_rate, 8192, 9);
  MelSpectrogram a = ReferenceLogMel(w, lo);
  MelSpectrogram b = ReferenceLogMel(w, hi);
  for (int m = 0; m < a.n_mels(); ++m) {
    for (int t = 0; t < a.frames(); ++t) {
      CHECK(b.values(m, t) >= a.values(m, t) - 1e-12);
    }
  }
}

TEST_CASE("istft inverts stft on the interior") {
  MelFrontConfig cfg;
  Waveform w = Noise(cfg.sample_rate, 8192, 10);
  Eigen::MatrixXcd spec = Stft(w.samples, cfg);
  CHECK(spec.rows() == cfg.bins());
  CHECK(spec.cols() == cfg.FrameCount(8192));
  std::vector<double> back = Istft(spec, cfg, 8192);
  REQUIRE(back.size() == w.samples.size());
  // Away from the edges the squared-window normalization is exact.
  for (size_t i = static_cast<size_t>(cfg.win); i < back.size() - cfg.win;
       ++i) {
    CHECK(back[i] == doctest::Approx(w.samples[i]).epsilon(1e-6));
  }
}

TEST_CASE("stft of silence is zero") {
  MelFrontConfig cfg;
  std::vector<double> zeros(4096, 0.0);
  Eigen::MatrixXcd spec = Stft(zeros, cfg);
  CHECK(spec.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("config validation rejects inconsistent geometry") {
  MelFrontConfig cfg;
  cfg.win = 2048;  // window longer than the transform
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);
  MelFrontConfig cfg2;
  cfg2.hop = 0;
  CHECK_THROWS_AS(cfg2.Validate(), ConfigError);
  MelFrontConfig cfg3;
  cfg3.n_fft = 1000;  // not a power of two
  CHECK_THROWS_AS(cfg3.Validate(), ConfigError);
  MelFrontConfig cfg4;
  cfg4.f_max = 2.0e4;  // above Nyquist
  CHECK_THROWS_AS(cfg4.Validate(), ConfigError);
}
