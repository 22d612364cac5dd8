// tests/test_melfront.cpp

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
#include "fastvc/melfront.hpp"
#include "fastvc/rng.hpp"

using namespace fastvc;

namespace {

Waveform Noise(int rate, int n, uint64_t salt) {
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(static_cast<size_t>(n));
  Rng rng = Rng::Derive(400, {salt});
  for (double& s : w.samples) s = rng.Uniform(-0.9, 0.9);
  return w;
}

// Small geometry so finite differences stay cheap.
MelFrontConfig TinyCfg() {
  MelFrontConfig cfg;
  cfg.sample_rate = 22050;
  cfg.n_fft = 64;
  cfg.win = 64;
  cfg.hop = 16;
  cfg.n_mels = 8;
  cfg.f_max = 22050.0 / 2.0;
  return cfg;
}

double Loss(const MelFrontEnd& fe, const Eigen::MatrixXd& x,
            const Eigen::MatrixXd& w) {
  ag::Tape t(false);
  ag::Var mel = fe.Apply(t, t.Input(x));
  return (t.ValueOf(mel).array() * w.array()).sum();
}

}  // namespace

TEST_CASE("reference initialization reproduces the fixed front end") {
  MelFrontConfig cfg;
  ParameterStore ps;
  MelFrontEnd fe(ps, cfg);
  fe.InitFromReference();
  for (uint64_t i = 0; i < 10; ++i) {
    Waveform w = Noise(cfg.sample_rate, 22050, i);
    MelSpectrogram got = fe.Forward(w);
    MelSpectrogram want = ReferenceLogMel(w, cfg);
    REQUIRE(got.values.rows() == want.values.rows());
    REQUIRE(got.values.cols() == want.values.cols());
    CHECK((got.values - want.values).cwiseAbs().maxCoeff() < 1e-4);
  }
}

TEST_CASE("silence maps to the log floor") {
  MelFrontConfig cfg;
  ParameterStore ps;
  MelFrontEnd fe(ps, cfg);
  fe.InitFromReference();
  Waveform w;
  w.sample_rate = cfg.sample_rate;
  w.samples.assign(4096, 0.0);
  MelSpectrogram mel = fe.Forward(w);
  double floor = std::log(cfg.floor_eps);
  CHECK((mel.values.array() - floor).abs().maxCoeff() < 1e-4);
}

TEST_CASE("use before initialization is a state error") {
  MelFrontConfig cfg;
  ParameterStore ps;
  MelFrontEnd fe(ps, cfg);
  Waveform w = Noise(cfg.sample_rate, 4096, 3);
  CHECK_THROWS_AS(fe.Forward(w), StateError);
}

TEST_CASE("waveform rate must match the configuration") {
  MelFrontConfig cfg;
  ParameterStore ps;
  MelFrontEnd fe(ps, cfg);
  fe.InitFromReference();
  Waveform w = Noise(16000, 4096, 4);
  CHECK_THROWS_AS(fe.Forward(w), ArgumentError);
}

TEST_CASE("input node must be a single row") {
  MelFrontConfig cfg = TinyCfg();
  ParameterStore ps;
  MelFrontEnd fe(ps, cfg);
  fe.InitFromReference();
  ag::Tape t(false);
  ag::Var x = t.Input(Eigen::MatrixXd::Zero(2, 128));
  CHECK_THROWS_AS(fe.Apply(t, x), ShapeError);
}

TEST_CASE("shifting the input by one hop shifts the interior frames") {
  MelFrontConfig cfg;
  ParameterStore ps;
  MelFrontEnd fe(ps, cfg);
  fe.InitFromReference();
  Waveform w = Noise(cfg.sample_rate, 8192, 5);
  Waveform shifted;
  shifted.sample_rate = cfg.sample_rate;
  shifted.samples.assign(static_cast<size_t>(8192 + cfg.hop), 0.0);
  for (size_t i = 0; i < w.samples.size(); ++i) {
    shifted.samples[i + static_cast<size_t>(cfg.hop)] = w.samples[i];
  }
  MelSpectrogram a = fe.Forward(w);
  MelSpectrogram b = fe.Forward(shifted);
  int margin = cfg.win / cfg.hop;
  for (int t = margin; t < a.frames() - margin; ++t) {
    for (int m = 0; m < a.n_mels(); ++m) {
      CHECK(b.values(m, t + 1) ==
            doctest::Approx(a.values(m, t)).epsilon(1e-6));
    }
  }
}

TEST_CASE("analytic input gradient matches central differences") {
  MelFrontConfig cfg = TinyCfg();
  ParameterStore ps;
  MelFrontEnd fe(ps, cfg);
  fe.InitFromReference();

  const int len = 160;
  Rng rng = Rng::Derive(401, {0});
  Eigen::MatrixXd x(1, len);
  for (int i = 0; i < len; ++i) x(0, i) = rng.Uniform(-0.9, 0.9);
  Eigen::MatrixXd wgt(cfg.n_mels, cfg.FrameCount(len));
  for (int r = 0; r < wgt.rows(); ++r) {
    for (int c = 0; c < wgt.cols(); ++c) wgt(r, c) = rng.Uniform(-1.0, 1.0);
  }

  ag::Tape t(true);
  ag::Var xin = t.Input(x, true);
  ag::Var mel = fe.Apply(t, xin);
  ag::Var loss = t.Sum(t.Mul(mel, t.Input(wgt)));
  t.Backward(loss);
  Eigen::MatrixXd grad = t.GradOf(xin);

  const double h = 1e-5;
  double worst = 0.0;
  // Probe a spread of positions rather than every sample.
  for (int i = 0; i < len; i += 13) {
    Eigen::MatrixXd xp = x, xm = x;
    xp(0, i) += h;
    xm(0, i) -= h;
    double fd = (Loss(fe, xp, wgt) - Loss(fe, xm, wgt)) / (2.0 * h);
    double denom = std::max({std::abs(fd), std::abs(grad(0, i)), 1e-8});
    worst = std::max(worst, std::abs(fd - grad(0, i)) / denom);
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("unfrozen parameters move the output under one optimizer step") {
  MelFrontConfig cfg = TinyCfg();
  ParameterStore ps;
  MelFrontEnd fe(ps, cfg);
  fe.InitFromReference();
  // Created frozen; the caller opts in to training it.
  for (const auto& item : ps.items()) CHECK_FALSE(item->trainable);
  ps.SetTrainable("melfront.", true);

  Waveform w = Noise(cfg.sample_rate, 256, 6);
  Eigen::MatrixXd x(1, 256);
  for (int i = 0; i < 256; ++i) x(0, i) = w.samples[static_cast<size_t>(i)];

  MelSpectrogram before = fe.Forward(w);

  Adam opt(ps.Trainable(), AdamConfig{0.01, 0.9, 0.99, 1e-8});
  ag::Tape t(true);
  ag::Var mel = fe.Apply(t, t.Input(x));
  ag::Var loss = t.Mean(t.Square(mel));
  t.Backward(loss);
  opt.Step();

  MelSpectrogram after = fe.Forward(w);
  CHECK((after.values - before.values).cwiseAbs().maxCoeff() > 1e-8);
}
