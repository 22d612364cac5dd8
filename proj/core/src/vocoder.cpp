// core/src/vocoder.cpp

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

#include "fastvc/vocoder.hpp"

#include <cmath>

#include "fastvc/error.hpp"

namespace fastvc {

static constexpr double kLeakySlope = 0.2;

// ---------------------------------------------------------------------------
// Generator
// ---------------------------------------------------------------------------

void GeneratorConfig::Validate(int hop) const {
  if (upsample_factors.empty()) {
    throw ConfigError("vocoder: need at least one upsampling stage");
  }
  long prod = 1;
  for (int f : upsample_factors) {
    if (f < 2 || f % 2 != 0) {
      throw ConfigError("vocoder: upsample factors must be even and >= 2");
    }
    prod *= f;
  }
  if (prod != hop) {
    throw ConfigError("vocoder: upsample factors multiply to " +
                      std::to_string(prod) + ", front end hop is " +
                      std::to_string(hop));
  }
  if (dilations.empty()) throw ConfigError("vocoder: need dilations");
  for (int d : dilations) {
    if (d < 1) throw ConfigError("vocoder: dilations must be >= 1");
  }
  if (base_width < 1) throw ConfigError("vocoder: base_width must be >= 1");
}

MelGanGenerator::MelGanGenerator(ParameterStore& ps,
                                 const GeneratorConfig& cfg, int n_mels,
                                 int hop, uint64_t seed)
    : cfg_(cfg), n_mels_(n_mels), hop_(hop) {
  cfg_.Validate(hop);
  int n_stages = static_cast<int>(cfg.upsample_factors.size());
  int ch = cfg.base_width << n_stages;
  pre_ = std::make_unique<Conv1dLayer>(ps, "vocoder.pre", seed, n_mels, ch, 7,
                                       1, 1, 3, 3, /*weight_norm=*/true);
  for (int i = 0; i < n_stages; ++i) {
    int f = cfg.upsample_factors[static_cast<size_t>(i)];
    int out = ch / 2;
    ups_.emplace_back(ps, "vocoder.up" + std::to_string(i), seed, ch, out,
                      2 * f, f, f / 2, /*weight_norm=*/true);
    std::vector<ResBlock> blocks;
    for (size_t j = 0; j < cfg.dilations.size(); ++j) {
      int d = cfg.dilations[j];
      std::string base = "vocoder.res" + std::to_string(i) + "_" +
                         std::to_string(j);
      ResBlock b;
      b.dilated = std::make_unique<Conv1dLayer>(ps, base + ".dilated", seed,
                                                out, out, 3, 1, d, -1, -1,
                                                /*weight_norm=*/true);
      b.pointwise = std::make_unique<Conv1dLayer>(ps, base + ".pointwise",
                                                  seed, out, out, 1, 1, 1, 0,
                                                  0, /*weight_norm=*/true);
      b.shortcut = std::make_unique<Conv1dLayer>(ps, base + ".shortcut", seed,
                                                 out, out, 1, 1, 1, 0, 0,
                                                 /*weight_norm=*/true);
      blocks.push_back(std::move(b));
    }
    res_.push_back(std::move(blocks));
    ch = out;
  }
  post_ = std::make_unique<Conv1dLayer>(ps, "vocoder.post", seed, ch, 1, 7, 1,
                                        1, 3, 3, /*weight_norm=*/true);

  // Receptive-field halo in input frames: widening conv, then each stage's
  // reach divided by the upsampling already applied. Rounded up plus one
  // frame of slack.
  double reach = 3.0;
  double applied = 1.0;
  int dil_sum = 0;
  for (int d : cfg.dilations) dil_sum += d;
  for (int i = 0; i < n_stages; ++i) {
    reach += 2.0 / applied;
    applied *= cfg.upsample_factors[static_cast<size_t>(i)];
    reach += static_cast<double>(dil_sum) / applied;
  }
  reach += 3.0 / applied;
  halo_frames_ = static_cast<int>(std::ceil(reach)) + 1;
}

ag::Var MelGanGenerator::Apply(ag::Tape& t, ag::Var mel) const {
  if (mel.rows() != n_mels_) {
    throw ShapeError("vocoder: input has " + std::to_string(mel.rows()) +
                     " channels, expected " + std::to_string(n_mels_));
  }
  ag::Var h = pre_->Apply(t, mel);
  for (size_t i = 0; i < ups_.size(); ++i) {
    h = ups_[i].Apply(t, t.LeakyRelu(h, kLeakySlope));
    for (const ResBlock& b : res_[i]) {
      ag::Var y = b.dilated->Apply(t, t.LeakyRelu(h, kLeakySlope));
      y = b.pointwise->Apply(t, t.LeakyRelu(y, kLeakySlope));
      h = t.Add(y, b.shortcut->Apply(t, h));
    }
  }
  return t.Tanh(post_->Apply(t, t.LeakyRelu(h, kLeakySlope)));
}

Waveform MelGanGenerator::Generate(const MelSpectrogram& mel, int sample_rate,
                                   int chunk_frames) const {
  if (chunk_frames < 1) throw ArgumentError("vocoder: chunk_frames >= 1");
  long frames = mel.frames();
  if (frames < 1) throw ArgumentError("vocoder: empty spectrogram");
  Waveform out;
  out.sample_rate = sample_rate;
  out.samples.resize(static_cast<size_t>(frames * hop_));
  long halo = halo_frames_;
  for (long a = 0; a < frames; a += chunk_frames) {
    long b = std::min(frames, a + chunk_frames);
    long ea = std::max(0L, a - halo);
    long eb = std::min(frames, b + halo);
    ag::Tape t(/*track_gradients=*/false);
    ag::Var piece = t.Input(mel.values.middleCols(ea, eb - ea));
    const ag::Matrix& wave = Apply(t, piece).val();
    for (long i = (a - ea) * hop_; i < (b - ea) * hop_; ++i) {
      out.samples[static_cast<size_t>(ea * hop_ + i)] = wave(0, i);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Discriminators
// ---------------------------------------------------------------------------

void DiscriminatorConfig::Validate() const {
  if (n_scales < 1) throw ConfigError("discriminator: n_scales must be >= 1");
  if (base_width < 1 || max_width < base_width) {
    throw ConfigError("discriminator: bad widths");
  }
  if (n_strided < 1 || stride < 2) {
    throw ConfigError("discriminator: need n_strided >= 1, stride >= 2");
  }
}

DiscriminatorBank::DiscriminatorBank(ParameterStore& ps,
                                     const DiscriminatorConfig& cfg,
                                     uint64_t seed)
    : cfg_(cfg) {
  cfg_.Validate();
  for (int s = 0; s < cfg.n_scales; ++s) {
    std::string base = "discriminator.scale" + std::to_string(s);
    Scale sc;
    int w = cfg.base_width;
    sc.convs.emplace_back(ps, base + ".conv0", seed, 1, w, 15, 1, 1, 7, 7,
                          /*weight_norm=*/true);
    int k = 4 * cfg.stride + 1;
    for (int i = 0; i < cfg.n_strided; ++i) {
      int out = std::min(w * cfg.stride, cfg.max_width);
      sc.convs.emplace_back(ps, base + ".conv" + std::to_string(i + 1), seed,
                            w, out, k, cfg.stride, 1, 2 * cfg.stride,
                            2 * cfg.stride, /*weight_norm=*/true);
      w = out;
    }
    sc.convs.emplace_back(ps,
                          base + ".conv" + std::to_string(cfg.n_strided + 1),
                          seed, w, w, 5, 1, 1, 2, 2, /*weight_norm=*/true);
    sc.head = std::make_unique<Conv1dLayer>(ps, base + ".head", seed, w, 1, 3,
                                            1, 1, 1, 1, /*weight_norm=*/true);
    scales_.push_back(std::move(sc));
  }
}

long DiscriminatorBank::MinInputLength() const {
  // Receptive field of one score output at the deepest scale.
  long rf = 1;
  long jump = 1;
  rf += (15 - 1) * jump;
  int k = 4 * cfg_.stride + 1;
  for (int i = 0; i < cfg_.n_strided; ++i) {
    rf += static_cast<long>(k - 1) * jump;
    jump *= cfg_.stride;
  }
  rf += (5 - 1) * jump;
  rf += (3 - 1) * jump;
  return rf << (cfg_.n_scales - 1);
}

std::vector<DiscriminatorBank::ScaleTape> DiscriminatorBank::Apply(
    ag::Tape& t, ag::Var wave) const {
  if (wave.rows() != 1) throw ShapeError("discriminator: input must be 1 x L");
  if (wave.cols() < MinInputLength()) {
    throw ArgumentError("discriminator: input of " +
                        std::to_string(wave.cols()) +
                        " samples is shorter than the receptive field " +
                        std::to_string(MinInputLength()));
  }
  std::vector<ScaleTape> out;
  ag::Var x = wave;
  for (size_t s = 0; s < scales_.size(); ++s) {
    if (s > 0) x = t.AvgPool1d(x, 2, 2, 0);
    ScaleTape st;
    ag::Var h = x;
    for (const Conv1dLayer& c : scales_[s].convs) {
      h = t.LeakyRelu(c.Apply(t, h), kLeakySlope);
      st.features.push_back(h);
    }
    st.score = scales_[s].head->Apply(t, h);
    out.push_back(std::move(st));
  }
  return out;
}

std::vector<DiscriminatorBank::ScaleOutput> DiscriminatorBank::Discriminate(
    const Waveform& w) const {
  ag::Tape t(/*track_gradients=*/false);
  ag::Matrix row(1, w.length());
  for (long i = 0; i < w.length(); ++i) {
    row(0, i) = w.samples[static_cast<size_t>(i)];
  }
  std::vector<ScaleTape> taped = Apply(t, t.Input(std::move(row)));
  std::vector<ScaleOutput> out;
  for (const ScaleTape& st : taped) {
    ScaleOutput o;
    o.score = st.score.val();
    for (ag::Var f : st.features) o.features.push_back(f.val());
    out.push_back(std::move(o));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Griffin-Lim
// ---------------------------------------------------------------------------

GriffinLimResult GriffinLim(const MelSpectrogram& mel,
                            const MelFrontConfig& cfg, int n_iters) {
  cfg.Validate();
  if (n_iters < 1) throw ArgumentError("GriffinLim: n_iters must be >= 1");
  if (mel.n_mels() != cfg.n_mels) {
    throw ShapeError("GriffinLim: spectrogram has " +
                     std::to_string(mel.n_mels()) + " channels, config says " +
                     std::to_string(cfg.n_mels));
  }
  // Pseudo-inverse of the filterbank: transpose with unit row mass.
  Eigen::MatrixXd fb = MelFilterbank(cfg);
  Eigen::MatrixXd pinv = fb.transpose();
  for (long m = 0; m < fb.rows(); ++m) {
    double mass = fb.row(m).sum();
    if (mass > 0.0) pinv.col(m) /= mass;
  }
  Eigen::MatrixXd target = pinv * mel.values.array().exp().matrix();
  long frames = mel.frames();
  long out_len = static_cast<long>(cfg.hop) * frames;

  GriffinLimResult result;
  result.residuals.reserve(static_cast<size_t>(n_iters));
  double target_norm = std::max(target.norm(), 1e-12);
  Eigen::MatrixXcd spec = target.cast<std::complex<double>>();
  for (int it = 0; it < n_iters; ++it) {
    std::vector<double> x = Istft(spec, cfg, out_len);
    Eigen::MatrixXcd est = Stft(x, cfg);
    result.residuals.push_back((est.cwiseAbs() - target).norm() /
                               target_norm);
    for (long t = 0; t < frames; ++t) {
      for (long k = 0; k < est.rows(); ++k) {
        double a = std::abs(est(k, t));
        std::complex<double> phase =
            a > 1e-12 ? est(k, t) / a : std::complex<double>(1.0, 0.0);
        spec(k, t) = target(k, t) * phase;
      }
    }
  }
  result.audio.sample_rate = cfg.sample_rate;
  result.audio.samples = Istft(spec, cfg, out_len);
  return result;
}

}  // namespace fastvc
