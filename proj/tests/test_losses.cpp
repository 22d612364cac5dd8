// tests/test_losses.cpp

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
#include "fastvc/losses.hpp"
#include "fastvc/rng.hpp"

using namespace fastvc;
namespace agx = fastvc::ag;

namespace {

ModelConfig TinyModel() {
  ModelConfig cfg;
  cfg.n_mels = 8;
  cfg.bottleneck.d = 4;
  cfg.bottleneck.k = 2;
  cfg.enc_conv_width = 8;
  cfg.enc_conv_layers = 2;
  cfg.enc_kernel = 3;
  cfg.dec_lstm_width = 8;
  cfg.dec_conv_width = 8;
  cfg.dec_conv_layers = 1;
  cfg.dec_lstm_layers = 1;
  cfg.postnet_width = 8;
  cfg.postnet_layers = 2;
  cfg.postnet_kernel = 3;
  return cfg;
}

Eigen::MatrixXd RandomMat(int r, int c, uint64_t salt) {
  Rng rng = Rng::Derive(1000, {salt});
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) m(i, j) = rng.Uniform(-2.0, 2.0);
  }
  return m;
}

}  // namespace

TEST_CASE("content distance is zero only for identical codes") {
  Eigen::MatrixXd a = RandomMat(4, 6, 1);
  CHECK(ContentLoss(a, a) == 0.0);

  Eigen::MatrixXd b = a;
  b(2, 3) += 0.5;
  CHECK(ContentLoss(a, b) == doctest::Approx(0.25));

  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
  CHECK(ContentLoss(eye, zero) == doctest::Approx(2.0));
}

TEST_CASE("content distance rejects mismatched shapes") {
  CHECK_THROWS_AS(ContentLoss(RandomMat(4, 6, 2), RandomMat(4, 5, 3)),
                  ShapeError);
  CHECK_THROWS_AS(ContentLoss(RandomMat(4, 6, 2), RandomMat(3, 6, 3)),
                  ShapeError);
}

TEST_CASE("the tape content distance matches the eval one") {
  Eigen::MatrixXd a = RandomMat(4, 6, 4);
  Eigen::MatrixXd b = RandomMat(4, 6, 5);
  agx::Tape t(false);
  agx::Var v = ContentLossTape(t, t.Input(a), t.Input(b));
  CHECK(v.scalar() == doctest::Approx(ContentLoss(a, b)).epsilon(1e-12));
}

TEST_CASE("mse and l1 are per-element means") {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 1, 2, 3, 4;
  b << 0, 2, 3, 2;
  agx::Tape t(false);
  CHECK(MseLoss(t, t.Input(a), t.Input(b)).scalar() ==
        doctest::Approx((1.0 + 0.0 + 0.0 + 4.0) / 4.0));
  CHECK(L1Loss(t, t.Input(a), t.Input(b)).scalar() ==
        doctest::Approx((1.0 + 0.0 + 0.0 + 2.0) / 4.0));
}

TEST_CASE("stage one loss decomposes into its three terms") {
  ParameterStore ps;
  ConversionModel model(ps, TinyModel(), 2, 42);
  Eigen::MatrixXd mel = RandomMat(8, 12, 6);
  agx::Tape t(true);
  Stage1Terms terms = Stage1Loss(t, model, t.Input(mel), 0);
  double post = terms.post.scalar();
  double pre = terms.pre.scalar();
  double content = terms.content.scalar();
  CHECK(post >= 0.0);
  CHECK(pre >= 0.0);
  CHECK(content >= 0.0);
  CHECK(terms.total.scalar() ==
        doctest::Approx(post + pre + content).epsilon(1e-12));
}

TEST_CASE("one optimizer step decreases the stage one loss on a fixed batch") {
  ParameterStore ps;
  ConversionModel model(ps, TinyModel(), 2, 43);
  Eigen::MatrixXd mel = RandomMat(8, 16, 7);

  double before;
  {
    agx::Tape t(true);
    Stage1Terms terms = Stage1Loss(t, model, t.Input(mel), 0);
    before = terms.total.scalar();
    t.Backward(terms.total);
  }
  Adam opt(ps.Trainable(), AdamConfig{1e-3, 0.9, 0.99, 1e-8});
  opt.Step();
  double after;
  {
    agx::Tape t(false);
    Stage1Terms terms = Stage1Loss(t, model, t.Input(mel), 0);
    after = terms.total.scalar();
  }
  CHECK(after < before);
}

TEST_CASE("hinge losses match hand-computed score maps") {
  agx::Tape t(false);
  auto make_scales = [&](std::vector<double> real_scores,
                         std::vector<double> fake_scores) {
    agx::Matrix r(1, 2), f(1, 2);
    r << real_scores[0], real_scores[1];
    f << fake_scores[0], fake_scores[1];
    std::vector<DiscriminatorBank::ScaleTape> real{{t.Input(r), {}}};
    std::vector<DiscriminatorBank::ScaleTape> fake{{t.Input(f), {}}};
    return std::make_pair(real, fake);
  };

  // relu(1-r) = [0, 0.5] -> 0.25; relu(1+f) = [0, 1.5] -> 0.75.
  auto [real, fake] = make_scales({2.0, 0.5}, {-2.0, 0.5});
  CHECK(DiscriminatorHingeLoss(t, real, fake).scalar() ==
        doctest::Approx(1.0));
  // Generator pushes fake scores up: mean(-f) = -(-2.0 + 0.5)/2.
  CHECK(GeneratorHingeLoss(t, fake).scalar() == doctest::Approx(0.75));

  // Two scales average.
  agx::Matrix r2(1, 1), f2(1, 1);
  r2 << 1.0;
  f2 << -1.0;
  std::vector<DiscriminatorBank::ScaleTape> real2{
      {real[0].score, {}}, {t.Input(r2), {}}};
  std::vector<DiscriminatorBank::ScaleTape> fake2{
      {fake[0].score, {}}, {t.Input(f2), {}}};
  // Second scale: relu(1-1)=0, relu(1-1)=0 -> 0. Average: (1.0 + 0)/2.
  CHECK(DiscriminatorHingeLoss(t, real2, fake2).scalar() ==
        doctest::Approx(0.5));
  CHECK(GeneratorHingeLoss(t, fake2).scalar() ==
        doctest::Approx((0.75 + 1.0) / 2.0));
}

TEST_CASE("scores at the hinge targets cost zero, swapped scores cost four") {
  // Real at +1 and fake at -1 sit exactly on the hinge; swapping them costs
  // 2 on each side of the margin.
  agx::Tape t(false);
  agx::Matrix good_r(1, 1), good_f(1, 1);
  good_r << 1.0;
  good_f << -1.0;
  std::vector<DiscriminatorBank::ScaleTape> real{{t.Input(good_r), {}}};
  std::vector<DiscriminatorBank::ScaleTape> fake{{t.Input(good_f), {}}};
  CHECK(DiscriminatorHingeLoss(t, real, fake).scalar() == doctest::Approx(0.0));
  CHECK(DiscriminatorHingeLoss(t, fake, real).scalar() == doctest::Approx(4.0));
}

TEST_CASE("feature matching averages absolute gaps over layers and scales") {
  agx::Tape t(false);
  agx::Matrix fa(2, 2), ra(2, 2), fb(1, 3), rb(1, 3);
  fa << 1, 2, 3, 4;
  ra << 0, 2, 3, 0;  // |diff| mean = (1 + 0 + 0 + 4)/4 = 1.25
  fb << 1, 1, 1;
  rb << 0, 0, 0;  // mean 1.0
  std::vector<DiscriminatorBank::ScaleTape> fake{
      {t.Input(agx::Matrix::Zero(1, 1)), {t.Input(fa), t.Input(fb)}}};
  std::vector<DiscriminatorBank::ScaleOutput> real{{Eigen::MatrixXd::Zero(1, 1),
                                                    {ra, rb}}};
  CHECK(FeatureMatchingLoss(t, fake, real).scalar() ==
        doctest::Approx((1.25 + 1.0) / 2.0));
}

TEST_CASE("feature matching is zero when features coincide") {
  agx::Tape t(false);
  agx::Matrix f(2, 3);
  f << 1, 2, 3, 4, 5, 6;
  std::vector<DiscriminatorBank::ScaleTape> fake{
      {t.Input(agx::Matrix::Zero(1, 1)), {t.Input(f)}}};
  std::vector<DiscriminatorBank::ScaleOutput> real{
      {Eigen::MatrixXd::Zero(1, 1), {f}}};
  CHECK(FeatureMatchingLoss(t, fake, real).scalar() == 0.0);
}

TEST_CASE("confusion is the exact negation of the classifier loss") {
  ParameterStore ps;
  SpeakerClassifier cls(ps, 4, 8, 3, 44);
  agx::Tape t(false);
  agx::Var codes = t.Input(RandomMat(4, 9, 8));
  ConfusionTerms terms = DomainConfusion(t, cls, codes, 1);
  CHECK(terms.confusion_loss.scalar() == -terms.classifier_loss.scalar());
  CHECK(terms.classifier_loss.scalar() > 0.0);
}

TEST_CASE("an uninformative classifier costs ln of the class count") {
  ParameterStore ps;
  SpeakerClassifier cls(ps, 4, 8, 5, 45);
  // Zero weights collapse the logits to a constant column.
  for (Parameter* p : ps.WithPrefix("classifier.")) p->value.setZero();
  agx::Tape t(false);
  ConfusionTerms terms =
      DomainConfusion(t, cls, t.Input(RandomMat(4, 7, 9)), 2);
  CHECK(terms.classifier_loss.scalar() ==
        doctest::Approx(std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("labels outside the registry are rejected") {
  ParameterStore ps;
  SpeakerClassifier cls(ps, 4, 8, 3, 46);
  agx::Tape t(false);
  agx::Var codes = t.Input(RandomMat(4, 5, 10));
  CHECK_THROWS_AS(DomainConfusion(t, cls, codes, 3), ArgumentError);
  CHECK_THROWS_AS(DomainConfusion(t, cls, codes, -1), ArgumentError);
}

TEST_CASE("classifier training on detached codes leaves the encoder alone") {
  // Mirrors the adversarial arrangement: the classifier step re-enters the
  // codes as plain inputs, so its gradients must stay inside the classifier.
  ParameterStore ps;
  ConversionModel model(ps, TinyModel(), 2, 47);
  SpeakerClassifier cls(ps, 4, 8, 2, 48);
  Eigen::MatrixXd mel = RandomMat(8, 12, 11);

  Eigen::MatrixXd codes = model.Encode(
      [&] {
        MelSpectrogram m;
        m.values = mel;
        m.frame_rate = 86.13;
        m.hop = 256;
        return m;
      }(),
      0);

  ps.ZeroGrad();
  agx::Tape t(true);
  ConfusionTerms terms = DomainConfusion(t, cls, t.Input(codes), 0);
  t.Backward(terms.classifier_loss);

  for (const auto& p : ps.items()) {
    bool is_cls = p->name.rfind("classifier.", 0) == 0;
    double gnorm = p->grad.size() == 0 ? 0.0 : p->grad.cwiseAbs().maxCoeff();
    if (is_cls) {
      CHECK(gnorm > 0.0);
    } else {
      CHECK(gnorm == 0.0);
    }
  }
}

TEST_CASE("confusion through live codes reaches the encoder") {
  ParameterStore ps;
  ConversionModel model(ps, TinyModel(), 2, 49);
  SpeakerClassifier cls(ps, 4, 8, 2, 50);
  Eigen::MatrixXd mel = RandomMat(8, 12, 12);

  ps.ZeroGrad();
  agx::Tape t(true);
  agx::Var codes = model.EncodeTape(t, t.Input(mel), 0);
  ConfusionTerms terms = DomainConfusion(t, cls, codes, 0);
  t.Backward(terms.confusion_loss);

  bool encoder_touched = false;
  for (const auto& p : ps.items()) {
    if (p->name.rfind("encoder.", 0) == 0 && p->grad.size() != 0 &&
        p->grad.cwiseAbs().maxCoeff() > 0.0) {
      encoder_touched = true;
    }
  }
  CHECK(encoder_touched);
}
