// core/src/losses.cpp

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

#include "fastvc/losses.hpp"

#include "fastvc/error.hpp"

namespace fastvc {

ag::Var MseLoss(ag::Tape& t, ag::Var a, ag::Var b) {
  return t.Mean(t.Square(t.Sub(a, b)));
}

ag::Var L1Loss(ag::Tape& t, ag::Var a, ag::Var b) {
  return t.Mean(t.Abs(t.Sub(a, b)));
}

ag::Var ContentLossTape(ag::Tape& t, ag::Var codes, ag::Var codes_hat) {
  return t.Sum(t.Square(t.Sub(codes, codes_hat)));
}

double ContentLoss(const Eigen::MatrixXd& codes,
                   const Eigen::MatrixXd& codes_hat) {
  if (codes.rows() != codes_hat.rows() || codes.cols() != codes_hat.cols()) {
    throw ShapeError("code shapes differ: " + std::to_string(codes.rows()) +
                     "x" + std::to_string(codes.cols()) + " vs " +
                     std::to_string(codes_hat.rows()) + "x" +
                     std::to_string(codes_hat.cols()));
  }
  return (codes - codes_hat).squaredNorm();
}

Stage1Terms Stage1Loss(ag::Tape& t, const ConversionModel& model, ag::Var mel,
                       int speaker) {
  const auto out = model.AutoencodeTape(t, mel, speaker, speaker);
  // Re-encoding the refined output drives the content term; gradients reach
  // the encoder both directly and through the reconstruction.
  ag::Var codes_hat = model.EncodeTape(t, out.post, speaker);

  Stage1Terms terms;
  terms.post = MseLoss(t, mel, out.post);
  terms.pre = MseLoss(t, mel, out.pre);
  terms.content = MseLoss(t, out.codes, codes_hat);
  terms.total = t.Add(t.Add(terms.post, terms.pre), terms.content);
  return terms;
}

ag::Var DiscriminatorHingeLoss(
    ag::Tape& t, const std::vector<DiscriminatorBank::ScaleTape>& real,
    const std::vector<DiscriminatorBank::ScaleTape>& fake) {
  if (real.size() != fake.size() || real.empty()) {
    throw ShapeError("mismatched critic scale counts");
  }
  ag::Var acc = t.Constant(0.0);
  for (size_t i = 0; i < real.size(); ++i) {
    ag::Var miss_real =
        t.Mean(t.Relu(t.AddScalar(t.Scale(real[i].score, -1.0), 1.0)));
    ag::Var miss_fake = t.Mean(t.Relu(t.AddScalar(fake[i].score, 1.0)));
    acc = t.Add(acc, t.Add(miss_real, miss_fake));
  }
  return t.Scale(acc, 1.0 / static_cast<double>(real.size()));
}

ag::Var GeneratorHingeLoss(
    ag::Tape& t, const std::vector<DiscriminatorBank::ScaleTape>& fake) {
  if (fake.empty()) throw ShapeError("no critic scales");
  ag::Var acc = t.Constant(0.0);
  for (const auto& s : fake) {
    acc = t.Add(acc, t.Mean(t.Scale(s.score, -1.0)));
  }
  return t.Scale(acc, 1.0 / static_cast<double>(fake.size()));
}

ag::Var FeatureMatchingLoss(
    ag::Tape& t, const std::vector<DiscriminatorBank::ScaleTape>& fake,
    const std::vector<DiscriminatorBank::ScaleOutput>& real) {
  if (real.size() != fake.size() || fake.empty()) {
    throw ShapeError("mismatched critic scale counts");
  }
  ag::Var acc = t.Constant(0.0);
  int n_terms = 0;
  for (size_t i = 0; i < fake.size(); ++i) {
    if (fake[i].features.size() != real[i].features.size()) {
      throw ShapeError("mismatched critic feature counts");
    }
    for (size_t j = 0; j < fake[i].features.size(); ++j) {
      ag::Var ref = t.Input(real[i].features[j]);
      acc = t.Add(acc, L1Loss(t, fake[i].features[j], ref));
      ++n_terms;
    }
  }
  return t.Scale(acc, 1.0 / static_cast<double>(n_terms));
}

ConfusionTerms DomainConfusion(ag::Tape& t, const SpeakerClassifier& cls,
                               ag::Var codes, int label) {
  if (label < 0 || label >= cls.n_speakers()) {
    throw ArgumentError("speaker label " + std::to_string(label) +
                        " outside [0, " + std::to_string(cls.n_speakers()) +
                        ")");
  }
  ag::Var logits = cls.Apply(t, codes);
  ConfusionTerms terms;
  terms.classifier_loss = t.SoftmaxCrossEntropy(logits, {label});
  terms.confusion_loss = t.Scale(terms.classifier_loss, -1.0);
  return terms;
}

}  // namespace fastvc
