// core/include/fastvc/losses.hpp

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

#ifndef FASTVC_LOSSES_HPP_
#define FASTVC_LOSSES_HPP_

#include <vector>

#include "fastvc/model.hpp"
#include "fastvc/vocoder.hpp"

namespace fastvc {

// Mean over all elements of the squared difference. The training objectives
// use this convention throughout so their magnitudes do not depend on chunk
// length; the term weights are calibrated against it.
ag::Var MseLoss(ag::Tape& t, ag::Var a, ag::Var b);

ag::Var L1Loss(ag::Tape& t, ag::Var a, ag::Var b);

// Squared Frobenius distance between two code matrices, summed over code
// dimensions and frames. This is the raw content distance; inside the
// composite objectives the mean-per-element form is used instead.
ag::Var ContentLossTape(ag::Tape& t, ag::Var codes, ag::Var codes_hat);
double ContentLoss(const Eigen::MatrixXd& codes,
                   const Eigen::MatrixXd& codes_hat);

// Dual reconstruction objective of the autoencoder stage: refined output,
// smooth branch, and agreement between the codes of the input and of the
// refined output under the same encoder.
struct Stage1Terms {
  ag::Var total;
  ag::Var post;
  ag::Var pre;
  ag::Var content;
};
Stage1Terms Stage1Loss(ag::Tape& t, const ConversionModel& model, ag::Var mel,
                       int speaker);

// Hinge objectives over all realness scales, each score map reduced by its
// mean and the scales averaged, so values do not depend on input length or
// scale count.
ag::Var DiscriminatorHingeLoss(
    ag::Tape& t, const std::vector<DiscriminatorBank::ScaleTape>& real,
    const std::vector<DiscriminatorBank::ScaleTape>& fake);
ag::Var GeneratorHingeLoss(
    ag::Tape& t, const std::vector<DiscriminatorBank::ScaleTape>& fake);

// Mean absolute difference between critic feature maps of the generated
// waveform and fixed reference features of the real one, averaged over
// layers and scales.
ag::Var FeatureMatchingLoss(
    ag::Tape& t, const std::vector<DiscriminatorBank::ScaleTape>& fake,
    const std::vector<DiscriminatorBank::ScaleOutput>& real);

// Adversarial speaker head on the codes. The classifier minimizes the
// cross-entropy; the encoder receives its negation.
struct ConfusionTerms {
  ag::Var classifier_loss;
  ag::Var confusion_loss;
};
ConfusionTerms DomainConfusion(ag::Tape& t, const SpeakerClassifier& cls,
                               ag::Var codes, int label);

}  // namespace fastvc

#endif  // FASTVC_LOSSES_HPP_
