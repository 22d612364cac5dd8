// core/include/fastvc/model.hpp

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

#ifndef FASTVC_MODEL_HPP_
#define FASTVC_MODEL_HPP_

#include <memory>
#include <vector>

#include "fastvc/mel.hpp"
#include "fastvc/nn.hpp"

namespace fastvc {

// Dual information bottleneck: code dimension d and temporal thinning k.
// d/2 units per direction feed the recurrent encoder output, so d is even.
struct BottleneckConfig {
  int d = 32;
  int k = 32;

  void Validate() const;
  double code_rate(double frame_rate) const { return frame_rate / k; }
};

// Frames kept by temporal downsampling: the last frame of each block of k,
// plus the last available frame of a trailing partial block.
std::vector<int> DownsampleIndices(int t, int k);

// Zero-order hold: output column j copies code column floor(j/k), so no
// output frame ever reads a future code.
std::vector<int> UpsampleIndices(int t_out, int t_codes, int k);

Eigen::MatrixXd DownsampleTime(const Eigen::MatrixXd& h, int k);
Eigen::MatrixXd CausalUpsample(const Eigen::MatrixXd& codes, int k,
                               int t_out);

struct ModelConfig {
  int n_mels = 80;
  BottleneckConfig bottleneck;
  int enc_conv_width = 512;
  int enc_conv_layers = 3;
  int enc_kernel = 5;
  int dec_lstm_width = 512;
  int dec_conv_width = 512;
  int dec_conv_layers = 3;
  int dec_lstm_layers = 2;
  int postnet_width = 512;
  int postnet_layers = 5;
  int postnet_kernel = 5;

  void Validate() const;
};

// Convolution stack, channel normalization and ReLU after each layer, then a
// bidirectional recurrent layer projected down to d rows, then temporal
// thinning. The speaker one-hot is appended to every input frame.
class Encoder {
 public:
  Encoder(ParameterStore& ps, const ModelConfig& cfg, int n_speakers,
          uint64_t seed, const std::string& name = "encoder");

  ag::Var Apply(ag::Tape& t, ag::Var mel, ag::Var speaker) const;

 private:
  ModelConfig cfg_;
  int n_speakers_;
  std::vector<Conv1dLayer> convs_;
  std::vector<ChannelNorm> norms_;
  std::unique_ptr<BiLstmLayer> lstm_;
};

// Recurrent layer, convolution stack, recurrent stack, linear projection to
// the Mel channel count. Emits the smooth spectrogram estimate.
class Decoder {
 public:
  Decoder(ParameterStore& ps, const ModelConfig& cfg, int n_speakers,
          uint64_t seed);

  ag::Var Apply(ag::Tape& t, ag::Var codes_up, ag::Var speaker) const;

 private:
  ModelConfig cfg_;
  int n_speakers_;
  std::unique_ptr<LstmLayer> lstm_in_;
  std::vector<Conv1dLayer> convs_;
  std::vector<std::unique_ptr<LstmLayer>> lstm_stack_;
  std::unique_ptr<LinearLayer> proj_;
};

// Residual refiner on top of the decoder output.
class PostNet {
 public:
  PostNet(ParameterStore& ps, const ModelConfig& cfg, uint64_t seed);

  ag::Var Apply(ag::Tape& t, ag::Var pre) const;

 private:
  ModelConfig cfg_;
  std::vector<Conv1dLayer> convs_;
};

// The conditional autoencoder. Speaker identities are registry indices; the
// caller owns the mapping from names to indices.
class ConversionModel {
 public:
  ConversionModel(ParameterStore& ps, const ModelConfig& cfg, int n_speakers,
                  uint64_t seed);

  struct TapeOutput {
    ag::Var codes;      // d x T'
    ag::Var pre;        // n_mels x T
    ag::Var post;       // n_mels x T
  };

  ag::Var OneHot(ag::Tape& t, int speaker) const;
  ag::Var EncodeTape(ag::Tape& t, ag::Var mel, int speaker) const;
  ag::Var DecodeFromCodesTape(ag::Tape& t, ag::Var codes, int speaker,
                              int t_out, ag::Var* pre_out) const;
  TapeOutput AutoencodeTape(ag::Tape& t, ag::Var mel, int source,
                            int target) const;

  Eigen::MatrixXd Encode(const MelSpectrogram& mel, int speaker) const;

  struct EvalOutput {
    Eigen::MatrixXd codes;
    Eigen::MatrixXd pre;
    Eigen::MatrixXd post;
  };
  EvalOutput Autoencode(const MelSpectrogram& mel, int source,
                        int target) const;

  const ModelConfig& cfg() const { return cfg_; }
  int n_speakers() const { return n_speakers_; }

 private:
  ModelConfig cfg_;
  int n_speakers_;
  Encoder encoder_;
  Decoder decoder_;
  PostNet postnet_;
};

// Adversary head for the domain-confusion regularizer: time-pools codes to
// one vector per utterance, then a single hidden layer to speaker logits.
class SpeakerClassifier {
 public:
  SpeakerClassifier(ParameterStore& ps, int code_dim, int hidden,
                    int n_speakers, uint64_t seed);

  // codes: d x T' for one utterance -> logits n_speakers x 1.
  ag::Var Apply(ag::Tape& t, ag::Var codes) const;

  int n_speakers() const { return n_speakers_; }

 private:
  int code_dim_;
  int n_speakers_;
  std::unique_ptr<LinearLayer> hidden_;
  std::unique_ptr<LinearLayer> out_;
};

}  // namespace fastvc

#endif  // FASTVC_MODEL_HPP_
