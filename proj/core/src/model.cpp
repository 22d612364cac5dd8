// core/src/model.cpp

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

#include "fastvc/model.hpp"

#include "fastvc/error.hpp"

namespace fastvc {

void BottleneckConfig::Validate() const {
  if (d < 2 || d % 2 != 0) {
    throw ConfigError("bottleneck: d must be even and >= 2");
  }
  if (k < 1) throw ConfigError("bottleneck: k must be >= 1");
}

void ModelConfig::Validate() const {
  bottleneck.Validate();
  if (n_mels < 1) throw ConfigError("model: n_mels must be positive");
  if (enc_conv_width < 1 || enc_conv_layers < 1 || enc_kernel < 1 ||
      dec_lstm_width < 1 || dec_conv_width < 1 || dec_conv_layers < 1 ||
      dec_lstm_layers < 1 || postnet_width < 1 || postnet_layers < 2 ||
      postnet_kernel < 1) {
    throw ConfigError("model: all widths, depths and kernels must be >= 1 "
                      "(postnet needs >= 2 layers)");
  }
}

// ---------------------------------------------------------------------------
// Bottleneck algebra
// ---------------------------------------------------------------------------

std::vector<int> DownsampleIndices(int t, int k) {
  if (t < 1) throw ArgumentError("DownsampleIndices: empty input");
  if (k < 1) throw ArgumentError("DownsampleIndices: k must be >= 1");
  std::vector<int> idx;
  for (int i = k - 1; i < t; i += k) idx.push_back(i);
  if (t % k != 0) idx.push_back(t - 1);
  return idx;
}

std::vector<int> UpsampleIndices(int t_out, int t_codes, int k) {
  if (t_codes < 1) throw ArgumentError("UpsampleIndices: no codes");
  if (k < 1) throw ArgumentError("UpsampleIndices: k must be >= 1");
  if (t_out < 1 || t_out > static_cast<long>(k) * t_codes) {
    throw ArgumentError("UpsampleIndices: t_out " + std::to_string(t_out) +
                        " exceeds k * codes = " +
                        std::to_string(static_cast<long>(k) * t_codes));
  }
  std::vector<int> idx(static_cast<size_t>(t_out));
  for (int t = 0; t < t_out; ++t) idx[static_cast<size_t>(t)] = t / k;
  return idx;
}

Eigen::MatrixXd DownsampleTime(const Eigen::MatrixXd& h, int k) {
  std::vector<int> idx = DownsampleIndices(static_cast<int>(h.cols()), k);
  Eigen::MatrixXd out(h.rows(), static_cast<long>(idx.size()));
  for (size_t j = 0; j < idx.size(); ++j) {
    out.col(static_cast<long>(j)) = h.col(idx[j]);
  }
  return out;
}

Eigen::MatrixXd CausalUpsample(const Eigen::MatrixXd& codes, int k,
                               int t_out) {
  std::vector<int> idx =
      UpsampleIndices(t_out, static_cast<int>(codes.cols()), k);
  Eigen::MatrixXd out(codes.rows(), t_out);
  for (int t = 0; t < t_out; ++t) {
    out.col(t) = codes.col(idx[static_cast<size_t>(t)]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Encoder
// ---------------------------------------------------------------------------

Encoder::Encoder(ParameterStore& ps, const ModelConfig& cfg, int n_speakers,
                 uint64_t seed, const std::string& name)
    : cfg_(cfg), n_speakers_(n_speakers) {
  cfg_.Validate();
  if (n_speakers < 2) throw ConfigError("encoder: need at least 2 speakers");
  int cin = cfg.n_mels + n_speakers;
  for (int i = 0; i < cfg.enc_conv_layers; ++i) {
    std::string base = name + ".conv" + std::to_string(i);
    convs_.emplace_back(ps, base, seed, cin, cfg.enc_conv_width,
                        cfg.enc_kernel);
    norms_.emplace_back(ps, base + ".norm", cfg.enc_conv_width);
    cin = cfg.enc_conv_width;
  }
  lstm_ = std::make_unique<BiLstmLayer>(ps, name + ".lstm", seed, cin,
                                        cfg.bottleneck.d / 2);
}

ag::Var Encoder::Apply(ag::Tape& t, ag::Var mel, ag::Var speaker) const {
  if (mel.rows() != cfg_.n_mels) {
    throw ShapeError("encoder: input has " + std::to_string(mel.rows()) +
                     " channels, expected " + std::to_string(cfg_.n_mels));
  }
  if (speaker.rows() != n_speakers_ || speaker.cols() != 1) {
    throw ShapeError("encoder: speaker one-hot must be " +
                     std::to_string(n_speakers_) + " x 1");
  }
  ag::Var h = t.VCat({mel, t.BroadcastCol(speaker, mel.cols())});
  for (size_t i = 0; i < convs_.size(); ++i) {
    h = t.Relu(norms_[i].Apply(t, convs_[i].Apply(t, h)));
  }
  h = lstm_->Apply(t, h);
  return t.GatherCols(h, DownsampleIndices(h.cols(), cfg_.bottleneck.k));
}

// ---------------------------------------------------------------------------
// Decoder
// ---------------------------------------------------------------------------

Decoder::Decoder(ParameterStore& ps, const ModelConfig& cfg, int n_speakers,
                 uint64_t seed)
    : cfg_(cfg), n_speakers_(n_speakers) {
  cfg_.Validate();
  lstm_in_ = std::make_unique<LstmLayer>(ps, "decoder.lstm_in", seed,
                                         cfg.bottleneck.d + n_speakers,
                                         cfg.dec_lstm_width);
  int cin = cfg.dec_lstm_width;
  for (int i = 0; i < cfg.dec_conv_layers; ++i) {
    convs_.emplace_back(ps, "decoder.conv" + std::to_string(i), seed, cin,
                        cfg.dec_conv_width, cfg.enc_kernel);
    cin = cfg.dec_conv_width;
  }
  for (int i = 0; i < cfg.dec_lstm_layers; ++i) {
    lstm_stack_.push_back(std::make_unique<LstmLayer>(
        ps, "decoder.lstm" + std::to_string(i), seed, cin,
        cfg.dec_lstm_width));
    cin = cfg.dec_lstm_width;
  }
  proj_ = std::make_unique<LinearLayer>(ps, "decoder.proj", seed, cin,
                                        cfg.n_mels);
}

ag::Var Decoder::Apply(ag::Tape& t, ag::Var codes_up, ag::Var speaker) const {
  if (codes_up.rows() != cfg_.bottleneck.d) {
    throw ShapeError("decoder: codes have " + std::to_string(codes_up.rows()) +
                     " dims, expected " + std::to_string(cfg_.bottleneck.d));
  }
  if (speaker.rows() != n_speakers_ || speaker.cols() != 1) {
    throw ShapeError("decoder: speaker one-hot must be " +
                     std::to_string(n_speakers_) + " x 1");
  }
  ag::Var h = t.VCat({codes_up, t.BroadcastCol(speaker, codes_up.cols())});
  h = lstm_in_->Apply(t, h);
  // No per-input normalization here: the decoder must be able to emit the
  // time-constant per-channel offsets that carry speaker timbre, and
  // standardizing over the time axis would cancel them.
  for (const auto& conv : convs_) {
    h = t.Relu(conv.Apply(t, h));
  }
  for (const auto& lstm : lstm_stack_) {
    h = lstm->Apply(t, h);
  }
  return proj_->Apply(t, h);
}

// ---------------------------------------------------------------------------
// PostNet
// ---------------------------------------------------------------------------

PostNet::PostNet(ParameterStore& ps, const ModelConfig& cfg, uint64_t seed)
    : cfg_(cfg) {
  cfg_.Validate();
  int cin = cfg.n_mels;
  for (int i = 0; i < cfg.postnet_layers - 1; ++i) {
    convs_.emplace_back(ps, "postnet.conv" + std::to_string(i), seed, cin,
                        cfg.postnet_width, cfg.postnet_kernel);
    cin = cfg.postnet_width;
  }
  convs_.emplace_back(ps,
                      "postnet.conv" + std::to_string(cfg.postnet_layers - 1),
                      seed, cin, cfg.n_mels, cfg.postnet_kernel);
}

ag::Var PostNet::Apply(ag::Tape& t, ag::Var pre) const {
  ag::Var h = pre;
  for (size_t i = 0; i + 1 < convs_.size(); ++i) {
    h = t.Tanh(convs_[i].Apply(t, h));
  }
  return convs_.back().Apply(t, h);
}

// ---------------------------------------------------------------------------
// ConversionModel
// ---------------------------------------------------------------------------

ConversionModel::ConversionModel(ParameterStore& ps, const ModelConfig& cfg,
                                 int n_speakers, uint64_t seed)
    : cfg_(cfg),
      n_speakers_(n_speakers),
      encoder_(ps, cfg, n_speakers, seed),
      decoder_(ps, cfg, n_speakers, seed),
      postnet_(ps, cfg, seed) {}

ag::Var ConversionModel::OneHot(ag::Tape& t, int speaker) const {
  if (speaker < 0 || speaker >= n_speakers_) {
    throw ArgumentError("speaker index " + std::to_string(speaker) +
                        " outside registry of size " +
                        std::to_string(n_speakers_));
  }
  ag::Matrix v = ag::Matrix::Zero(n_speakers_, 1);
  v(speaker, 0) = 1.0;
  return t.Input(std::move(v));
}

ag::Var ConversionModel::EncodeTape(ag::Tape& t, ag::Var mel,
                                    int speaker) const {
  return encoder_.Apply(t, mel, OneHot(t, speaker));
}

ag::Var ConversionModel::DecodeFromCodesTape(ag::Tape& t, ag::Var codes,
                                             int speaker, int t_out,
                                             ag::Var* pre_out) const {
  ag::Var up = t.GatherCols(
      codes, UpsampleIndices(t_out, codes.cols(), cfg_.bottleneck.k));
  ag::Var pre = decoder_.Apply(t, up, OneHot(t, speaker));
  if (pre_out != nullptr) *pre_out = pre;
  return t.Add(pre, postnet_.Apply(t, pre));
}

ConversionModel::TapeOutput ConversionModel::AutoencodeTape(ag::Tape& t,
                                                            ag::Var mel,
                                                            int source,
                                                            int target) const {
  TapeOutput out;
  out.codes = EncodeTape(t, mel, source);
  out.post =
      DecodeFromCodesTape(t, out.codes, target, mel.cols(), &out.pre);
  return out;
}

Eigen::MatrixXd ConversionModel::Encode(const MelSpectrogram& mel,
                                        int speaker) const {
  ag::Tape t(/*track_gradients=*/false);
  return EncodeTape(t, t.Input(mel.values), speaker).val();
}

ConversionModel::EvalOutput ConversionModel::Autoencode(
    const MelSpectrogram& mel, int source, int target) const {
  ag::Tape t(/*track_gradients=*/false);
  TapeOutput r = AutoencodeTape(t, t.Input(mel.values), source, target);
  EvalOutput out;
  out.codes = r.codes.val();
  out.pre = r.pre.val();
  out.post = r.post.val();
  return out;
}

// ---------------------------------------------------------------------------
// SpeakerClassifier
// ---------------------------------------------------------------------------

SpeakerClassifier::SpeakerClassifier(ParameterStore& ps, int code_dim,
                                     int hidden, int n_speakers,
                                     uint64_t seed)
    : code_dim_(code_dim), n_speakers_(n_speakers) {
  if (code_dim < 1 || hidden < 1 || n_speakers < 2) {
    throw ConfigError("classifier: need code_dim, hidden >= 1, speakers >= 2");
  }
  hidden_ = std::make_unique<LinearLayer>(ps, "classifier.hidden", seed,
                                          code_dim, hidden);
  out_ = std::make_unique<LinearLayer>(ps, "classifier.out", seed, hidden,
                                       n_speakers);
}

ag::Var SpeakerClassifier::Apply(ag::Tape& t, ag::Var codes) const {
  if (codes.rows() != code_dim_) {
    throw ShapeError("classifier: codes have " + std::to_string(codes.rows()) +
                     " dims, expected " + std::to_string(code_dim_));
  }
  ag::Var pooled =
      t.Scale(t.SumCols(codes), 1.0 / static_cast<double>(codes.cols()));
  return out_->Apply(t, t.Relu(hidden_->Apply(t, pooled)));
}

}  // namespace fastvc
