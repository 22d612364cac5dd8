// core/src/config.cpp

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

#include "fastvc/config.hpp"

#include <fstream>

#include "json.hpp"

#include "fastvc/error.hpp"

namespace fastvc {

using nlohmann::json;

void Stage1Config::Validate() const {
  if (epochs < 1 || batch < 1 || chunk < 1) {
    throw ConfigError("stage1: epochs, batch, chunk must be positive");
  }
  if (optimizer.lr <= 0.0) throw ConfigError("stage1: lr must be positive");
}

void Stage2Config::Validate() const {
  if (epochs < 1 || batch < 1 || chunk < 1) {
    throw ConfigError("stage2: epochs, batch, chunk must be positive");
  }
  if (optimizer.lr <= 0.0) throw ConfigError("stage2: lr must be positive");
  if (content_weight <= 0.0) {
    throw ConfigError("stage2: content_weight must be positive");
  }
  if (feature_weight < 0.0) {
    throw ConfigError("stage2: feature_weight must be non-negative");
  }
}

void ConfusionConfig::Validate() const {
  if (weight < 0.0) throw ConfigError("confusion: weight must be >= 0");
  if (hidden < 1) throw ConfigError("confusion: hidden width must be >= 1");
  if (optimizer.lr <= 0.0) throw ConfigError("confusion: lr must be positive");
}

void ProbeConfig::Validate() const {
  if (hidden < 1) throw ConfigError("probe: hidden width must be >= 1");
  if (lr <= 0.0) throw ConfigError("probe: lr must be positive");
  if (max_iters < 1 || patience < 1) {
    throw ConfigError("probe: max_iters and patience must be >= 1");
  }
  if (train_frac <= 0.0 || val_frac <= 0.0 ||
      train_frac + val_frac >= 1.0) {
    throw ConfigError("probe: need 0 < train_frac, val_frac and "
                      "train_frac + val_frac < 1");
  }
}

void RunConfig::Validate() const {
  mel.Validate();
  model.Validate();
  vocoder.Validate(mel.hop);
  discriminator.Validate();
  stage1.Validate();
  stage2.Validate();
  confusion.Validate();
  probe.Validate();
  if (model.n_mels != mel.n_mels) {
    throw ConfigError("config: model.n_mels disagrees with mel.n_mels");
  }
}

namespace {

json AdamToJson(const AdamConfig& a) {
  return json{{"lr", a.lr},
              {"beta1", a.beta1},
              {"beta2", a.beta2},
              {"eps", a.eps}};
}

void AdamFromJson(const json& j, AdamConfig& a) {
  if (j.contains("lr")) a.lr = j.at("lr").get<double>();
  if (j.contains("beta1")) a.beta1 = j.at("beta1").get<double>();
  if (j.contains("beta2")) a.beta2 = j.at("beta2").get<double>();
  if (j.contains("eps")) a.eps = j.at("eps").get<double>();
}

template <typename T>
void Take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json ToJsonTree(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["data_dir"] = c.data_dir;
  j["out_dir"] = c.out_dir;
  j["mel"] = {{"sample_rate", c.mel.sample_rate}, {"n_fft", c.mel.n_fft},
              {"hop", c.mel.hop},                 {"win", c.mel.win},
              {"n_mels", c.mel.n_mels},           {"f_min", c.mel.f_min},
              {"f_max", c.mel.f_max},             {"floor", c.mel.floor_eps},
              {"trainable", c.mel.trainable}};
  j["model"] = {{"bottleneck_d", c.model.bottleneck.d},
                {"bottleneck_k", c.model.bottleneck.k},
                {"enc_conv_width", c.model.enc_conv_width},
                {"enc_conv_layers", c.model.enc_conv_layers},
                {"enc_kernel", c.model.enc_kernel},
                {"dec_lstm_width", c.model.dec_lstm_width},
                {"dec_conv_width", c.model.dec_conv_width},
                {"dec_conv_layers", c.model.dec_conv_layers},
                {"dec_lstm_layers", c.model.dec_lstm_layers},
                {"postnet_width", c.model.postnet_width},
                {"postnet_layers", c.model.postnet_layers},
                {"postnet_kernel", c.model.postnet_kernel}};
  j["vocoder"] = {{"upsample_factors", c.vocoder.upsample_factors},
                  {"dilations", c.vocoder.dilations},
                  {"base_width", c.vocoder.base_width}};
  j["discriminator"] = {{"n_scales", c.discriminator.n_scales},
                        {"base_width", c.discriminator.base_width},
                        {"max_width", c.discriminator.max_width},
                        {"n_strided", c.discriminator.n_strided},
                        {"stride", c.discriminator.stride}};
  j["stage1"] = {{"optimizer", AdamToJson(c.stage1.optimizer)},
                 {"epochs", c.stage1.epochs},
                 {"batch", c.stage1.batch},
                 {"chunk", c.stage1.chunk}};
  j["stage2"] = {{"optimizer", AdamToJson(c.stage2.optimizer)},
                 {"epochs", c.stage2.epochs},
                 {"batch", c.stage2.batch},
                 {"chunk", c.stage2.chunk},
                 {"content_weight", c.stage2.content_weight},
                 {"feature_weight", c.stage2.feature_weight},
                 {"learnable_mel", c.stage2.learnable_mel}};
  j["confusion"] = {{"enabled", c.confusion.enabled},
                    {"weight", c.confusion.weight},
                    {"optimizer", AdamToJson(c.confusion.optimizer)},
                    {"hidden", c.confusion.hidden}};
  j["probe"] = {{"hidden", c.probe.hidden},
                {"lr", c.probe.lr},
                {"max_iters", c.probe.max_iters},
                {"patience", c.probe.patience},
                {"train_frac", c.probe.train_frac},
                {"val_frac", c.probe.val_frac}};
  return j;
}

RunConfig FromJsonTree(const json& j) {
  RunConfig c;
  Take(j, "seed", c.seed);
  Take(j, "data_dir", c.data_dir);
  Take(j, "out_dir", c.out_dir);
  if (j.contains("mel")) {
    const json& m = j.at("mel");
    Take(m, "sample_rate", c.mel.sample_rate);
    Take(m, "n_fft", c.mel.n_fft);
    Take(m, "hop", c.mel.hop);
    Take(m, "win", c.mel.win);
    Take(m, "n_mels", c.mel.n_mels);
    Take(m, "f_min", c.mel.f_min);
    Take(m, "f_max", c.mel.f_max);
    Take(m, "floor", c.mel.floor_eps);
    Take(m, "trainable", c.mel.trainable);
    c.model.n_mels = c.mel.n_mels;
  }
  if (j.contains("model")) {
    const json& m = j.at("model");
    Take(m, "bottleneck_d", c.model.bottleneck.d);
    Take(m, "bottleneck_k", c.model.bottleneck.k);
    Take(m, "enc_conv_width", c.model.enc_conv_width);
    Take(m, "enc_conv_layers", c.model.enc_conv_layers);
    Take(m, "enc_kernel", c.model.enc_kernel);
    Take(m, "dec_lstm_width", c.model.dec_lstm_width);
    Take(m, "dec_conv_width", c.model.dec_conv_width);
    Take(m, "dec_conv_layers", c.model.dec_conv_layers);
    Take(m, "dec_lstm_layers", c.model.dec_lstm_layers);
    Take(m, "postnet_width", c.model.postnet_width);
    Take(m, "postnet_layers", c.model.postnet_layers);
    Take(m, "postnet_kernel", c.model.postnet_kernel);
  }
  if (j.contains("vocoder")) {
    const json& v = j.at("vocoder");
    Take(v, "upsample_factors", c.vocoder.upsample_factors);
    Take(v, "dilations", c.vocoder.dilations);
    Take(v, "base_width", c.vocoder.base_width);
  }
  if (j.contains("discriminator")) {
    const json& d = j.at("discriminator");
    Take(d, "n_scales", c.discriminator.n_scales);
    Take(d, "base_width", c.discriminator.base_width);
    Take(d, "max_width", c.discriminator.max_width);
    Take(d, "n_strided", c.discriminator.n_strided);
    Take(d, "stride", c.discriminator.stride);
  }
  if (j.contains("stage1")) {
    const json& s = j.at("stage1");
    if (s.contains("optimizer")) AdamFromJson(s.at("optimizer"), c.stage1.optimizer);
    Take(s, "epochs", c.stage1.epochs);
    Take(s, "batch", c.stage1.batch);
    Take(s, "chunk", c.stage1.chunk);
  }
  if (j.contains("stage2")) {
    const json& s = j.at("stage2");
    if (s.contains("optimizer")) AdamFromJson(s.at("optimizer"), c.stage2.optimizer);
    Take(s, "epochs", c.stage2.epochs);
    Take(s, "batch", c.stage2.batch);
    Take(s, "chunk", c.stage2.chunk);
    Take(s, "content_weight", c.stage2.content_weight);
    Take(s, "feature_weight", c.stage2.feature_weight);
    Take(s, "learnable_mel", c.stage2.learnable_mel);
  }
  if (j.contains("confusion")) {
    const json& s = j.at("confusion");
    Take(s, "enabled", c.confusion.enabled);
    Take(s, "weight", c.confusion.weight);
    if (s.contains("optimizer")) {
      AdamFromJson(s.at("optimizer"), c.confusion.optimizer);
    }
    Take(s, "hidden", c.confusion.hidden);
  }
  if (j.contains("probe")) {
    const json& p = j.at("probe");
    Take(p, "hidden", c.probe.hidden);
    Take(p, "lr", c.probe.lr);
    Take(p, "max_iters", c.probe.max_iters);
    Take(p, "patience", c.probe.patience);
    Take(p, "train_frac", c.probe.train_frac);
    Take(p, "val_frac", c.probe.val_frac);
  }
  return c;
}

}  // namespace

std::string RunConfig::ToJson(int indent) const {
  return ToJsonTree(*this).dump(indent);
}

RunConfig RunConfig::FromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: bad JSON: ") + e.what());
  }
  return FromJsonTree(j);
}

RunConfig RunConfig::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return FromJson(text);
}

RunConfig ApplyOverride(const RunConfig& cfg, const std::string& assignment) {
  size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ArgumentError("override must look like section.key=value: " +
                        assignment);
  }
  std::string path = assignment.substr(0, eq);
  std::string value = assignment.substr(eq + 1);
  json tree = json::parse(cfg.ToJson());
  json* node = &tree;
  size_t pos = 0;
  while (true) {
    size_t dot = path.find('.', pos);
    std::string key = path.substr(pos, dot - pos);
    if (key.empty()) throw ArgumentError("bad override path: " + path);
    if (dot == std::string::npos) {
      json parsed;
      try {
        parsed = json::parse(value);
      } catch (const json::exception&) {
        parsed = value;  // plain string
      }
      (*node)[key] = parsed;
      break;
    }
    node = &(*node)[key];
    pos = dot + 1;
  }
  return RunConfig::FromJson(tree.dump());
}

}  // namespace fastvc
