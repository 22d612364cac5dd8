// core/src/train.cpp

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

#include "fastvc/train.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <unordered_map>
#include <vector>

#include "fastvc/audio.hpp"
#include "fastvc/error.hpp"
#include "fastvc/losses.hpp"
#include "fastvc/rng.hpp"

namespace fastvc {

namespace fs = std::filesystem;

namespace {

// Stream coordinates. Batch order depends only on (seed, stage, epoch) and
// chunk positions only on (seed, stage, epoch, step, slot), so a run resumed
// from any epoch draws exactly what the uninterrupted run would have drawn.
constexpr uint64_t kBatchOrderTag = 0xB47C8;
constexpr uint64_t kChunkTag = 0xC4128;

class AudioCache {
 public:
  explicit AudioCache(const PreparedDataset& data) : data_(data) {}

  const Waveform& Get(int idx) {
    auto it = cache_.find(idx);
    if (it != cache_.end()) return it->second;
    Waveform w = ReadWav(data_.records[idx].audio_path);
    if (w.sample_rate != data_.sample_rate) {
      throw ValidationError("cached audio rate " +
                            std::to_string(w.sample_rate) +
                            " does not match dataset rate " +
                            std::to_string(data_.sample_rate) + ": " +
                            data_.records[idx].audio_path);
    }
    return cache_.emplace(idx, std::move(w)).first->second;
  }

 private:
  const PreparedDataset& data_;
  std::unordered_map<int, Waveform> cache_;
};

std::vector<int> EpochOrder(const std::vector<int>& train_idx, uint64_t seed,
                            int stage, int epoch) {
  std::vector<int> order = train_idx;
  Rng rng = Rng::Derive(seed, {kBatchOrderTag, static_cast<uint64_t>(stage),
                               static_cast<uint64_t>(epoch)});
  rng.Shuffle(order);
  return order;
}

Waveform DrawChunk(const Waveform& w, long chunk_len, uint64_t seed,
                   int stage, int epoch, int step, int slot) {
  Rng rng = Rng::Derive(
      seed, {kChunkTag, static_cast<uint64_t>(stage),
             static_cast<uint64_t>(epoch), static_cast<uint64_t>(step),
             static_cast<uint64_t>(slot)});
  return MakeChunk(w, chunk_len, rng).audio;
}

std::string CheckpointPath(const std::string& out_dir, const char* stage,
                           int epoch) {
  char name[64];
  std::snprintf(name, sizeof(name), "ckpt_%s_%04d.fvck", stage, epoch);
  return (fs::path(out_dir) / name).string();
}

void CheckDataset(const Pipeline& p, const PreparedDataset& data,
                  const std::vector<int>& train_idx) {
  if (train_idx.empty()) {
    throw ConfigError("training split is empty");
  }
  if (data.sample_rate != p.cfg.mel.sample_rate) {
    throw ConfigError("dataset rate " + std::to_string(data.sample_rate) +
                      " does not match configured rate " +
                      std::to_string(p.cfg.mel.sample_rate));
  }
  for (const std::string& s : data.registry.speakers) {
    p.registry.Index(s);  // throws on registry mismatch
  }
}

std::vector<Parameter*> Concat(std::vector<Parameter*> a,
                               const std::vector<Parameter*>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

double ScalarOf(ag::Tape& t, ag::Var v) { return t.ValueOf(v)(0, 0); }

// One-hot column for a registry index, as a constant tape input.
ag::Var OneHotInput(ag::Tape& t, int speaker, int n_speakers) {
  ag::Matrix oh = ag::Matrix::Zero(n_speakers, 1);
  oh(speaker, 0) = 1.0;
  return t.Input(oh);
}

Eigen::MatrixXd RefEncode(const Encoder& enc, const Eigen::MatrixXd& mel,
                          int speaker, int n_speakers) {
  ag::Tape t(false);
  ag::Var codes = enc.Apply(t, t.Input(mel), OneHotInput(t, speaker,
                                                         n_speakers));
  return t.ValueOf(codes);
}

}  // namespace

MetricsLog::MetricsLog(const std::string& path) : path_(path) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  os_.open(path, std::ios::app);
  if (!os_) throw IoError("cannot open metrics log: " + path);
  if (fresh) os_ << "step,epoch,term,value\n";
}

void MetricsLog::Append(int64_t step, int epoch, const std::string& term,
                        double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  os_ << step << ',' << epoch << ',' << term << ',' << buf << '\n';
  os_.flush();
}

TrainResult TrainStage1(Pipeline& p, const PreparedDataset& data) {
  const Stage1Config& cfg = p.cfg.stage1;
  cfg.Validate();
  if (!p.melfront->initialized()) {
    throw StateError("front end not initialized");
  }
  if (p.stage == "e2e") {
    throw StateError("autoencoder stage cannot resume an end-to-end run");
  }
  const std::vector<int> train_idx = data.SplitIndices("train");
  CheckDataset(p, data, train_idx);

  p.params.SetTrainable("melfront.", false);
  p.params.SetTrainable("encoder.", true);
  p.params.SetTrainable("decoder.", true);
  p.params.SetTrainable("postnet.", true);
  p.params.SetTrainable("vocoder.", false);
  p.params.SetTrainable("discriminator.", false);
  p.params.SetTrainable("classifier.", false);
  p.params.SetTrainable("ref_encoder.", false);
  auto g_params = Concat(Concat(p.params.WithPrefix("encoder."),
                                p.params.WithPrefix("decoder.")),
                         p.params.WithPrefix("postnet."));
  Adam opt(g_params, cfg.optimizer);
  opt.set_step_count(p.steps_g);
  p.stage = "ae";

  fs::create_directories(p.cfg.out_dir);
  MetricsLog log((fs::path(p.cfg.out_dir) / "metrics_ae.csv").string());
  AudioCache cache(data);

  TrainResult result;
  result.metrics_path = log.path();
  const int batch_size = cfg.batch;

  for (int epoch = p.epoch + 1; epoch <= cfg.epochs; ++epoch) {
    const std::vector<int> order = EpochOrder(train_idx, p.cfg.seed, 1,
                                              epoch);
    int step_in_epoch = 0;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(batch_size), ++step_in_epoch) {
      const size_t stop = std::min(order.size(),
                                   start + static_cast<size_t>(batch_size));
      const int b = static_cast<int>(stop - start);

      ag::Tape t(true);
      ag::Var total = t.Constant(0.0);
      double post_v = 0.0, pre_v = 0.0, content_v = 0.0;
      for (size_t i = start; i < stop; ++i) {
        const int rec = order[i];
        const Waveform chunk =
            DrawChunk(cache.Get(rec), cfg.chunk, p.cfg.seed, 1, epoch,
                      step_in_epoch, static_cast<int>(i - start));
        const MelSpectrogram mel = p.melfront->Forward(chunk);
        const int spk = p.registry.Index(data.records[rec].speaker);
        ag::Var melv = t.Input(mel.values);
        Stage1Terms terms = Stage1Loss(t, *p.model, melv, spk);
        total = t.Add(total, terms.total);
        post_v += ScalarOf(t, terms.post);
        pre_v += ScalarOf(t, terms.pre);
        content_v += ScalarOf(t, terms.content);
      }
      total = t.Scale(total, 1.0 / b);

      opt.ZeroGrad();
      t.Backward(total);
      opt.Step();
      p.steps_g = opt.step_count();

      const double total_v = ScalarOf(t, total);
      log.Append(p.steps_g, epoch, "stage1/total", total_v);
      log.Append(p.steps_g, epoch, "stage1/post", post_v / b);
      log.Append(p.steps_g, epoch, "stage1/pre", pre_v / b);
      log.Append(p.steps_g, epoch, "stage1/content", content_v / b);
      if (result.steps_run == 0) result.initial_loss = total_v;
      result.final_loss = total_v;
      ++result.steps_run;
    }
    p.epoch = epoch;
    result.last_checkpoint = CheckpointPath(p.cfg.out_dir, "ae", epoch);
    SaveCheckpoint(p, result.last_checkpoint);
  }
  return result;
}

TrainResult TrainStage2(Pipeline& p, const PreparedDataset& data) {
  const Stage2Config& cfg = p.cfg.stage2;
  cfg.Validate();
  if (p.stage == "init") {
    throw StateError("end-to-end stage requires a completed autoencoder run");
  }
  if (cfg.chunk % p.cfg.mel.hop != 0) {
    throw ConfigError("chunk length " + std::to_string(cfg.chunk) +
                      " is not a multiple of the hop " +
                      std::to_string(p.cfg.mel.hop));
  }
  if (cfg.chunk < p.discriminator->MinInputLength()) {
    throw ConfigError("chunk length " + std::to_string(cfg.chunk) +
                      " is below the critic receptive field " +
                      std::to_string(p.discriminator->MinInputLength()));
  }
  const std::vector<int> train_idx = data.SplitIndices("train");
  CheckDataset(p, data, train_idx);

  const bool resuming = p.stage == "e2e";
  if (!resuming) {
    // Stage transition: snapshot the encoder for the content term and start
    // fresh optimizers (the moment estimates of the reconstruction stage do
    // not transfer across learning-rate and momentum settings).
    for (Parameter* src : p.params.WithPrefix("encoder.")) {
      Parameter& dst = p.params.Get("ref_" + src->name);
      dst.value = src->value;
    }
    for (auto& param : p.params.items()) {
      param->adam_m.resize(0, 0);
      param->adam_v.resize(0, 0);
    }
    p.steps_g = 0;
    p.steps_d = 0;
    p.steps_c = 0;
    p.epoch = 0;
    p.stage = "e2e";
  }

  p.params.SetTrainable("melfront.", cfg.learnable_mel);
  p.params.SetTrainable("encoder.", true);
  p.params.SetTrainable("decoder.", true);
  p.params.SetTrainable("postnet.", true);
  p.params.SetTrainable("vocoder.", true);
  p.params.SetTrainable("discriminator.", true);
  p.params.SetTrainable("classifier.", p.cfg.confusion.enabled);
  p.params.SetTrainable("ref_encoder.", false);

  auto g_params = Concat(Concat(Concat(p.params.WithPrefix("encoder."),
                                       p.params.WithPrefix("decoder.")),
                                p.params.WithPrefix("postnet.")),
                         p.params.WithPrefix("vocoder."));
  if (cfg.learnable_mel) {
    g_params = Concat(std::move(g_params), p.params.WithPrefix("melfront."));
  }
  Adam opt_g(g_params, cfg.optimizer);
  Adam opt_d(p.params.WithPrefix("discriminator."), cfg.optimizer);
  opt_g.set_step_count(p.steps_g);
  opt_d.set_step_count(p.steps_d);
  std::unique_ptr<Adam> opt_c;
  if (p.cfg.confusion.enabled) {
    if (p.classifier == nullptr) {
      throw StateError("confusion regularizer enabled without a classifier");
    }
    opt_c = std::make_unique<Adam>(p.params.WithPrefix("classifier."),
                                   p.cfg.confusion.optimizer);
    opt_c->set_step_count(p.steps_c);
  }

  // The content reference runs generated audio through the analysis the
  // encoder snapshot was trained on: the fixed reference transform, which is
  // what the front end held throughout the reconstruction stage.
  ParameterStore ref_store;
  MelFrontEnd ref_mf(ref_store, p.cfg.mel);
  ref_mf.InitFromReference();

  fs::create_directories(p.cfg.out_dir);
  MetricsLog log((fs::path(p.cfg.out_dir) / "metrics_e2e.csv").string());
  AudioCache cache(data);

  TrainResult result;
  result.metrics_path = log.path();
  const int batch_size = cfg.batch;
  const int n_speakers = p.registry.size();

  for (int epoch = p.epoch + 1; epoch <= cfg.epochs; ++epoch) {
    const std::vector<int> order = EpochOrder(train_idx, p.cfg.seed, 2,
                                              epoch);
    int step_in_epoch = 0;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(batch_size), ++step_in_epoch) {
      const size_t stop = std::min(order.size(),
                                   start + static_cast<size_t>(batch_size));
      const int b = static_cast<int>(stop - start);

      // Generator forward for the whole batch on one tape. The critic nodes
      // are added only after the critic update below, so the generator sees
      // the refreshed critic.
      ag::Tape tg(true);
      std::vector<ag::Var> fakes;
      std::vector<ag::Var> code_vars;
      std::vector<Eigen::MatrixXd> real_waves;
      std::vector<Eigen::MatrixXd> ref_codes;
      std::vector<int> speakers;
      for (size_t i = start; i < stop; ++i) {
        const int rec = order[i];
        const Waveform chunk =
            DrawChunk(cache.Get(rec), cfg.chunk, p.cfg.seed, 2, epoch,
                      step_in_epoch, static_cast<int>(i - start));
        const int spk = p.registry.Index(data.records[rec].speaker);
        Eigen::MatrixXd wave(1, chunk.length());
        for (long n = 0; n < chunk.length(); ++n) {
          wave(0, n) = chunk.samples[n];
        }

        ag::Var wv = tg.Input(wave);
        ag::Var melv = cfg.learnable_mel
                           ? p.melfront->Apply(tg, wv)
                           : tg.Input(p.melfront->Forward(chunk).values);
        auto out = p.model->AutoencodeTape(tg, melv, spk, spk);
        ag::Var fake = p.vocoder->Apply(tg, out.post);

        fakes.push_back(fake);
        code_vars.push_back(out.codes);
        real_waves.push_back(std::move(wave));
        ref_codes.push_back(RefEncode(*p.ref_encoder,
                                      ref_mf.Forward(chunk).values, spk,
                                      n_speakers));
        speakers.push_back(spk);
      }

      // Critic update on detached generator output.
      ag::Tape td(true);
      ag::Var d_loss = td.Constant(0.0);
      for (int i = 0; i < b; ++i) {
        auto real_sc = p.discriminator->Apply(td, td.Input(real_waves[i]));
        auto fake_sc =
            p.discriminator->Apply(td, td.Input(tg.ValueOf(fakes[i])));
        d_loss = td.Add(d_loss, DiscriminatorHingeLoss(td, real_sc, fake_sc));
      }
      d_loss = td.Scale(d_loss, 1.0 / b);
      opt_d.ZeroGrad();
      td.Backward(d_loss);
      opt_d.Step();
      p.steps_d = opt_d.step_count();

      // Generator update.
      ag::Var adv_sum = tg.Constant(0.0);
      ag::Var fm_sum = tg.Constant(0.0);
      ag::Var content_sum = tg.Constant(0.0);
      ag::Var confusion_sum = tg.Constant(0.0);
      double classifier_ce = 0.0;
      for (int i = 0; i < b; ++i) {
        auto fake_sc = p.discriminator->Apply(tg, fakes[i]);
        Waveform real;
        real.sample_rate = data.sample_rate;
        real.samples.assign(real_waves[i].data(),
                            real_waves[i].data() + real_waves[i].size());
        auto real_sc = p.discriminator->Discriminate(real);

        adv_sum = tg.Add(adv_sum, GeneratorHingeLoss(tg, fake_sc));
        fm_sum = tg.Add(fm_sum, FeatureMatchingLoss(tg, fake_sc, real_sc));

        ag::Var mel_hat = ref_mf.Apply(tg, fakes[i]);
        ag::Var codes_hat = p.ref_encoder->Apply(
            tg, mel_hat, OneHotInput(tg, speakers[i], n_speakers));
        content_sum = tg.Add(
            content_sum, MseLoss(tg, tg.Input(ref_codes[i]), codes_hat));

        if (p.cfg.confusion.enabled) {
          auto conf =
              DomainConfusion(tg, *p.classifier, code_vars[i], speakers[i]);
          confusion_sum = tg.Add(confusion_sum, conf.confusion_loss);
        }
      }
      ag::Var adv = tg.Scale(adv_sum, 1.0 / b);
      ag::Var fm = tg.Scale(fm_sum, 1.0 / b);
      ag::Var content = tg.Scale(content_sum, 1.0 / b);
      ag::Var g_loss =
          tg.Add(tg.Add(adv, tg.Scale(fm, cfg.feature_weight)),
                 tg.Scale(content, cfg.content_weight));
      if (p.cfg.confusion.enabled) {
        g_loss = tg.Add(g_loss, tg.Scale(tg.Scale(confusion_sum, 1.0 / b),
                                         p.cfg.confusion.weight));
      }
      opt_g.ZeroGrad();
      if (opt_c) opt_c->ZeroGrad();
      tg.Backward(g_loss);
      opt_g.Step();
      p.steps_g = opt_g.step_count();

      // Classifier update on detached codes, after the generator moved.
      if (opt_c) {
        ag::Tape tc(true);
        ag::Var c_loss = tc.Constant(0.0);
        for (int i = 0; i < b; ++i) {
          ag::Var codes = tc.Input(tg.ValueOf(code_vars[i]));
          auto conf = DomainConfusion(tc, *p.classifier, codes, speakers[i]);
          c_loss = tc.Add(c_loss, conf.classifier_loss);
        }
        c_loss = tc.Scale(c_loss, 1.0 / b);
        opt_c->ZeroGrad();
        tc.Backward(c_loss);
        opt_c->Step();
        p.steps_c = opt_c->step_count();
        classifier_ce = ScalarOf(tc, c_loss);
      }

      const double g_v = ScalarOf(tg, g_loss);
      log.Append(p.steps_g, epoch, "stage2/total", g_v);
      log.Append(p.steps_g, epoch, "stage2/adv", ScalarOf(tg, adv));
      log.Append(p.steps_g, epoch, "stage2/fm",
                 cfg.feature_weight * ScalarOf(tg, fm));
      log.Append(p.steps_g, epoch, "stage2/content",
                 cfg.content_weight * ScalarOf(tg, content));
      log.Append(p.steps_g, epoch, "stage2/d_hinge", ScalarOf(td, d_loss));
      if (opt_c) {
        log.Append(p.steps_g, epoch, "stage2/classifier_ce", classifier_ce);
      }
      if (result.steps_run == 0) result.initial_loss = g_v;
      result.final_loss = g_v;
      ++result.steps_run;
    }
    p.epoch = epoch;
    result.last_checkpoint = CheckpointPath(p.cfg.out_dir, "e2e", epoch);
    SaveCheckpoint(p, result.last_checkpoint);
  }
  return result;
}

}  // namespace fastvc
