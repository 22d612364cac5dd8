// tools/fastvc.cpp

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

// Command-line entry point. One binary, six subcommands covering the whole
// workflow: prepare, train, convert, probe, eval, bench. A JSON config file
// is the source of truth; --set overrides individual dotted keys. Progress
// goes to stderr, machine-readable artifacts to files.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fastvc/audio.hpp"
#include "fastvc/checkpoint.hpp"
#include "fastvc/config.hpp"
#include "fastvc/corpus.hpp"
#include "fastvc/error.hpp"
#include "fastvc/metrics.hpp"
#include "fastvc/probes.hpp"
#include "fastvc/train.hpp"

namespace fs = std::filesystem;
using namespace fastvc;

namespace {

struct ConfigArgs {
  std::string config_path;
  std::vector<std::string> sets;
};

void AddConfigArgs(CLI::App* cmd, ConfigArgs* args) {
  cmd->add_option("--config", args->config_path, "run config JSON file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", args->sets,
                  "override a config key, e.g. --set stage1.epochs=5");
}

RunConfig LoadRunConfig(const ConfigArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) cfg = RunConfig::Load(args.config_path);
  for (const std::string& s : args.sets) cfg = ApplyOverride(cfg, s);
  cfg.Validate();
  return cfg;
}

// Precedence: explicit flag, then FASTVC_CACHE_DIR, then the config file.
std::string ResolveDataDir(const RunConfig& cfg, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("FASTVC_CACHE_DIR")) {
    if (*env != '\0') return env;
  }
  if (!cfg.data_dir.empty()) return cfg.data_dir;
  throw ConfigError("no dataset directory: pass --data, set FASTVC_CACHE_DIR "
                    "or set data_dir in the config");
}

// Architecture keys must not drift from what a checkpoint was built with.
void CheckStructureUnchanged(const RunConfig& loaded, const RunConfig& now) {
  const auto a = nlohmann::json::parse(loaded.ToJson());
  const auto b = nlohmann::json::parse(now.ToJson());
  for (const char* key : {"mel", "model", "vocoder", "discriminator"}) {
    if (a.at(key) != b.at(key)) {
      throw ConfigError(std::string("override changes the '") + key +
                        "' section of a checkpointed run");
    }
  }
  if (a.at("confusion").at("enabled") != b.at("confusion").at("enabled")) {
    throw ConfigError("override toggles the confusion classifier of a "
                      "checkpointed run");
  }
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + path);
  os << text;
}

std::unique_ptr<Pipeline> LoadPipeline(const std::string& ckpt,
                                       const ConfigArgs& args) {
  auto p = LoadCheckpoint(ckpt);
  RunConfig overridden = p->cfg;
  for (const std::string& s : args.sets) {
    overridden = ApplyOverride(overridden, s);
  }
  CheckStructureUnchanged(p->cfg, overridden);
  overridden.Validate();
  p->cfg = overridden;
  return p;
}

// Encodes every requested utterance and pairs the codes with the record.
struct EncodedUtterance {
  int record = 0;
  int speaker = 0;
  Eigen::MatrixXd codes;
};

std::vector<EncodedUtterance> EncodeDataset(const Pipeline& p,
                                            const PreparedDataset& data,
                                            const std::vector<int>& idx) {
  std::vector<EncodedUtterance> out;
  out.reserve(idx.size());
  for (int i : idx) {
    const UtteranceRecord& rec = data.records[static_cast<size_t>(i)];
    const Waveform w = ReadWav(rec.audio_path);
    const MelSpectrogram mel = p.melfront->Forward(w);
    EncodedUtterance e;
    e.record = i;
    e.speaker = p.registry.Index(rec.speaker);
    e.codes = p.model->Encode(mel, e.speaker);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<int> AllIndices(const PreparedDataset& data) {
  std::vector<int> idx(data.records.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  return idx;
}

int CmdPrepare(const ConfigArgs& cargs, const std::string& manifest,
               const std::string& out_dir, double train_frac) {
  RunConfig cfg = LoadRunConfig(cargs);
  const PreparedDataset data =
      PrepareDataset(manifest, out_dir, cfg.mel.sample_rate, cfg.seed,
                     train_frac, cfg.ToJson());
  std::cerr << "prepared " << data.records.size() << " utterances, "
            << data.registry.size() << " speakers, "
            << data.phonemes.size() << " phoneme labels -> " << data.root
            << "\n";
  return 0;
}

int CmdTrain(const ConfigArgs& cargs, const std::string& stage,
             const std::string& data_flag, const std::string& out_flag,
             const std::string& resume, const std::string& vocoder_archive) {
  std::unique_ptr<Pipeline> p;
  RunConfig cfg;
  if (!resume.empty()) {
    p = LoadPipeline(resume, cargs);
    cfg = p->cfg;
  } else {
    cfg = LoadRunConfig(cargs);
  }
  const std::string data_dir = ResolveDataDir(cfg, data_flag);
  const PreparedDataset data = LoadPrepared(data_dir);
  if (p == nullptr) {
    if (stage == "e2e") {
      throw StateError("end-to-end training needs a warm start: pass "
                       "--resume with an autoencoder-stage checkpoint");
    }
    p = Pipeline::Build(cfg, data.registry);
  }
  if (!out_flag.empty()) p->cfg.out_dir = out_flag;
  if (!data_flag.empty()) p->cfg.data_dir = data_flag;
  if (p->cfg.out_dir.empty()) p->cfg.out_dir = "runs/default";
  if (!vocoder_archive.empty()) {
    ImportVocoderArchive(*p, vocoder_archive);
    std::cerr << "imported vocoder parameters from " << vocoder_archive
              << "\n";
  }

  TrainResult result;
  if (stage == "ae") {
    result = TrainStage1(*p, data);
  } else {
    result = TrainStage2(*p, data);
  }
  std::cerr << "stage " << stage << ": " << result.steps_run
            << " steps, loss " << result.initial_loss << " -> "
            << result.final_loss << "\n";
  if (!result.last_checkpoint.empty()) {
    std::cerr << "checkpoint: " << result.last_checkpoint << "\n";
  }
  std::cerr << "metrics: " << result.metrics_path << "\n";
  return 0;
}

int CmdConvert(const ConfigArgs& cargs, const std::string& ckpt,
               const std::string& in_path, const std::string& source,
               const std::string& target, const std::string& out_path,
               bool griffin_lim, int gl_iters) {
  auto p = LoadPipeline(ckpt, cargs);
  const Waveform in = ReadWav(in_path);
  StageTimings timings;
  Waveform out =
      p->Convert(in, source, target, &timings, griffin_lim, gl_iters);
  WriteWav(out_path, out, WavEncoding::kPcm16);
  const double rtf = out.duration_seconds() / timings.total();
  std::cerr << "wrote " << out_path << " (" << out.duration_seconds()
            << " s at " << out.sample_rate << " Hz)\n";
  std::cout << "rtf " << rtf << "\n";
  return 0;
}

int CmdProbe(const ConfigArgs& cargs, const std::string& ckpt,
             const std::string& data_flag, const std::string& out_prefix,
             bool speaker_only, bool phoneme_only) {
  auto p = LoadPipeline(ckpt, cargs);
  const PreparedDataset data =
      LoadPrepared(ResolveDataDir(p->cfg, data_flag));
  const auto encoded = EncodeDataset(*p, data, AllIndices(data));
  const int k = p->cfg.model.bottleneck.k;
  const int hop = p->cfg.mel.hop;
  fs::create_directories(fs::path(out_prefix).parent_path().empty()
                             ? "."
                             : fs::path(out_prefix).parent_path().string());

  if (!speaker_only) {
    std::map<std::string, int> inventory;
    for (size_t i = 0; i < data.phonemes.size(); ++i) {
      inventory[data.phonemes[i]] = static_cast<int>(i);
    }
    if (inventory.empty()) {
      throw ConfigError("dataset has no alignments; the phoneme probe needs "
                        "them");
    }
    CodeDataset all;
    std::vector<Eigen::VectorXd> cols;
    std::vector<int> labels;
    for (const auto& e : encoded) {
      const UtteranceRecord& rec = data.records[static_cast<size_t>(
          e.record)];
      if (rec.alignment_path.empty()) continue;
      const PhonemeAlignment align =
          LoadAlignment(rec.alignment_path, data.sample_rate,
                        data.sample_rate);
      const auto names = LabelCodes(static_cast<int>(e.codes.cols()), align,
                                    hop, k);
      for (Eigen::Index c = 0; c < e.codes.cols(); ++c) {
        const auto it = inventory.find(names[static_cast<size_t>(c)]);
        if (it == inventory.end()) {
          throw LookupError("phoneme '" + names[static_cast<size_t>(c)] +
                            "' missing from the dataset inventory");
        }
        cols.push_back(e.codes.col(c));
        labels.push_back(it->second);
      }
    }
    if (cols.empty()) {
      throw ConfigError("no aligned utterances found for the phoneme probe");
    }
    all.codes.resize(cols[0].size(), static_cast<Eigen::Index>(cols.size()));
    for (size_t c = 0; c < cols.size(); ++c) {
      all.codes.col(static_cast<Eigen::Index>(c)) = cols[c];
    }
    all.labels = std::move(labels);

    CodeDataset train, val, test;
    SplitCodes(all, p->cfg.probe, p->cfg.seed, &train, &val, &test);
    const ProbeReport report = TrainPhonemeProbe(
        train, val, test, p->cfg.probe, data.phonemes, p->cfg.seed);
    WriteText(out_prefix + "_phoneme.json",
              ProbeReportJson(report, p->cfg.ToJson()));
    WriteText(out_prefix + "_phoneme.txt", ProbeReportText(report));
    std::cerr << ProbeReportText(report);
  }

  if (!phoneme_only) {
    std::vector<UtteranceCodes> utts;
    for (const auto& e : encoded) {
      UtteranceCodes u;
      u.codes = e.codes;
      u.speaker = e.speaker;
      u.utterance = e.record;
      utts.push_back(std::move(u));
    }
    const SpeakerReport report = SpeakerIndependenceReport(
        utts, p->registry.size(), p->cfg.probe, p->cfg.seed);
    WriteText(out_prefix + "_speaker.json",
              SpeakerReportJson(report, p->cfg.ToJson()));
    WriteText(out_prefix + "_speaker.txt", SpeakerReportText(report));
    std::cerr << SpeakerReportText(report);
  }
  return 0;
}

int CmdEval(const ConfigArgs& cargs, const std::string& ckpt,
            const std::string& data_flag, const std::string& out_prefix,
            const std::string& scorer, int limit, bool griffin_lim) {
  auto p = LoadPipeline(ckpt, cargs);
  const PreparedDataset data =
      LoadPrepared(ResolveDataDir(p->cfg, data_flag));
  std::vector<int> idx = data.SplitIndices("test");
  if (idx.empty()) idx = data.SplitIndices("train");
  if (limit > 0 && static_cast<int>(idx.size()) > limit) {
    idx.resize(static_cast<size_t>(limit));
  }
  if (idx.empty()) throw ConfigError("dataset has no utterances to score");

  std::vector<std::pair<Waveform, Waveform>> pairs;
  for (int i : idx) {
    const UtteranceRecord& rec = data.records[static_cast<size_t>(i)];
    const Waveform ref = ReadWav(rec.audio_path);
    const Waveform deg = p->Convert(ref, rec.speaker, rec.speaker, nullptr,
                                    griffin_lim);
    pairs.emplace_back(ref, deg);
    std::cerr << "reconstructed " << rec.audio_path << "\n";
  }
  const EvalReport report = ObjectiveEval(pairs, p->cfg.mel, scorer);
  WriteText(out_prefix + ".json", EvalReportJson(report, p->cfg.ToJson()));
  WriteText(out_prefix + ".txt", EvalReportText(report));
  std::cerr << EvalReportText(report);
  return 0;
}

int CmdBench(const ConfigArgs& cargs, const std::string& ckpt,
             const std::string& out_prefix, double seconds, int repeats) {
  auto p = LoadPipeline(ckpt, cargs);
  if (p->registry.size() < 2) {
    throw ConfigError("benchmark conversion needs two speakers");
  }
  // Deterministic test signal: a three-tone chord with a slow envelope.
  Waveform w;
  w.sample_rate = p->cfg.mel.sample_rate;
  const long n = static_cast<long>(seconds * w.sample_rate);
  w.samples.resize(static_cast<size_t>(n));
  const double pi2 = 6.28318530717958647692;
  for (long i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / w.sample_rate;
    const double env = 0.5 + 0.5 * std::sin(pi2 * 0.5 * t);
    w.samples[static_cast<size_t>(i)] =
        0.3 * env *
        (std::sin(pi2 * 220.0 * t) + 0.5 * std::sin(pi2 * 330.0 * t) +
         0.25 * std::sin(pi2 * 550.0 * t));
  }
  const RtfResult r = BenchRtf(*p, w, p->registry.speakers[0],
                               p->registry.speakers[1], repeats);
  WriteText(out_prefix + ".json", RtfResultJson(r, p->cfg.ToJson()));
  WriteText(out_prefix + ".txt", RtfResultText(r));
  std::cerr << RtfResultText(r);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FastVC voice conversion pipeline"};
  app.require_subcommand(1);

  ConfigArgs cargs;
  std::string manifest, out_dir, data_dir, stage, resume, vocoder_archive;
  std::string in_path, source, target, out_path, ckpt, out_prefix, scorer;
  double train_frac = 0.9;
  double seconds = 10.0;
  int repeats = 5;
  int limit = 100;
  int gl_iters = 60;
  bool griffin_lim = false;
  bool speaker_only = false;
  bool phoneme_only = false;

  CLI::App* prep = app.add_subcommand(
      "prepare", "normalize a corpus into a training cache");
  AddConfigArgs(prep, &cargs);
  prep->add_option("--manifest", manifest, "JSONL corpus manifest")
      ->required()
      ->check(CLI::ExistingFile);
  prep->add_option("--out", out_dir, "cache directory")->required();
  prep->add_option("--train-frac", train_frac,
                   "fraction of unsplit records assigned to train");

  CLI::App* train = app.add_subcommand("train", "run a training stage");
  AddConfigArgs(train, &cargs);
  train->add_option("--stage", stage, "ae (reconstruction) or e2e")
      ->required()
      ->check(CLI::IsMember({"ae", "e2e"}));
  train->add_option("--data", data_dir, "prepared dataset directory");
  train->add_option("--out", out_dir, "output directory for this run");
  train->add_option("--resume", resume,
                    "checkpoint to continue from (required for e2e)")
      ->check(CLI::ExistingFile);
  train->add_option("--import-vocoder", vocoder_archive,
                    "parameter archive for the inverter")
      ->check(CLI::ExistingFile);

  CLI::App* convert =
      app.add_subcommand("convert", "convert one utterance");
  AddConfigArgs(convert, &cargs);
  convert->add_option("--ckpt", ckpt, "pipeline checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  convert->add_option("--in", in_path, "input WAV")
      ->required()
      ->check(CLI::ExistingFile);
  convert->add_option("--source", source, "source speaker id")->required();
  convert->add_option("--target", target, "target speaker id")->required();
  convert->add_option("--out", out_path, "output WAV")->required();
  convert->add_flag("--griffin-lim", griffin_lim,
                    "invert with the phase-reconstruction fallback");
  convert->add_option("--gl-iters", gl_iters,
                      "fallback phase reconstruction iterations");

  CLI::App* probe =
      app.add_subcommand("probe", "latent phoneme and speaker probes");
  AddConfigArgs(probe, &cargs);
  probe->add_option("--ckpt", ckpt, "pipeline checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  probe->add_option("--data", data_dir, "prepared dataset directory");
  probe->add_option("--out", out_prefix, "report path prefix")->required();
  probe->add_flag("--speaker-only", speaker_only,
                  "skip the phoneme probe");
  probe->add_flag("--phoneme-only", phoneme_only,
                  "skip the speaker report");

  CLI::App* eval =
      app.add_subcommand("eval", "objective self-reconstruction metrics");
  AddConfigArgs(eval, &cargs);
  eval->add_option("--ckpt", ckpt, "pipeline checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--data", data_dir, "prepared dataset directory");
  eval->add_option("--out", out_prefix, "report path prefix")->required();
  eval->add_option("--scorer", scorer,
                   "external scorer: `scorer ref.wav deg.wav` -> scalar");
  eval->add_option("--limit", limit, "max utterances to score");
  eval->add_flag("--griffin-lim", griffin_lim,
                 "invert with the phase-reconstruction fallback");

  CLI::App* bench = app.add_subcommand("bench", "real-time-factor report");
  AddConfigArgs(bench, &cargs);
  bench->add_option("--ckpt", ckpt, "pipeline checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  bench->add_option("--out", out_prefix, "report path prefix")->required();
  bench->add_option("--seconds", seconds, "test signal duration");
  bench->add_option("--repeats", repeats, "timed repeats (median reported)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (prep->parsed()) {
      return CmdPrepare(cargs, manifest, out_dir, train_frac);
    }
    if (train->parsed()) {
      return CmdTrain(cargs, stage, data_dir, out_dir, resume,
                      vocoder_archive);
    }
    if (convert->parsed()) {
      return CmdConvert(cargs, ckpt, in_path, source, target, out_path,
                        griffin_lim, gl_iters);
    }
    if (probe->parsed()) {
      return CmdProbe(cargs, ckpt, data_dir, out_prefix, speaker_only,
                      phoneme_only);
    }
    if (eval->parsed()) {
      return CmdEval(cargs, ckpt, data_dir, out_prefix, scorer, limit,
                     griffin_lim);
    }
    if (bench->parsed()) {
      return CmdBench(cargs, ckpt, out_prefix, seconds, repeats);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
