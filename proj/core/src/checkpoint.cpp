// core/src/checkpoint.cpp

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

#include "fastvc/checkpoint.hpp"

#include <chrono>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "json.hpp"

#include "fastvc/error.hpp"
#include "fastvc/resample.hpp"

namespace fastvc {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'F', 'V', 'C', 'K'};
constexpr char kArchiveMagic[4] = {'F', 'V', 'C', 'A'};
constexpr uint32_t kVersion = 1;

void RoundToF32(ag::Matrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = static_cast<double>(static_cast<float>(m.data()[i]));
  }
}

// Rounds values and optimizer moments to float32 so the in-memory state
// after a save equals the state after reloading that save.
void CanonicalizeParams(ParameterStore& ps) {
  for (auto& p : ps.items()) {
    RoundToF32(p->value);
    RoundToF32(p->adam_m);
    RoundToF32(p->adam_v);
  }
}

void WriteU32(std::ostream& os, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void WriteU64(std::ostream& os, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

uint32_t ReadU32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

uint64_t ReadU64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

void WriteBlob(std::ostream& os, const ag::Matrix& m) {
  std::vector<float> buf(static_cast<size_t>(m.size()));
  size_t n = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      buf[n++] = static_cast<float>(m(r, c));
    }
  }
  os.write(reinterpret_cast<const char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

ag::Matrix ReadBlob(std::istream& is, int rows, int cols,
                    const std::string& name) {
  std::vector<float> buf(static_cast<size_t>(rows) * cols);
  is.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!is) throw IoError("checkpoint truncated while reading blob " + name);
  ag::Matrix m(rows, cols);
  size_t n = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      m(r, c) = static_cast<double>(buf[n++]);
    }
  }
  return m;
}

struct BlobRef {
  std::string name;
  const ag::Matrix* data;
};

// Serialization order is store creation order, which Build() fixes.
std::vector<BlobRef> CollectBlobs(ParameterStore& ps) {
  std::vector<BlobRef> blobs;
  for (auto& p : ps.items()) {
    blobs.push_back({p->name, &p->value});
    if (p->adam_m.size() > 0) blobs.push_back({p->name + "#m", &p->adam_m});
    if (p->adam_v.size() > 0) blobs.push_back({p->name + "#v", &p->adam_v});
  }
  return blobs;
}

void WriteContainer(const std::string& path, const char magic[4],
                    json header, const std::vector<BlobRef>& blobs) {
  json jblobs = json::array();
  for (const auto& b : blobs) {
    jblobs.push_back({{"name", b.name},
                      {"rows", b.data->rows()},
                      {"cols", b.data->cols()}});
  }
  header["blobs"] = std::move(jblobs);
  const std::string text = header.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write(magic, 4);
  WriteU32(os, kVersion);
  WriteU64(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& b : blobs) WriteBlob(os, *b.data);
  if (!os) throw IoError("short write: " + path);
}

json ReadHeader(std::istream& is, const char magic[4],
                const std::string& path) {
  char got[4];
  is.read(got, 4);
  if (!is || std::memcmp(got, magic, 4) != 0) {
    throw ValidationError("not a recognized archive: " + path);
  }
  const uint32_t version = ReadU32(is);
  if (version != kVersion) {
    throw ValidationError("unsupported archive version " +
                          std::to_string(version) + " in " + path);
  }
  const uint64_t len = ReadU64(is);
  std::string text(len, '\0');
  is.read(text.data(), static_cast<std::streamsize>(len));
  if (!is) throw IoError("checkpoint truncated while reading header: " + path);
  return json::parse(text);
}

}  // namespace

std::unique_ptr<Pipeline> Pipeline::Build(const RunConfig& cfg,
                                          const SpeakerRegistry& registry) {
  cfg.Validate();
  if (registry.size() < 2) {
    throw ConfigError("conversion needs at least 2 speakers, got " +
                      std::to_string(registry.size()));
  }
  auto p = std::make_unique<Pipeline>();
  p->cfg = cfg;
  p->registry = registry;
  p->melfront = std::make_unique<MelFrontEnd>(p->params, cfg.mel);
  p->model = std::make_unique<ConversionModel>(p->params, cfg.model,
                                               registry.size(), cfg.seed);
  p->vocoder = std::make_unique<MelGanGenerator>(
      p->params, cfg.vocoder, cfg.mel.n_mels, cfg.mel.hop, cfg.seed);
  p->discriminator = std::make_unique<DiscriminatorBank>(
      p->params, cfg.discriminator, cfg.seed);
  if (cfg.confusion.enabled) {
    p->classifier = std::make_unique<SpeakerClassifier>(
        p->params, cfg.model.bottleneck.d, cfg.confusion.hidden,
        registry.size(), cfg.seed);
  }
  p->ref_encoder = std::make_unique<Encoder>(p->params, cfg.model,
                                             registry.size(), cfg.seed,
                                             "ref_encoder");
  p->params.SetTrainable("ref_encoder.", false);
  p->melfront->InitFromReference();
  return p;
}

Waveform Pipeline::Convert(const Waveform& w, const std::string& source,
                           const std::string& target, StageTimings* timings,
                           bool use_griffin_lim, int griffin_lim_iters) const {
  const int src = registry.Index(source);
  const int tgt = registry.Index(target);
  if (w.length() < cfg.mel.hop) {
    throw ArgumentError("input shorter than one hop (" +
                        std::to_string(w.length()) + " < " +
                        std::to_string(cfg.mel.hop) + " samples)");
  }
  Waveform in = w;
  if (in.sample_rate != cfg.mel.sample_rate) {
    in = Resample(in, cfg.mel.sample_rate);
  }

  using Clock = std::chrono::steady_clock;
  auto t0 = Clock::now();
  const MelSpectrogram mel = melfront->Forward(in);
  auto t1 = Clock::now();
  const auto out = model->Autoencode(mel, src, tgt);
  auto t2 = Clock::now();
  MelSpectrogram converted{out.post, mel.frame_rate, mel.hop};
  Waveform y;
  if (use_griffin_lim) {
    y = GriffinLim(converted, cfg.mel, griffin_lim_iters).audio;
  } else {
    y = vocoder->Generate(converted, cfg.mel.sample_rate);
  }
  auto t3 = Clock::now();

  if (timings != nullptr) {
    auto secs = [](Clock::time_point a, Clock::time_point b) {
      return std::chrono::duration<double>(b - a).count();
    };
    timings->melfront_s = secs(t0, t1);
    timings->model_s = secs(t1, t2);
    timings->vocoder_s = secs(t2, t3);
  }
  return y;
}

void SaveCheckpoint(Pipeline& p, const std::string& path) {
  CanonicalizeParams(p.params);
  json header;
  header["kind"] = "pipeline";
  header["run_config"] = json::parse(p.cfg.ToJson());
  header["speakers"] = p.registry.speakers;
  header["epoch"] = p.epoch;
  header["stage"] = p.stage;
  header["steps"] = {{"g", p.steps_g}, {"d", p.steps_d}, {"c", p.steps_c}};
  WriteContainer(path, kMagic, std::move(header), CollectBlobs(p.params));
}

std::unique_ptr<Pipeline> LoadCheckpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  const json header = ReadHeader(is, kMagic, path);
  if (header.value("kind", "") != "pipeline") {
    throw ValidationError("archive is not a pipeline checkpoint: " + path);
  }

  const RunConfig cfg = RunConfig::FromJson(header.at("run_config").dump());
  SpeakerRegistry registry;
  registry.speakers = header.at("speakers").get<std::vector<std::string>>();
  auto p = Pipeline::Build(cfg, registry);
  p->epoch = header.at("epoch").get<int>();
  p->stage = header.at("stage").get<std::string>();
  p->steps_g = header.at("steps").at("g").get<int64_t>();
  p->steps_d = header.at("steps").at("d").get<int64_t>();
  p->steps_c = header.at("steps").at("c").get<int64_t>();

  for (const auto& jb : header.at("blobs")) {
    const std::string name = jb.at("name").get<std::string>();
    const int rows = jb.at("rows").get<int>();
    const int cols = jb.at("cols").get<int>();
    ag::Matrix m = ReadBlob(is, rows, cols, name);

    std::string base = name;
    int slot = 0;  // 0 value, 1 adam_m, 2 adam_v
    if (const auto pos = name.rfind("#m"); pos == name.size() - 2) {
      base = name.substr(0, pos);
      slot = 1;
    } else if (const auto pos2 = name.rfind("#v"); pos2 == name.size() - 2) {
      base = name.substr(0, pos2);
      slot = 2;
    }
    Parameter* param = p->params.Find(base);
    if (param == nullptr) {
      throw ValidationError("checkpoint names unknown parameter " + base);
    }
    if (param->value.rows() != rows || param->value.cols() != cols) {
      throw ValidationError("shape mismatch for " + base + ": checkpoint " +
                            std::to_string(rows) + "x" +
                            std::to_string(cols) + ", model " +
                            std::to_string(param->value.rows()) + "x" +
                            std::to_string(param->value.cols()));
    }
    if (slot == 0) {
      param->value = std::move(m);
    } else if (slot == 1) {
      param->adam_m = std::move(m);
    } else {
      param->adam_v = std::move(m);
    }
  }
  p->melfront->MarkInitialized();
  return p;
}

RunConfig PeekCheckpointConfig(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  const json header = ReadHeader(is, kMagic, path);
  return RunConfig::FromJson(header.at("run_config").dump());
}

void SaveVocoderArchive(Pipeline& p, const std::string& path) {
  CanonicalizeParams(p.params);
  json header;
  header["kind"] = "params";
  json names = json::object();
  std::vector<BlobRef> blobs;
  for (Parameter* param : p.params.WithPrefix("vocoder.")) {
    names[param->name] = param->name;
    blobs.push_back({param->name, &param->value});
  }
  header["names"] = std::move(names);
  WriteContainer(path, kArchiveMagic, std::move(header), blobs);
}

void ImportVocoderArchive(Pipeline& p, const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open archive: " + path);
  const json header = ReadHeader(is, kArchiveMagic, path);
  if (header.value("kind", "") != "params") {
    throw ValidationError("archive does not carry importable parameters: " +
                          path);
  }
  const json& names = header.at("names");
  int imported = 0;
  for (const auto& jb : header.at("blobs")) {
    const std::string name = jb.at("name").get<std::string>();
    const int rows = jb.at("rows").get<int>();
    const int cols = jb.at("cols").get<int>();
    ag::Matrix m = ReadBlob(is, rows, cols, name);
    if (!names.contains(name)) {
      throw ValidationError("archive blob " + name + " has no target name");
    }
    const std::string target = names.at(name).get<std::string>();
    Parameter* param = p.params.Find(target);
    if (param == nullptr) {
      throw ValidationError("archive names unknown parameter " + target);
    }
    if (param->value.rows() != rows || param->value.cols() != cols) {
      throw ValidationError(
          "shape mismatch importing " + target + ": archive " +
          std::to_string(rows) + "x" + std::to_string(cols) + ", model " +
          std::to_string(param->value.rows()) + "x" +
          std::to_string(param->value.cols()));
    }
    param->value = std::move(m);
    ++imported;
  }
  if (imported == 0) {
    throw ValidationError("archive contains no parameters: " + path);
  }
}

}  // namespace fastvc
