// core/src/corpus.cpp

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

#include "fastvc/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "fastvc/error.hpp"
#include "fastvc/resample.hpp"

namespace fastvc {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// SpeakerRegistry
// ---------------------------------------------------------------------------

bool SpeakerRegistry::Has(const std::string& id) const {
  return std::find(speakers.begin(), speakers.end(), id) != speakers.end();
}

int SpeakerRegistry::Index(const std::string& id) const {
  auto it = std::find(speakers.begin(), speakers.end(), id);
  if (it == speakers.end()) {
    std::string known;
    for (const auto& s : speakers) {
      if (!known.empty()) known += ", ";
      known += s;
    }
    throw LookupError("unknown speaker '" + id + "' (known: " + known + ")");
  }
  return static_cast<int>(it - speakers.begin());
}

SpeakerRegistry SpeakerRegistry::FromIds(const std::vector<std::string>& ids) {
  std::set<std::string> uniq(ids.begin(), ids.end());
  SpeakerRegistry r;
  r.speakers.assign(uniq.begin(), uniq.end());
  return r;
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

namespace {

std::string ResolvePath(const std::string& base_dir, const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) path = fs::path(base_dir) / path;
  return fs::weakly_canonical(path).string();
}

void CheckSplitToken(const std::string& split, const std::string& where) {
  if (split != "train" && split != "test") {
    throw ValidationError(where + ": unknown split token '" + split +
                          "' (expected train or test)");
  }
}

}  // namespace

Manifest LoadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path);
  std::string base_dir = fs::path(path).parent_path().string();
  Manifest m;
  std::set<std::string> seen_paths;
  std::vector<std::string> ids;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    std::string where = path + ":" + std::to_string(row);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError(where + ": bad JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("path") || !j.contains("speaker")) {
      throw ValidationError(where + ": need object with path and speaker");
    }
    UtteranceRecord rec;
    rec.audio_path = ResolvePath(base_dir, j.at("path").get<std::string>());
    rec.speaker = j.at("speaker").get<std::string>();
    if (rec.speaker.empty()) throw ValidationError(where + ": empty speaker");
    if (j.contains("alignment") && !j.at("alignment").is_null()) {
      rec.alignment_path =
          ResolvePath(base_dir, j.at("alignment").get<std::string>());
    }
    if (j.contains("split") && !j.at("split").is_null()) {
      rec.split = j.at("split").get<std::string>();
      CheckSplitToken(rec.split, where);
    }
    if (!seen_paths.insert(rec.audio_path).second) {
      throw ValidationError(where + ": duplicate path " + rec.audio_path);
    }
    if (!fs::exists(rec.audio_path)) {
      throw IoError(where + ": audio file not found: " + rec.audio_path);
    }
    if (!rec.alignment_path.empty() && !fs::exists(rec.alignment_path)) {
      throw IoError(where + ": alignment file not found: " +
                    rec.alignment_path);
    }
    ids.push_back(rec.speaker);
    m.records.push_back(std::move(rec));
  }
  m.registry = SpeakerRegistry::FromIds(ids);
  return m;
}

void AssignSplits(std::vector<UtteranceRecord>& records, uint64_t seed,
                  double train_frac) {
  if (train_frac < 0.0 || train_frac > 1.0) {
    throw ArgumentError("train_frac must be in [0, 1]");
  }
  std::vector<size_t> open;
  for (size_t i = 0; i < records.size(); ++i) {
    if (records[i].split.empty()) open.push_back(i);
  }
  if (open.empty()) return;
  Rng rng = Rng::Derive(seed, {0x5B117ull});
  rng.Shuffle(open);
  size_t n_train = static_cast<size_t>(
      std::floor(train_frac * static_cast<double>(open.size()) + 0.5));
  for (size_t i = 0; i < open.size(); ++i) {
    records[open[i]].split = i < n_train ? "train" : "test";
  }
}

// ---------------------------------------------------------------------------
// Alignments
// ---------------------------------------------------------------------------

PhonemeAlignment LoadAlignment(const std::string& path, int native_rate,
                               int target_rate) {
  if (native_rate < 1 || target_rate < 1) {
    throw ArgumentError("LoadAlignment: rates must be positive");
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot open alignment " + path);
  PhonemeAlignment out;
  out.sample_rate = target_rate;
  double scale = static_cast<double>(target_rate) / native_rate;
  std::string line;
  int row = 0;
  long prev_end = 0;
  while (std::getline(in, line)) {
    ++row;
    std::string where = path + ":" + std::to_string(row);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    long start = 0, end = 0;
    std::string label;
    if (!(ss >> start >> end >> label)) {
      throw ValidationError(where + ": expected 'start end label'");
    }
    if (end <= start || start < 0) {
      throw ValidationError(where + ": empty or negative interval");
    }
    PhonemeInterval iv;
    iv.start = std::lround(start * scale);
    iv.end = std::lround(end * scale);
    iv.label = label;
    if (iv.end <= iv.start) iv.end = iv.start + 1;
    if (!out.intervals.empty() && iv.start < prev_end) {
      throw ValidationError(where + ": intervals overlap or are unsorted");
    }
    prev_end = iv.end;
    out.intervals.push_back(std::move(iv));
  }
  if (out.intervals.empty()) {
    throw ValidationError(path + ": no intervals");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Chunks
// ---------------------------------------------------------------------------

Chunk MakeChunk(const Waveform& w, long chunk_len, Rng& rng) {
  if (chunk_len < 1) throw ArgumentError("chunk_len must be >= 1");
  Chunk out;
  out.audio.sample_rate = w.sample_rate;
  long n = w.length();
  if (n <= chunk_len) {
    out.audio.samples = w.samples;
    out.audio.samples.resize(static_cast<size_t>(chunk_len), 0.0);
    out.padded = n < chunk_len;
    out.offset = 0;
    return out;
  }
  long start = static_cast<long>(
      rng.Below(static_cast<uint64_t>(n - chunk_len + 1)));
  out.audio.samples.assign(
      w.samples.begin() + start, w.samples.begin() + start + chunk_len);
  out.offset = start;
  return out;
}

// ---------------------------------------------------------------------------
// Prepared datasets
// ---------------------------------------------------------------------------

std::vector<int> PreparedDataset::SplitIndices(const std::string& split) const {
  std::vector<int> out;
  for (size_t i = 0; i < records.size(); ++i) {
    if (records[i].split == split) out.push_back(static_cast<int>(i));
  }
  return out;
}

namespace {

// The native clock of an alignment file is taken from its audio sibling.
int AlignmentNativeRate(const std::string& audio_path) {
  Waveform w = ReadWav(audio_path);
  return w.sample_rate;
}

void WriteDatasetJson(const PreparedDataset& ds,
                      const std::string& run_config_json) {
  json j;
  j["sample_rate"] = ds.sample_rate;
  j["seed"] = ds.seed;
  j["speakers"] = ds.registry.speakers;
  j["phonemes"] = ds.phonemes;
  json recs = json::array();
  for (const auto& r : ds.records) {
    json e;
    e["path"] = fs::relative(r.audio_path, ds.root).string();
    e["speaker"] = r.speaker;
    e["split"] = r.split;
    if (r.alignment_path.empty()) {
      e["alignment"] = nullptr;
    } else {
      e["alignment"] = fs::relative(r.alignment_path, ds.root).string();
    }
    recs.push_back(std::move(e));
  }
  j["records"] = std::move(recs);
  if (!run_config_json.empty()) {
    j["run_config"] = json::parse(run_config_json);
  }
  std::ofstream out(fs::path(ds.root) / "dataset.json");
  if (!out) throw IoError("cannot write dataset.json under " + ds.root);
  out << j.dump(2) << "\n";
}

}  // namespace

PreparedDataset PrepareDataset(const std::string& manifest_path,
                               const std::string& out_dir, int target_rate,
                               uint64_t seed, double train_frac,
                               const std::string& run_config_json) {
  if (target_rate < 1) throw ArgumentError("target_rate must be positive");
  Manifest m = LoadManifest(manifest_path);
  AssignSplits(m.records, seed, train_frac);

  fs::create_directories(fs::path(out_dir) / "audio");
  fs::create_directories(fs::path(out_dir) / "align");

  PreparedDataset ds;
  ds.root = fs::weakly_canonical(out_dir).string();
  ds.registry = m.registry;
  ds.seed = seed;
  ds.sample_rate = target_rate;

  std::set<std::string> phonemes;
  int counter = 0;
  for (const auto& rec : m.records) {
    char tag[16];
    std::snprintf(tag, sizeof(tag), "%04d", counter++);
    Waveform w = ReadWav(rec.audio_path);
    int native_rate = w.sample_rate;
    w = Resample(w, target_rate);
    PeakNormalize(w);
    std::string audio_out =
        (fs::path(ds.root) / "audio" / (std::string(tag) + ".wav")).string();
    WriteWav(audio_out, w, WavEncoding::kFloat32);

    UtteranceRecord out_rec;
    out_rec.audio_path = audio_out;
    out_rec.speaker = rec.speaker;
    out_rec.split = rec.split;
    if (!rec.alignment_path.empty()) {
      PhonemeAlignment a =
          LoadAlignment(rec.alignment_path, native_rate, target_rate);
      std::string align_out =
          (fs::path(ds.root) / "align" / (std::string(tag) + ".phn")).string();
      std::ofstream af(align_out);
      if (!af) throw IoError("cannot write " + align_out);
      for (const auto& iv : a.intervals) {
        af << iv.start << " " << iv.end << " " << iv.label << "\n";
        phonemes.insert(iv.label);
      }
      out_rec.alignment_path = align_out;
    }
    ds.records.push_back(std::move(out_rec));
  }
  ds.phonemes.assign(phonemes.begin(), phonemes.end());
  WriteDatasetJson(ds, run_config_json);
  return ds;
}

PreparedDataset LoadPrepared(const std::string& dir) {
  fs::path root = fs::weakly_canonical(dir);
  std::ifstream in(root / "dataset.json");
  if (!in) throw IoError("cannot open " + (root / "dataset.json").string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("dataset.json: bad JSON: ") + e.what());
  }
  PreparedDataset ds;
  ds.root = root.string();
  ds.sample_rate = j.at("sample_rate").get<int>();
  ds.seed = j.at("seed").get<uint64_t>();
  ds.registry.speakers = j.at("speakers").get<std::vector<std::string>>();
  ds.phonemes = j.at("phonemes").get<std::vector<std::string>>();
  for (const auto& e : j.at("records")) {
    UtteranceRecord rec;
    rec.audio_path = (root / e.at("path").get<std::string>()).string();
    rec.speaker = e.at("speaker").get<std::string>();
    rec.split = e.at("split").get<std::string>();
    CheckSplitToken(rec.split, rec.audio_path);
    if (!e.at("alignment").is_null()) {
      rec.alignment_path =
          (root / e.at("alignment").get<std::string>()).string();
    }
    if (!ds.registry.Has(rec.speaker)) {
      throw ValidationError("dataset.json: speaker " + rec.speaker +
                            " missing from registry");
    }
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

}  // namespace fastvc
