// core/include/fastvc/corpus.hpp

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

#ifndef FASTVC_CORPUS_HPP_
#define FASTVC_CORPUS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "fastvc/audio.hpp"
#include "fastvc/rng.hpp"

namespace fastvc {

// Ordered speaker list; the position of a speaker defines its one-hot index,
// so the order must be stable across save and load. Construction sorts
// lexicographically so manifest row order never matters.
struct SpeakerRegistry {
  std::vector<std::string> speakers;

  int size() const { return static_cast<int>(speakers.size()); }
  bool Has(const std::string& id) const;
  // Throws LookupError listing the known ids.
  int Index(const std::string& id) const;

  static SpeakerRegistry FromIds(const std::vector<std::string>& ids);
};

struct UtteranceRecord {
  std::string audio_path;      // absolute
  std::string speaker;
  std::string split;           // "train" or "test"
  std::string alignment_path;  // absolute, empty when absent
};

struct Manifest {
  std::vector<UtteranceRecord> records;
  SpeakerRegistry registry;
};

// Reads a JSONL manifest: one object per line with keys "path", "speaker",
// optional "alignment" (null for none) and optional "split". Paths resolve
// relative to the manifest's directory and must exist. Records without an
// explicit split are assigned by AssignSplits later.
Manifest LoadManifest(const std::string& path);

// Seeded shuffle split over the records that do not already carry one.
// round(train_frac * N) records become "train", the rest "test".
void AssignSplits(std::vector<UtteranceRecord>& records, uint64_t seed,
                  double train_frac = 0.9);

struct PhonemeInterval {
  long start = 0;  // sample indices, [start, end)
  long end = 0;
  std::string label;
};

struct PhonemeAlignment {
  std::vector<PhonemeInterval> intervals;
  int sample_rate = 0;
};

// Text lines "start_sample end_sample label" in the file's native clock,
// rescaled to target_rate sample indices. Intervals must be sorted,
// non-overlapping, and non-empty.
PhonemeAlignment LoadAlignment(const std::string& path, int native_rate,
                               int target_rate);

struct Chunk {
  Waveform audio;
  bool padded = false;
  long offset = 0;  // start of the slice in the source waveform
};

// Uniform random fixed-length slice; short inputs are zero-padded on the
// right and flagged.
Chunk MakeChunk(const Waveform& w, long chunk_len, Rng& rng);

// A normalized on-disk dataset: resampled audio cache, registry, split
// listing, rescaled alignments, phoneme inventory.
struct PreparedDataset {
  std::string root;
  SpeakerRegistry registry;
  std::vector<UtteranceRecord> records;
  std::vector<std::string> phonemes;
  uint64_t seed = 0;
  int sample_rate = 0;

  std::vector<int> SplitIndices(const std::string& split) const;
};

PreparedDataset PrepareDataset(const std::string& manifest_path,
                               const std::string& out_dir, int target_rate,
                               uint64_t seed, double train_frac,
                               const std::string& run_config_json);

// Loads a directory written by PrepareDataset. Unknown split tokens in the
// listing are a validation error.
PreparedDataset LoadPrepared(const std::string& dir);

}  // namespace fastvc

#endif  // FASTVC_CORPUS_HPP_
