// tests/testutil.cpp

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

#include "testutil.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fastvc/rng.hpp"

namespace fastvc {
namespace test {

namespace fs = std::filesystem;

TempDir::TempDir() {
  std::string tmpl =
      (fs::temp_directory_path() / "fastvc_test_XXXXXX").string();
  if (mkdtemp(tmpl.data()) == nullptr) {
    throw std::runtime_error("mkdtemp failed for " + tmpl);
  }
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

namespace {

constexpr int kSampleRate = 22050;
constexpr int kHarmonics = 8;
constexpr double kF0 = 150.0;
const double kAmFreq[4] = {2.2, 3.7, 5.1, 6.6};
const char* kPhones[5] = {"aa", "iy", "s", "m", "eh"};

}  // namespace

Waveform SmokeUtterance(int speaker, int utterance, long n_samples) {
  Rng rng = Rng::Derive(11, {0x5707AB, static_cast<uint64_t>(utterance)});
  double phase[kHarmonics];
  for (double& p : phase) p = rng.Uniform(0.0, 2.0 * M_PI);

  Waveform w;
  w.sample_rate = kSampleRate;
  w.samples.resize(n_samples);
  const double am_f = kAmFreq[utterance % 4];
  const double am_p = 0.5 * utterance;
  for (long i = 0; i < n_samples; ++i) {
    const double t = static_cast<double>(i) / kSampleRate;
    double s = 0.0;
    for (int h = 1; h <= kHarmonics; ++h) {
      const double base = speaker == 0 ? 1.0 / h : h / 8.0;
      s += base * base * std::sin(2.0 * M_PI * kF0 * h * t + phase[h - 1]);
    }
    const double am = 0.85 + 0.15 * std::sin(2.0 * M_PI * am_f * t + am_p);
    w.samples[i] = s * am;
  }
  PeakNormalize(w, 0.9);
  return w;
}

void WriteSmokeCorpus(const std::string& dir) {
  fs::create_directories(dir + "/wavs");
  fs::create_directories(dir + "/align");
  std::ofstream manifest(dir + "/manifest.jsonl");
  if (!manifest) throw std::runtime_error("cannot write manifest in " + dir);

  for (int s = 0; s < 2; ++s) {
    const std::string spk = s == 0 ? "spk_a" : "spk_b";
    for (int u = 0; u < 4; ++u) {
      const std::string stem = "s" + std::to_string(s) + "_u" +
                               std::to_string(u);
      const Waveform w = SmokeUtterance(s, u);
      WriteWav(dir + "/wavs/" + stem + ".wav", w);

      const long n = w.length();
      const long b1 = n / 3, b2 = 2 * n / 3;
      std::ofstream align(dir + "/align/" + stem + ".txt");
      align << 0 << " " << b1 << " " << kPhones[u % 5] << "\n"
            << b1 << " " << b2 << " " << kPhones[(u + 1) % 5] << "\n"
            << b2 << " " << n << " " << kPhones[(u + 2) % 5] << "\n";

      manifest << "{\"path\": \"wavs/" << stem << ".wav\", "
               << "\"speaker\": \"" << spk << "\", "
               << "\"alignment\": \"align/" << stem << ".txt\", "
               << "\"split\": \"train\"}\n";
    }
  }
}

std::string SmokeConfigJson() {
  return R"({
  "seed": 1234,
  "model": {
    "bottleneck_d": 16,
    "bottleneck_k": 4,
    "enc_conv_width": 64,
    "dec_lstm_width": 64,
    "dec_conv_width": 64,
    "postnet_width": 64,
    "dec_conv_layers": 1,
    "dec_lstm_layers": 1
  },
  "vocoder": {"base_width": 4},
  "discriminator": {"base_width": 4, "max_width": 64},
  "stage1": {
    "epochs": 200,
    "batch": 8,
    "chunk": 8192,
    "optimizer": {"lr": 0.003, "beta2": 0.9}
  },
  "stage2": {
    "epochs": 200,
    "batch": 4,
    "chunk": 3072
  }
})";
}

RunConfig SmokeRunConfig() { return RunConfig::FromJson(SmokeConfigJson()); }

RunConfig TinyRunConfig() {
  return RunConfig::FromJson(R"({
  "seed": 7,
  "mel": {"n_fft": 64, "hop": 16, "win": 64, "n_mels": 8, "f_max": 8000.0},
  "model": {
    "bottleneck_d": 4,
    "bottleneck_k": 2,
    "enc_conv_width": 8,
    "enc_conv_layers": 2,
    "enc_kernel": 3,
    "dec_lstm_width": 8,
    "dec_conv_width": 8,
    "dec_conv_layers": 1,
    "dec_lstm_layers": 1,
    "postnet_width": 8,
    "postnet_layers": 2,
    "postnet_kernel": 3
  },
  "vocoder": {"base_width": 2, "upsample_factors": [4, 2, 2]},
  "discriminator": {"base_width": 2, "max_width": 8}
})");
}

double MaxAbsDiff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    return std::numeric_limits<double>::infinity();
  }
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool FilesEqual(const std::string& a, const std::string& b) {
  return ReadFile(a) == ReadFile(b);
}

}  // namespace test
}  // namespace fastvc
