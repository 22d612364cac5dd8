// core/src/metrics.cpp

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

#include "fastvc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "json.hpp"

#include "fastvc/audio.hpp"
#include "fastvc/error.hpp"

namespace fastvc {

namespace fs = std::filesystem;

namespace {

constexpr double kDbEps = 1e-10;

void CheckSameShape(const MelSpectrogram& a, const MelSpectrogram& b) {
  if (a.values.rows() != b.values.rows() ||
      a.values.cols() != b.values.cols()) {
    throw ShapeError("spectrogram shapes differ: " +
                     std::to_string(a.values.rows()) + "x" +
                     std::to_string(a.values.cols()) + " vs " +
                     std::to_string(b.values.rows()) + "x" +
                     std::to_string(b.values.cols()));
  }
}

// Orthonormal type-II cosine transform rows 0..n_out-1.
Eigen::MatrixXd DctMatrix(int n_out, int n_in) {
  Eigen::MatrixXd d(n_out, n_in);
  const double pi = 3.14159265358979323846;
  for (int k = 0; k < n_out; ++k) {
    const double scale =
        std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(n_in));
    for (int n = 0; n < n_in; ++n) {
      d(k, n) = scale * std::cos(pi * k * (2.0 * n + 1.0) / (2.0 * n_in));
    }
  }
  return d;
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

MetricStats Stats(const std::vector<double>& v) {
  MetricStats s;
  s.n = static_cast<int>(v.size());
  if (v.empty()) return s;
  s.available = true;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / s.n;
  if (s.n > 1) {
    double sq = 0.0;
    for (double x : v) sq += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(sq / (s.n - 1));
  }
  return s;
}

bool RunScorer(const std::string& cmd, const std::string& ref,
               const std::string& deg, double* out) {
  const std::string full = cmd + " \"" + ref + "\" \"" + deg + "\"";
  FILE* pipe = popen(full.c_str(), "r");
  if (pipe == nullptr) return false;
  std::string text;
  char buf[256];
  while (std::fgets(buf, sizeof(buf), pipe) != nullptr) text += buf;
  const int status = pclose(pipe);
  if (status != 0) return false;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || !std::isfinite(v)) return false;
  *out = v;
  return true;
}

std::string FormatStats(const char* name, const MetricStats& s) {
  char buf[128];
  if (s.available) {
    std::snprintf(buf, sizeof(buf), "  %-10s %10.4f +- %.4f  (n=%d)\n", name,
                  s.mean, s.stddev, s.n);
  } else {
    std::snprintf(buf, sizeof(buf), "  %-10s unavailable\n", name);
  }
  return buf;
}

nlohmann::json StatsJson(const MetricStats& s) {
  nlohmann::json j;
  j["available"] = s.available;
  j["mean"] = s.mean;
  j["stddev"] = s.stddev;
  j["n"] = s.n;
  return j;
}

}  // namespace

double MelL2(const MelSpectrogram& a, const MelSpectrogram& b) {
  CheckSameShape(a, b);
  return (a.values - b.values).squaredNorm() /
         static_cast<double>(a.values.size());
}

double MelCepstralDistortion(const MelSpectrogram& a, const MelSpectrogram& b,
                             int n_coeffs) {
  CheckSameShape(a, b);
  const int n_mels = a.n_mels();
  const int used = std::min(n_coeffs, n_mels - 1);
  if (used < 1) throw ArgumentError("too few Mel channels for cepstra");
  const Eigen::MatrixXd dct = DctMatrix(used + 1, n_mels);
  const Eigen::MatrixXd delta =
      dct * (a.values - b.values);  // coefficient 0 in row 0
  const double scale = 10.0 / std::log(10.0) * std::sqrt(2.0);
  double acc = 0.0;
  for (int t = 0; t < a.frames(); ++t) {
    acc += scale * delta.col(t).tail(used).norm();
  }
  return acc / a.frames();
}

double LogSpectralDistance(const Waveform& a, const Waveform& b,
                           const MelFrontConfig& cfg) {
  if (a.length() != b.length()) {
    throw ShapeError("waveform lengths differ: " + std::to_string(a.length()) +
                     " vs " + std::to_string(b.length()));
  }
  const Eigen::MatrixXcd sa = Stft(a.samples, cfg);
  const Eigen::MatrixXcd sb = Stft(b.samples, cfg);
  double acc = 0.0;
  for (Eigen::Index t = 0; t < sa.cols(); ++t) {
    double frame = 0.0;
    for (Eigen::Index k = 0; k < sa.rows(); ++k) {
      const double da = 20.0 * std::log10(std::abs(sa(k, t)) + kDbEps);
      const double db = 20.0 * std::log10(std::abs(sb(k, t)) + kDbEps);
      frame += (da - db) * (da - db);
    }
    acc += std::sqrt(frame / sa.rows());
  }
  return acc / sa.cols();
}

EvalReport ObjectiveEval(
    const std::vector<std::pair<Waveform, Waveform>>& pairs,
    const MelFrontConfig& cfg, const std::string& scorer_cmd) {
  if (pairs.empty()) throw ArgumentError("no pairs to evaluate");
  std::vector<double> mel_l2, mcd, lsd, ext;
  bool ext_failed = false;

  fs::path scratch;
  if (!scorer_cmd.empty()) {
    scratch = fs::temp_directory_path() /
              ("fastvc_eval_" + std::to_string(::getpid()));
    fs::create_directories(scratch);
  }

  for (size_t i = 0; i < pairs.size(); ++i) {
    Waveform ref = pairs[i].first;
    Waveform deg = pairs[i].second;
    if (ref.sample_rate != deg.sample_rate) {
      throw PairingError("pair " + std::to_string(i) + ": sample rates " +
                         std::to_string(ref.sample_rate) + " vs " +
                         std::to_string(deg.sample_rate));
    }
    const int64_t diff = std::llabs(ref.length() - deg.length());
    if (diff > cfg.hop) {
      throw PairingError("pair " + std::to_string(i) + ": lengths " +
                         std::to_string(ref.length()) + " vs " +
                         std::to_string(deg.length()) +
                         " differ by more than one hop");
    }
    const size_t n = static_cast<size_t>(
        std::min(ref.length(), deg.length()));
    ref.samples.resize(n);
    deg.samples.resize(n);

    const MelSpectrogram mr = ReferenceLogMel(ref, cfg);
    const MelSpectrogram md = ReferenceLogMel(deg, cfg);
    mel_l2.push_back(MelL2(mr, md));
    mcd.push_back(MelCepstralDistortion(mr, md));
    lsd.push_back(LogSpectralDistance(ref, deg, cfg));

    if (!scorer_cmd.empty() && !ext_failed) {
      const std::string rp = (scratch / "ref.wav").string();
      const std::string dp = (scratch / "deg.wav").string();
      WriteWav(rp, ref);
      WriteWav(dp, deg);
      double score = 0.0;
      if (RunScorer(scorer_cmd, rp, dp, &score)) {
        ext.push_back(score);
      } else {
        ext_failed = true;
      }
    }
  }
  if (!scratch.empty()) {
    std::error_code ec;
    fs::remove_all(scratch, ec);
  }

  EvalReport report;
  report.n_pairs = static_cast<int>(pairs.size());
  report.mel_l2 = Stats(mel_l2);
  report.mcd = Stats(mcd);
  report.lsd = Stats(lsd);
  report.external_cmd = scorer_cmd;
  if (!scorer_cmd.empty() && !ext_failed) {
    report.external = Stats(ext);
  }
  return report;
}

std::string EvalReportJson(const EvalReport& r,
                           const std::string& run_config_json) {
  nlohmann::json j;
  j["kind"] = "objective_eval";
  j["n_pairs"] = r.n_pairs;
  j["mel_l2"] = StatsJson(r.mel_l2);
  j["mcd"] = StatsJson(r.mcd);
  j["lsd"] = StatsJson(r.lsd);
  j["external"] = StatsJson(r.external);
  j["external_cmd"] = r.external_cmd;
  j["run_config"] = nlohmann::json::parse(run_config_json);
  return j.dump(2);
}

std::string EvalReportText(const EvalReport& r) {
  std::ostringstream os;
  os << "objective evaluation over " << r.n_pairs << " pairs\n";
  os << FormatStats("mel_l2", r.mel_l2);
  os << FormatStats("mcd", r.mcd);
  os << FormatStats("lsd", r.lsd);
  if (!r.external_cmd.empty()) os << FormatStats("external", r.external);
  return os.str();
}

std::string MachineDescriptor() {
  std::ifstream is("/proc/cpuinfo");
  std::string line;
  std::string model = "unknown cpu";
  while (std::getline(is, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto pos = line.find(':');
      if (pos != std::string::npos) {
        model = line.substr(pos + 1);
        const auto first = model.find_first_not_of(' ');
        if (first != std::string::npos) model = model.substr(first);
      }
      break;
    }
  }
  return model;
}

RtfResult BenchRtf(const Pipeline& p, const Waveform& w,
                   const std::string& source, const std::string& target,
                   int repeats) {
  if (repeats < 3) throw ArgumentError("benchmark needs at least 3 repeats");
  StageTimings warmup;
  p.Convert(w, source, target, &warmup);

  std::vector<double> mf, mo, vo;
  for (int i = 0; i < repeats; ++i) {
    StageTimings timing;
    p.Convert(w, source, target, &timing);
    mf.push_back(timing.melfront_s);
    mo.push_back(timing.model_s);
    vo.push_back(timing.vocoder_s);
  }

  RtfResult r;
  r.audio_seconds = w.duration_seconds();
  r.melfront_s = Median(mf);
  r.model_s = Median(mo);
  r.vocoder_s = Median(vo);
  r.total_s = r.melfront_s + r.model_s + r.vocoder_s;
  r.rtf = r.audio_seconds / r.total_s;
  r.repeats = repeats;
  r.machine = MachineDescriptor();
  return r;
}

std::string RtfResultJson(const RtfResult& r,
                          const std::string& run_config_json) {
  nlohmann::json j;
  j["kind"] = "rtf_benchmark";
  j["audio_seconds"] = r.audio_seconds;
  j["melfront_s"] = r.melfront_s;
  j["model_s"] = r.model_s;
  j["vocoder_s"] = r.vocoder_s;
  j["total_s"] = r.total_s;
  j["rtf"] = r.rtf;
  j["repeats"] = r.repeats;
  j["machine"] = r.machine;
  j["run_config"] = nlohmann::json::parse(run_config_json);
  return j.dump(2);
}

std::string RtfResultText(const RtfResult& r) {
  char buf[160];
  std::ostringstream os;
  os << "real-time factor (" << r.machine << ", median of " << r.repeats
     << " repeats)\n";
  std::snprintf(buf, sizeof(buf), "  %-10s %10.4f s\n", "audio",
                r.audio_seconds);
  os << buf;
  std::snprintf(buf, sizeof(buf), "  %-10s %10.4f s\n", "melfront",
                r.melfront_s);
  os << buf;
  std::snprintf(buf, sizeof(buf), "  %-10s %10.4f s\n", "model", r.model_s);
  os << buf;
  std::snprintf(buf, sizeof(buf), "  %-10s %10.4f s\n", "vocoder",
                r.vocoder_s);
  os << buf;
  std::snprintf(buf, sizeof(buf), "  %-10s %10.4f s\n", "total", r.total_s);
  os << buf;
  std::snprintf(buf, sizeof(buf), "  %-10s %10.3f\n", "rtf", r.rtf);
  os << buf;
  return os.str();
}

}  // namespace fastvc
