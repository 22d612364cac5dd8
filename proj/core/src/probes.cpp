// core/src/probes.cpp

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

#include "fastvc/probes.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

#include "fastvc/autograd.hpp"
#include "fastvc/error.hpp"
#include "fastvc/nn.hpp"
#include "fastvc/rng.hpp"

namespace fastvc {

namespace {

constexpr uint64_t kProbeSplitTag = 0x9808E;

// Prediction = row of the largest logit, earliest row on ties.
int Argmax(const Eigen::VectorXd& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return best;
}

CodeDataset Gather(const CodeDataset& all, const std::vector<int>& idx) {
  CodeDataset out;
  out.codes.resize(all.codes.rows(), static_cast<Eigen::Index>(idx.size()));
  out.labels.reserve(idx.size());
  for (size_t j = 0; j < idx.size(); ++j) {
    out.codes.col(static_cast<Eigen::Index>(j)) = all.codes.col(idx[j]);
    out.labels.push_back(all.labels[idx[j]]);
  }
  return out;
}

// The shared perceptron: one hidden ReLU layer trained with plain full-batch
// gradient descent, early stopping on validation loss with the best-so-far
// weights restored.
struct PerceptronResult {
  std::vector<int> predictions;  // over the test set
  int iters_run = 0;
};

PerceptronResult TrainPerceptron(const CodeDataset& train,
                                 const CodeDataset& val,
                                 const CodeDataset& test, int n_classes,
                                 const ProbeConfig& cfg, uint64_t seed) {
  const int d = static_cast<int>(train.codes.rows());
  ParameterStore ps;
  Parameter& w1 = ps.Create("probe.w1", cfg.hidden, d);
  Parameter& b1 = ps.Create("probe.b1", cfg.hidden, 1);
  Parameter& w2 = ps.Create("probe.w2", n_classes, cfg.hidden);
  Parameter& b2 = ps.Create("probe.b2", n_classes, 1);
  InitUniformFanIn(w1, d, seed);
  InitUniformFanIn(b1, d, seed);
  InitUniformFanIn(w2, cfg.hidden, seed);
  InitUniformFanIn(b2, cfg.hidden, seed);
  Sgd opt({&w1, &b1, &w2, &b2}, cfg.lr);

  auto logits = [&](ag::Tape& t, const Eigen::MatrixXd& x) {
    ag::Var h = t.Relu(t.AddColVec(t.MatMul(t.Param(w1), t.Input(x)),
                                   t.Param(b1)));
    return t.AddColVec(t.MatMul(t.Param(w2), h), t.Param(b2));
  };
  auto val_loss = [&]() {
    ag::Tape t(false);
    ag::Var ce = t.SoftmaxCrossEntropy(logits(t, val.codes), val.labels);
    return t.ValueOf(ce)(0, 0);
  };

  double best = std::numeric_limits<double>::infinity();
  std::vector<Eigen::MatrixXd> snapshot{w1.value, b1.value, w2.value,
                                        b2.value};
  int since_best = 0;
  int iters = 0;
  for (; iters < cfg.max_iters; ++iters) {
    ag::Tape t(true);
    ag::Var ce = t.SoftmaxCrossEntropy(logits(t, train.codes), train.labels);
    opt.ZeroGrad();
    t.Backward(ce);
    opt.Step();

    const double v = val_loss();
    if (v < best) {
      best = v;
      snapshot = {w1.value, b1.value, w2.value, b2.value};
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  w1.value = snapshot[0];
  b1.value = snapshot[1];
  w2.value = snapshot[2];
  b2.value = snapshot[3];

  ag::Tape t(false);
  const Eigen::MatrixXd scores = t.ValueOf(logits(t, test.codes));
  PerceptronResult res;
  res.iters_run = iters;
  res.predictions.reserve(static_cast<size_t>(scores.cols()));
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    res.predictions.push_back(Argmax(scores.col(j)));
  }
  return res;
}

}  // namespace

std::vector<std::string> LabelCodes(int n_codes,
                                    const PhonemeAlignment& align, int hop,
                                    int k) {
  if (align.intervals.empty()) {
    throw ArgumentError("alignment has no intervals");
  }
  if (n_codes < 0 || hop <= 0 || k <= 0) {
    throw ArgumentError("n_codes, hop and k must be positive");
  }
  std::vector<std::string> labels;
  labels.reserve(static_cast<size_t>(n_codes));
  const long span = static_cast<long>(k) * hop;
  for (int i = 0; i < n_codes; ++i) {
    const long lo = i * span;
    const long hi = lo + span;
    long best_overlap = -1;
    const PhonemeInterval* best = nullptr;
    for (const auto& iv : align.intervals) {
      const long overlap =
          std::max(0L, std::min(hi, iv.end) - std::max(lo, iv.start));
      if (overlap > best_overlap) {
        best_overlap = overlap;
        best = &iv;
      }
    }
    labels.push_back(best->label);
  }
  return labels;
}

void SplitCodes(const CodeDataset& all, const ProbeConfig& cfg, uint64_t seed,
                CodeDataset* train, CodeDataset* val, CodeDataset* test) {
  cfg.Validate();
  const int n = all.size();
  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  Rng rng = Rng::Derive(seed, {kProbeSplitTag});
  rng.Shuffle(order);

  const int n_train = static_cast<int>(std::floor(cfg.train_frac * n + 0.5));
  const int n_val = static_cast<int>(std::floor(cfg.val_frac * n + 0.5));
  if (n_train <= 0 || n_val <= 0 || n_train + n_val >= n) {
    throw ConfigError("split fractions leave an empty partition for n = " +
                      std::to_string(n));
  }
  auto part = [&](int lo, int hi) {
    return std::vector<int>(order.begin() + lo, order.begin() + hi);
  };
  *train = Gather(all, part(0, n_train));
  *val = Gather(all, part(n_train, n_train + n_val));
  *test = Gather(all, part(n_train + n_val, n));
}

ProbeReport TrainPhonemeProbe(const CodeDataset& train,
                              const CodeDataset& val,
                              const CodeDataset& test,
                              const ProbeConfig& cfg,
                              const std::vector<std::string>& classes,
                              uint64_t seed) {
  cfg.Validate();
  if (train.size() == 0 || val.size() == 0 || test.size() == 0) {
    throw ConfigError("probe needs nonempty train, val and test splits");
  }
  const int n_classes = static_cast<int>(classes.size());
  for (const auto* set : {&train, &val, &test}) {
    for (int l : set->labels) {
      if (l < 0 || l >= n_classes) {
        throw ArgumentError("label " + std::to_string(l) +
                            " outside the inventory of " +
                            std::to_string(n_classes));
      }
    }
  }

  PerceptronResult res =
      TrainPerceptron(train, val, test, n_classes, cfg, seed);

  ProbeReport report;
  report.n_classes = n_classes;
  report.classes = classes;
  report.n_train = train.size();
  report.n_val = val.size();
  report.n_test = test.size();
  report.iters_run = res.iters_run;
  report.baseline_random = 1.0 / n_classes;

  std::vector<int> train_counts(static_cast<size_t>(n_classes), 0);
  for (int l : train.labels) ++train_counts[static_cast<size_t>(l)];
  report.majority_class = static_cast<int>(
      std::max_element(train_counts.begin(), train_counts.end()) -
      train_counts.begin());

  report.confusion = Eigen::MatrixXi::Zero(n_classes, n_classes);
  int correct = 0;
  int prior_correct = 0;
  for (int j = 0; j < test.size(); ++j) {
    const int truth = test.labels[static_cast<size_t>(j)];
    const int pred = res.predictions[static_cast<size_t>(j)];
    report.confusion(truth, pred) += 1;
    if (pred == truth) ++correct;
    if (truth == report.majority_class) ++prior_correct;
  }
  report.accuracy = static_cast<double>(correct) / test.size();
  report.baseline_prior = static_cast<double>(prior_correct) / test.size();
  return report;
}

SpeakerReport SpeakerIndependenceReport(
    const std::vector<UtteranceCodes>& utterances, int n_speakers,
    const ProbeConfig& cfg, uint64_t seed) {
  cfg.Validate();
  if (n_speakers < 2) {
    throw ConfigError("speaker report needs at least 2 speakers");
  }
  std::vector<std::vector<int>> by_speaker(
      static_cast<size_t>(n_speakers));
  for (size_t i = 0; i < utterances.size(); ++i) {
    const int s = utterances[i].speaker;
    if (s < 0 || s >= n_speakers) {
      throw ArgumentError("speaker index " + std::to_string(s) +
                          " outside [0, " + std::to_string(n_speakers) + ")");
    }
    by_speaker[static_cast<size_t>(s)].push_back(static_cast<int>(i));
  }
  int speakers_with_codes = 0;
  for (const auto& v : by_speaker) speakers_with_codes += !v.empty();
  if (speakers_with_codes < 2) {
    throw ConfigError("codes cover fewer than 2 speakers");
  }

  // Hold out roughly a quarter of each speaker's utterances, at least one,
  // so no utterance contributes to both sides.
  Rng rng = Rng::Derive(seed, {kProbeSplitTag, 1});
  std::vector<int> train_utts, test_utts;
  for (auto& utts : by_speaker) {
    if (utts.empty()) continue;
    if (utts.size() < 2) {
      throw ConfigError("each speaker needs at least 2 utterances to hold "
                        "one out");
    }
    rng.Shuffle(utts);
    const size_t n_test = std::max<size_t>(1, utts.size() / 4);
    for (size_t i = 0; i < utts.size(); ++i) {
      (i < n_test ? test_utts : train_utts).push_back(utts[i]);
    }
  }

  auto flatten = [&](const std::vector<int>& idx) {
    long total = 0;
    for (int i : idx) total += utterances[static_cast<size_t>(i)].codes.cols();
    CodeDataset out;
    out.codes.resize(utterances[0].codes.rows(), total);
    out.labels.reserve(static_cast<size_t>(total));
    long at = 0;
    for (int i : idx) {
      const auto& u = utterances[static_cast<size_t>(i)];
      out.codes.middleCols(at, u.codes.cols()) = u.codes;
      for (Eigen::Index c = 0; c < u.codes.cols(); ++c) {
        out.labels.push_back(u.speaker);
      }
      at += u.codes.cols();
    }
    return out;
  };
  const CodeDataset train = flatten(train_utts);
  const CodeDataset test = flatten(test_utts);
  // Early stopping validates on the held-out codes; the fit quality is what
  // is being measured, not an unbiased model, so reuse is acceptable here.
  PerceptronResult res =
      TrainPerceptron(train, test, test, n_speakers, cfg, seed);

  SpeakerReport report;
  report.n_speakers = n_speakers;
  report.n_train = train.size();
  report.n_test = test.size();
  report.n_utterances = static_cast<int>(utterances.size());
  report.chance = 1.0 / n_speakers;
  int correct = 0;
  for (int j = 0; j < test.size(); ++j) {
    correct += res.predictions[static_cast<size_t>(j)] ==
               test.labels[static_cast<size_t>(j)];
  }
  report.accuracy = static_cast<double>(correct) / test.size();
  report.gap = report.accuracy - report.chance;
  return report;
}

std::string ProbeReportJson(const ProbeReport& r,
                            const std::string& run_config_json) {
  nlohmann::json j;
  j["kind"] = "phoneme_probe";
  j["accuracy"] = r.accuracy;
  j["baseline_random"] = r.baseline_random;
  j["baseline_prior"] = r.baseline_prior;
  j["n_classes"] = r.n_classes;
  j["majority_class"] =
      r.classes.empty() ? "" : r.classes[static_cast<size_t>(
                                   r.majority_class)];
  j["n_train"] = r.n_train;
  j["n_val"] = r.n_val;
  j["n_test"] = r.n_test;
  j["iters_run"] = r.iters_run;
  j["classes"] = r.classes;
  std::vector<std::vector<int>> conf;
  for (int i = 0; i < r.confusion.rows(); ++i) {
    std::vector<int> row;
    for (int k = 0; k < r.confusion.cols(); ++k) {
      row.push_back(r.confusion(i, k));
    }
    conf.push_back(std::move(row));
  }
  j["confusion"] = conf;
  j["run_config"] = nlohmann::json::parse(run_config_json);
  return j.dump(2);
}

std::string ProbeReportText(const ProbeReport& r) {
  char buf[256];
  std::ostringstream os;
  os << "phoneme probe\n";
  std::snprintf(buf, sizeof(buf), "  %-18s %8.4f\n", "accuracy", r.accuracy);
  os << buf;
  std::snprintf(buf, sizeof(buf), "  %-18s %8.4f\n", "baseline_random",
                r.baseline_random);
  os << buf;
  std::snprintf(buf, sizeof(buf), "  %-18s %8.4f\n", "baseline_prior",
                r.baseline_prior);
  os << buf;
  std::snprintf(buf, sizeof(buf), "  %-18s %8d\n", "n_classes", r.n_classes);
  os << buf;
  std::snprintf(buf, sizeof(buf), "  %-18s %4d/%d/%d\n", "train/val/test",
                r.n_train, r.n_val, r.n_test);
  os << buf;
  std::snprintf(buf, sizeof(buf), "  %-18s %8d\n", "iters_run", r.iters_run);
  os << buf;
  return os.str();
}

std::string SpeakerReportJson(const SpeakerReport& r,
                              const std::string& run_config_json) {
  nlohmann::json j;
  j["kind"] = "speaker_independence";
  j["accuracy"] = r.accuracy;
  j["chance"] = r.chance;
  j["gap"] = r.gap;
  j["n_speakers"] = r.n_speakers;
  j["n_train"] = r.n_train;
  j["n_test"] = r.n_test;
  j["n_utterances"] = r.n_utterances;
  j["run_config"] = nlohmann::json::parse(run_config_json);
  return j.dump(2);
}

std::string SpeakerReportText(const SpeakerReport& r) {
  char buf[256];
  std::ostringstream os;
  os << "speaker independence\n";
  std::snprintf(buf, sizeof(buf), "  %-18s %8.4f\n", "accuracy", r.accuracy);
  os << buf;
  std::snprintf(buf, sizeof(buf), "  %-18s %8.4f\n", "chance", r.chance);
  os << buf;
  std::snprintf(buf, sizeof(buf), "  %-18s %+8.4f\n", "gap", r.gap);
  os << buf;
  std::snprintf(buf, sizeof(buf), "  %-18s %8d\n", "n_speakers",
                r.n_speakers);
  os << buf;
  std::snprintf(buf, sizeof(buf), "  %-18s %4d/%d\n", "train/test codes",
                r.n_train, r.n_test);
  os << buf;
  return os.str();
}

}  // namespace fastvc
