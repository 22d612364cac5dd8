// core/src/nn.cpp

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

#include "fastvc/nn.hpp"

#include <cmath>

#include "fastvc/error.hpp"
#include "fastvc/rng.hpp"

namespace fastvc {

// ---------------------------------------------------------------------------
// ParameterStore
// ---------------------------------------------------------------------------

Parameter& ParameterStore::Create(const std::string& name, int rows,
                                  int cols) {
  if (name.empty()) throw ArgumentError("parameter name must not be empty");
  if (rows < 1 || cols < 1) {
    throw ArgumentError("parameter " + name + ": non-positive shape");
  }
  if (index_.count(name) != 0) {
    throw StateError("parameter " + name + " already exists");
  }
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->value = ag::Matrix::Zero(rows, cols);
  index_[name] = items_.size();
  items_.push_back(std::move(p));
  return *items_.back();
}

Parameter& ParameterStore::Get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw LookupError("no parameter named " + name);
  return *items_[it->second];
}

const Parameter& ParameterStore::Get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw LookupError("no parameter named " + name);
  return *items_[it->second];
}

Parameter* ParameterStore::Find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : items_[it->second].get();
}

bool ParameterStore::Has(const std::string& name) const {
  return index_.count(name) != 0;
}

int64_t ParameterStore::TotalValues() const {
  int64_t n = 0;
  for (const auto& p : items_) n += p->value.size();
  return n;
}

void ParameterStore::ZeroGrad() {
  for (auto& p : items_) {
    if (p->grad.size() != 0) p->grad.setZero();
  }
}

void ParameterStore::SetTrainable(const std::string& prefix, bool trainable) {
  for (auto& p : items_) {
    if (p->name.rfind(prefix, 0) == 0) p->trainable = trainable;
  }
}

std::vector<Parameter*> ParameterStore::Trainable() {
  std::vector<Parameter*> out;
  for (auto& p : items_) {
    if (p->trainable) out.push_back(p.get());
  }
  return out;
}

std::vector<Parameter*> ParameterStore::WithPrefix(const std::string& prefix) {
  std::vector<Parameter*> out;
  for (auto& p : items_) {
    if (p->name.rfind(prefix, 0) == 0) out.push_back(p.get());
  }
  return out;
}

void InitUniformFanIn(Parameter& p, int fan_in, uint64_t seed) {
  if (fan_in < 1) throw ArgumentError("InitUniformFanIn: fan_in must be >= 1");
  double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Rng rng = Rng::Derive(seed, {0xA11Cull, HashName(p.name)});
  for (long i = 0; i < p.value.rows(); ++i) {
    for (long j = 0; j < p.value.cols(); ++j) {
      p.value(i, j) = (2.0 * rng.Uniform() - 1.0) * bound;
    }
  }
}

namespace {

// Splits an initialized weight into weight-norm direction and gain so the
// effective weight at creation equals the plain init.
void SplitWeightNorm(Parameter& v, Parameter& g) {
  for (long i = 0; i < v.value.rows(); ++i) {
    g.value(i, 0) = v.value.row(i).norm();
  }
}

// Effective weight rows are g_i * v_i / |v_i|; delta keeps the norm
// differentiable if a direction row underflows to zero.
ag::Var WeightNormed(ag::Tape& t, Parameter& v, Parameter& g) {
  ag::Var vv = t.Param(v);
  ag::Var gv = t.Param(g);
  ag::Var norm = t.SqrtShift(t.SumCols(t.Square(vv)), 1e-12);
  return t.MulColVec(vv, t.Mul(gv, t.Reciprocal(norm)));
}

}  // namespace

// ---------------------------------------------------------------------------
// Conv1dLayer
// ---------------------------------------------------------------------------

Conv1dLayer::Conv1dLayer(ParameterStore& ps, const std::string& name,
                         uint64_t seed, int cin, int cout, int k, int stride,
                         int dilation, int pad_left, int pad_right,
                         bool weight_norm)
    : cin_(cin),
      cout_(cout),
      k_(k),
      stride_(stride),
      dilation_(dilation),
      pad_left_(pad_left),
      pad_right_(pad_right),
      weight_norm_(weight_norm) {
  if (cin < 1 || cout < 1 || k < 1 || stride < 1 || dilation < 1) {
    throw ArgumentError("Conv1dLayer " + name + ": bad geometry");
  }
  // Default padding keeps the frame count for stride 1 (odd kernels).
  int span = (k - 1) * dilation;
  if (pad_left_ < 0) pad_left_ = span / 2;
  if (pad_right_ < 0) pad_right_ = span - span / 2;
  w_ = &ps.Create(name + ".weight", cout, cin * k);
  InitUniformFanIn(*w_, cin * k, seed);
  b_ = &ps.Create(name + ".bias", cout, 1);
  InitUniformFanIn(*b_, cin * k, seed);
  if (weight_norm_) {
    g_ = &ps.Create(name + ".gain", cout, 1);
    SplitWeightNorm(*w_, *g_);
  }
}

ag::Var Conv1dLayer::Weight(ag::Tape& t) const {
  if (weight_norm_) return WeightNormed(t, *w_, *g_);
  return t.Param(*w_);
}

ag::Var Conv1dLayer::Apply(ag::Tape& t, ag::Var x) const {
  if (x.rows() != cin_) {
    throw ShapeError(w_->name + ": input has " + std::to_string(x.rows()) +
                     " channels, layer expects " + std::to_string(cin_));
  }
  ag::Var y = t.Conv1d(x, Weight(t), k_, stride_, dilation_, pad_left_,
                       pad_right_);
  return t.AddColVec(y, t.Param(*b_));
}

long Conv1dLayer::OutLen(long t_in) const {
  long span = static_cast<long>(k_ - 1) * dilation_ + 1;
  return (t_in + pad_left_ + pad_right_ - span) / stride_ + 1;
}

// ---------------------------------------------------------------------------
// ConvTranspose1dLayer
// ---------------------------------------------------------------------------

ConvTranspose1dLayer::ConvTranspose1dLayer(ParameterStore& ps,
                                           const std::string& name,
                                           uint64_t seed, int cin, int cout,
                                           int k, int stride, int pad,
                                           bool weight_norm)
    : cin_(cin),
      cout_(cout),
      k_(k),
      stride_(stride),
      pad_(pad),
      weight_norm_(weight_norm) {
  if (cin < 1 || cout < 1 || k < 1 || stride < 1 || pad < 0) {
    throw ArgumentError("ConvTranspose1dLayer " + name + ": bad geometry");
  }
  w_ = &ps.Create(name + ".weight", cin, cout * k);
  InitUniformFanIn(*w_, cin * k, seed);
  b_ = &ps.Create(name + ".bias", cout, 1);
  InitUniformFanIn(*b_, cin * k, seed);
  if (weight_norm_) {
    g_ = &ps.Create(name + ".gain", cin, 1);
    SplitWeightNorm(*w_, *g_);
  }
}

ag::Var ConvTranspose1dLayer::Weight(ag::Tape& t) const {
  if (weight_norm_) return WeightNormed(t, *w_, *g_);
  return t.Param(*w_);
}

ag::Var ConvTranspose1dLayer::Apply(ag::Tape& t, ag::Var x) const {
  if (x.rows() != cin_) {
    throw ShapeError(w_->name + ": input has " + std::to_string(x.rows()) +
                     " channels, layer expects " + std::to_string(cin_));
  }
  ag::Var y = t.ConvTranspose1d(x, Weight(t), k_, stride_, pad_);
  return t.AddColVec(y, t.Param(*b_));
}

long ConvTranspose1dLayer::OutLen(long t_in) const {
  return (t_in - 1) * stride_ - 2L * pad_ + k_;
}

// ---------------------------------------------------------------------------
// ChannelNorm
// ---------------------------------------------------------------------------

ChannelNorm::ChannelNorm(ParameterStore& ps, const std::string& name,
                         int channels, double eps)
    : channels_(channels), eps_(eps) {
  if (channels < 1) throw ArgumentError("ChannelNorm " + name + ": channels");
  gain_ = &ps.Create(name + ".gain", channels, 1);
  gain_->value.setOnes();
  bias_ = &ps.Create(name + ".bias", channels, 1);
}

ag::Var ChannelNorm::Apply(ag::Tape& t, ag::Var x) const {
  if (x.rows() != channels_) {
    throw ShapeError(gain_->name + ": input has " + std::to_string(x.rows()) +
                     " channels, norm expects " + std::to_string(channels_));
  }
  double inv_t = 1.0 / static_cast<double>(x.cols());
  ag::Var mean = t.Scale(t.SumCols(x), inv_t);
  ag::Var centered = t.AddColVec(x, t.Scale(mean, -1.0));
  ag::Var var = t.Scale(t.SumCols(t.Square(centered)), inv_t);
  ag::Var istd = t.Reciprocal(t.SqrtShift(var, eps_));
  ag::Var y = t.MulColVec(centered, istd);
  return t.AddColVec(t.MulColVec(y, t.Param(*gain_)), t.Param(*bias_));
}

// ---------------------------------------------------------------------------
// LinearLayer
// ---------------------------------------------------------------------------

LinearLayer::LinearLayer(ParameterStore& ps, const std::string& name,
                         uint64_t seed, int in, int out)
    : in_(in), out_(out) {
  if (in < 1 || out < 1) throw ArgumentError("LinearLayer " + name);
  w_ = &ps.Create(name + ".weight", out, in);
  InitUniformFanIn(*w_, in, seed);
  b_ = &ps.Create(name + ".bias", out, 1);
  InitUniformFanIn(*b_, in, seed);
}

ag::Var LinearLayer::Apply(ag::Tape& t, ag::Var x) const {
  if (x.rows() != in_) {
    throw ShapeError(w_->name + ": input has " + std::to_string(x.rows()) +
                     " rows, layer expects " + std::to_string(in_));
  }
  return t.AddColVec(t.MatMul(t.Param(*w_), x), t.Param(*b_));
}

// ---------------------------------------------------------------------------
// LstmLayer
// ---------------------------------------------------------------------------

LstmLayer::LstmLayer(ParameterStore& ps, const std::string& name,
                     uint64_t seed, int cin, int hidden)
    : cin_(cin), hidden_(hidden) {
  if (cin < 1 || hidden < 1) throw ArgumentError("LstmLayer " + name);
  wx_ = &ps.Create(name + ".wx", 4 * hidden, cin);
  InitUniformFanIn(*wx_, hidden, seed);
  wh_ = &ps.Create(name + ".wh", 4 * hidden, hidden);
  InitUniformFanIn(*wh_, hidden, seed);
  b_ = &ps.Create(name + ".bias", 4 * hidden, 1);
  InitUniformFanIn(*b_, hidden, seed);
}

ag::Var LstmLayer::Apply(ag::Tape& t, ag::Var x, bool reverse) const {
  if (x.rows() != cin_) {
    throw ShapeError(wx_->name + ": input has " + std::to_string(x.rows()) +
                     " channels, layer expects " + std::to_string(cin_));
  }
  int len = x.cols();
  int h = hidden_;
  // Input projections for all steps at once; the recurrence is per step.
  ag::Var zx = t.AddColVec(t.MatMul(t.Param(*wx_), x), t.Param(*b_));
  ag::Var wh = t.Param(*wh_);
  ag::Var hs = t.Input(ag::Matrix::Zero(h, 1));
  ag::Var cs = t.Input(ag::Matrix::Zero(h, 1));
  std::vector<ag::Var> outs(static_cast<size_t>(len));
  for (int step = 0; step < len; ++step) {
    int col = reverse ? len - 1 - step : step;
    ag::Var z = t.Add(t.Block(zx, 0, 4 * h, col, 1), t.MatMul(wh, hs));
    ag::Var gi = t.Sigmoid(t.Block(z, 0, h, 0, 1));
    ag::Var gf = t.Sigmoid(t.Block(z, h, h, 0, 1));
    ag::Var gg = t.Tanh(t.Block(z, 2 * h, h, 0, 1));
    ag::Var go = t.Sigmoid(t.Block(z, 3 * h, h, 0, 1));
    cs = t.Add(t.Mul(gf, cs), t.Mul(gi, gg));
    hs = t.Mul(go, t.Tanh(cs));
    outs[static_cast<size_t>(col)] = hs;
  }
  return t.HCat(outs);
}

// ---------------------------------------------------------------------------
// BiLstmLayer
// ---------------------------------------------------------------------------

BiLstmLayer::BiLstmLayer(ParameterStore& ps, const std::string& name,
                         uint64_t seed, int cin, int hidden_per_dir)
    : fwd_(ps, name + ".fwd", seed, cin, hidden_per_dir),
      bwd_(ps, name + ".bwd", seed, cin, hidden_per_dir) {}

ag::Var BiLstmLayer::Apply(ag::Tape& t, ag::Var x) const {
  return t.VCat({fwd_.Apply(t, x, false), bwd_.Apply(t, x, true)});
}

// ---------------------------------------------------------------------------
// Optimizers
// ---------------------------------------------------------------------------

Adam::Adam(std::vector<Parameter*> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {}

void Adam::Step() {
  ++t_;
  double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (Parameter* p : params_) {
    if (p->adam_m.size() == 0) {
      p->adam_m = ag::Matrix::Zero(p->value.rows(), p->value.cols());
      p->adam_v = ag::Matrix::Zero(p->value.rows(), p->value.cols());
    }
    ag::Matrix g = p->grad.size() == 0
                       ? ag::Matrix::Zero(p->value.rows(), p->value.cols())
                       : p->grad;
    p->adam_m = cfg_.beta1 * p->adam_m + (1.0 - cfg_.beta1) * g;
    p->adam_v =
        cfg_.beta2 * p->adam_v.array() + (1.0 - cfg_.beta2) * g.array().square();
    ag::Matrix mhat = p->adam_m / bc1;
    ag::Matrix vhat = p->adam_v / bc2;
    p->value.array() -=
        cfg_.lr * mhat.array() / (vhat.array().sqrt() + cfg_.eps);
  }
}

void Adam::ZeroGrad() {
  for (Parameter* p : params_) {
    p->grad = ag::Matrix::Zero(p->value.rows(), p->value.cols());
  }
}

Sgd::Sgd(std::vector<Parameter*> params, double lr)
    : params_(std::move(params)), lr_(lr) {}

void Sgd::Step() {
  for (Parameter* p : params_) {
    if (p->grad.size() == 0) continue;
    p->value -= lr_ * p->grad;
  }
}

void Sgd::ZeroGrad() {
  for (Parameter* p : params_) {
    p->grad = ag::Matrix::Zero(p->value.rows(), p->value.cols());
  }
}

}  // namespace fastvc
