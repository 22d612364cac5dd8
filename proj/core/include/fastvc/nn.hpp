// core/include/fastvc/nn.hpp

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

#ifndef FASTVC_NN_HPP_
#define FASTVC_NN_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "fastvc/autograd.hpp"

namespace fastvc {

// One named tensor. grad/adam_m/adam_v are sized lazily; an empty matrix
// means "all zeros". Addresses are stable for the life of the owning store.
struct Parameter {
  std::string name;
  ag::Matrix value;
  ag::Matrix grad;
  ag::Matrix adam_m;
  ag::Matrix adam_v;
  bool trainable = true;
};

// Owns parameters in creation order. Creation order is the serialization
// order, so it must be deterministic (layers are always built in a fixed
// sequence from configs).
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;

  Parameter& Create(const std::string& name, int rows, int cols);
  Parameter& Get(const std::string& name);
  const Parameter& Get(const std::string& name) const;
  Parameter* Find(const std::string& name);
  bool Has(const std::string& name) const;

  const std::vector<std::unique_ptr<Parameter>>& items() const {
    return items_;
  }
  size_t size() const { return items_.size(); }
  int64_t TotalValues() const;

  void ZeroGrad();
  // Toggles trainability for every parameter whose name starts with prefix.
  void SetTrainable(const std::string& prefix, bool trainable);
  std::vector<Parameter*> Trainable();
  std::vector<Parameter*> WithPrefix(const std::string& prefix);

 private:
  std::vector<std::unique_ptr<Parameter>> items_;
  std::unordered_map<std::string, size_t> index_;
};

// Fills p.value with U(-1/sqrt(fan_in), 1/sqrt(fan_in)). The stream is
// derived from (seed, hash(p.name)) so results do not depend on creation
// order.
void InitUniformFanIn(Parameter& p, int fan_in, uint64_t seed);

// ---------------------------------------------------------------------------
// Layers. Each layer registers its parameters in a ParameterStore under
// "<name>.<suffix>" and keeps raw pointers; the store must outlive the layer.
// All Apply() methods build nodes on the given tape.
// ---------------------------------------------------------------------------

class Conv1dLayer {
 public:
  // weight: Cout x (Cin*K). With weight_norm, the stored parameters are the
  // direction "v" (same shape) and per-row gain "g"; the effective weight is
  // g_i * v_i / |v_i| and matches the plain uniform init at creation time.
  Conv1dLayer(ParameterStore& ps, const std::string& name, uint64_t seed,
              int cin, int cout, int k, int stride = 1, int dilation = 1,
              int pad_left = -1, int pad_right = -1, bool weight_norm = false);

  ag::Var Apply(ag::Tape& t, ag::Var x) const;
  ag::Var Weight(ag::Tape& t) const;  // effective Cout x (Cin*K)

  int out_channels() const { return cout_; }
  // Output length for an input of t_in frames.
  long OutLen(long t_in) const;
  // Timestep extent the kernel reaches around one output sample.
  int left_reach() const { return pad_left_; }

 private:
  int cin_, cout_, k_, stride_, dilation_, pad_left_, pad_right_;
  bool weight_norm_;
  Parameter* w_ = nullptr;  // plain weight, or direction v under weight norm
  Parameter* g_ = nullptr;  // weight-norm gains
  Parameter* b_ = nullptr;
};

class ConvTranspose1dLayer {
 public:
  // weight: Cin x (Cout*K); gains are per input channel (row of the stored
  // weight), which mirrors how the reference GAN vocoder normalizes its
  // upsampling stages.
  ConvTranspose1dLayer(ParameterStore& ps, const std::string& name,
                       uint64_t seed, int cin, int cout, int k, int stride,
                       int pad, bool weight_norm = false);

  ag::Var Apply(ag::Tape& t, ag::Var x) const;
  ag::Var Weight(ag::Tape& t) const;

  long OutLen(long t_in) const;
  int out_channels() const { return cout_; }

 private:
  int cin_, cout_, k_, stride_, pad_;
  bool weight_norm_;
  Parameter* w_ = nullptr;
  Parameter* g_ = nullptr;
  Parameter* b_ = nullptr;
};

// Per-channel standardization over the time axis with learnable gain and
// bias. Statistics come from the current input only, so inference is
// batch-independent and deterministic.
class ChannelNorm {
 public:
  ChannelNorm(ParameterStore& ps, const std::string& name, int channels,
              double eps = 1e-5);

  ag::Var Apply(ag::Tape& t, ag::Var x) const;

 private:
  int channels_;
  double eps_;
  Parameter* gain_ = nullptr;
  Parameter* bias_ = nullptr;
};

class LinearLayer {
 public:
  LinearLayer(ParameterStore& ps, const std::string& name, uint64_t seed,
              int in, int out);

  ag::Var Apply(ag::Tape& t, ag::Var x) const;

 private:
  int in_, out_;
  Parameter* w_ = nullptr;
  Parameter* b_ = nullptr;
};

// Single-direction LSTM unrolled on the tape. Gate order i, f, g, o.
// Input Cin x T, output H x T (hidden state sequence).
class LstmLayer {
 public:
  LstmLayer(ParameterStore& ps, const std::string& name, uint64_t seed,
            int cin, int hidden);

  ag::Var Apply(ag::Tape& t, ag::Var x, bool reverse = false) const;

  int hidden() const { return hidden_; }

 private:
  int cin_, hidden_;
  Parameter* wx_ = nullptr;  // 4H x Cin
  Parameter* wh_ = nullptr;  // 4H x H
  Parameter* b_ = nullptr;   // 4H x 1
};

// Forward and backward LSTM over the same input, outputs stacked to 2H x T.
class BiLstmLayer {
 public:
  BiLstmLayer(ParameterStore& ps, const std::string& name, uint64_t seed,
              int cin, int hidden_per_dir);

  ag::Var Apply(ag::Tape& t, ag::Var x) const;

 private:
  LstmLayer fwd_;
  LstmLayer bwd_;
};

// ---------------------------------------------------------------------------
// Optimizers
// ---------------------------------------------------------------------------

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamConfig cfg);

  void Step();
  void ZeroGrad();

  int64_t step_count() const { return t_; }
  void set_step_count(int64_t t) { t_ = t; }
  const std::vector<Parameter*>& params() const { return params_; }

 private:
  std::vector<Parameter*> params_;
  AdamConfig cfg_;
  int64_t t_ = 0;
};

class Sgd {
 public:
  Sgd(std::vector<Parameter*> params, double lr);

  void Step();
  void ZeroGrad();

 private:
  std::vector<Parameter*> params_;
  double lr_;
};

}  // namespace fastvc

#endif  // FASTVC_NN_HPP_
