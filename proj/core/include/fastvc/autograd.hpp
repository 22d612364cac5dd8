// core/include/fastvc/autograd.hpp

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

#ifndef FASTVC_AUTOGRAD_HPP_
#define FASTVC_AUTOGRAD_HPP_

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

namespace fastvc {

struct Parameter;  // nn.hpp

namespace ag {

using Matrix = Eigen::MatrixXd;

class Tape;

// Lightweight handle to a node on a tape. Matrices are channels x time
// (rows x cols) throughout.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  bool defined() const { return tape != nullptr; }
  const Matrix& val() const;
  int rows() const { return static_cast<int>(val().rows()); }
  int cols() const { return static_cast<int>(val().cols()); }
  double scalar() const;
};

// Reverse-mode tape. One tape per forward pass; Backward() sweeps the node
// list in reverse creation order (creation order is a topological order by
// construction). Gradients of trainable parameters accumulate into
// Parameter::grad; gradients of grad-tracked inputs stay on the tape.
class Tape {
 public:
  // track_gradients=false builds values only (no backward closures); used
  // for inference so conversions stay cheap.
  explicit Tape(bool track_gradients = true) : track_(track_gradients) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // ---- leaves ----
  Var Input(Matrix v, bool requires_grad = false);
  Var Param(Parameter& p);
  Var Constant(double v);

  // ---- arithmetic ----
  Var Add(Var a, Var b);
  Var Sub(Var a, Var b);
  Var Mul(Var a, Var b);  // elementwise
  Var Scale(Var a, double s);
  Var AddScalar(Var a, double s);
  Var MatMul(Var a, Var b);

  // ---- elementwise nonlinearities ----
  Var Square(Var a);
  Var SqrtShift(Var a, double delta);  // sqrt(a + delta)
  Var Reciprocal(Var a);
  Var Abs(Var a);
  Var Relu(Var a);
  Var LeakyRelu(Var a, double slope);
  Var Tanh(Var a);
  Var Sigmoid(Var a);
  Var LogFloor(Var a, double eps);  // log(max(a, eps))

  // ---- shape / gather ----
  Var Block(Var a, int r0, int nr, int c0, int nc);
  Var VCat(const std::vector<Var>& parts);
  Var HCat(const std::vector<Var>& parts);
  Var GatherCols(Var a, std::vector<int> idx);  // out col j = in col idx[j]
  Var BroadcastCol(Var v, int n_cols);          // R x 1 -> R x n_cols

  // ---- reductions / row broadcasts ----
  Var Sum(Var a);      // 1 x 1
  Var Mean(Var a);     // 1 x 1
  Var SumCols(Var a);  // R x 1 (sum over time)
  Var MulColVec(Var a, Var v);  // row i scaled by v(i)
  Var AddColVec(Var a, Var v);  // row i shifted by v(i)

  // ---- convolution kernels ----
  // x: Cin x T, w: Cout x (Cin*K). Zero padding.
  Var Conv1d(Var x, Var w, int k, int stride, int dilation, int pad_left,
             int pad_right);
  // x: Cin x T, w: Cin x (Cout*K). Output length (T-1)*stride - 2*pad + K.
  Var ConvTranspose1d(Var x, Var w, int k, int stride, int pad);
  // Zero-padded mean over windows of k, padding counted in the mean.
  Var AvgPool1d(Var x, int k, int stride, int pad);

  // logits: C x N, labels: N entries in [0, C). Mean cross-entropy.
  Var SoftmaxCrossEntropy(Var logits, std::vector<int> labels);

  // ---- engine ----
  void Backward(Var root);
  const Matrix& ValueOf(Var v) const;
  // Gradient of the last Backward() root w.r.t. a grad-tracked node.
  const Matrix& GradOf(Var v) const;
  size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    const Matrix* external = nullptr;  // set for parameter leaves
    Matrix grad;
    bool requires_grad = false;
    Parameter* param = nullptr;
    std::function<void(Tape&)> backfn;

    const Matrix& val() const { return external != nullptr ? *external : value; }
  };

  int Emit(Matrix value, bool requires_grad);
  Node& At(int id) { return nodes_[static_cast<size_t>(id)]; }
  const Node& At(int id) const { return nodes_[static_cast<size_t>(id)]; }
  void CheckSame(Var a, Var b, const char* op) const;
  void CheckMine(Var a, const char* op) const;
  Matrix& GradBuf(int id);  // lazily zero-initialized

  bool track_ = true;
  std::vector<Node> nodes_;

  friend struct Var;
};

// Convenience sugar used heavily by the model code.
inline Var operator+(Var a, Var b) { return a.tape->Add(a, b); }
inline Var operator-(Var a, Var b) { return a.tape->Sub(a, b); }
inline Var operator*(Var a, Var b) { return a.tape->Mul(a, b); }

}  // namespace ag
}  // namespace fastvc

#endif  // FASTVC_AUTOGRAD_HPP_
