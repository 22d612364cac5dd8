// core/src/autograd.cpp

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

#include "fastvc/autograd.hpp"

#include <cmath>

#include "fastvc/error.hpp"
#include "fastvc/nn.hpp"

namespace fastvc {
namespace ag {

const Matrix& Var::val() const {
  if (tape == nullptr) throw StateError("Var: using an undefined handle");
  return tape->ValueOf(*this);
}

double Var::scalar() const {
  const Matrix& m = val();
  if (m.size() != 1) {
    throw ShapeError("Var::scalar: node is " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + ", not 1x1");
  }
  return m(0, 0);
}

int Tape::Emit(Matrix value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

void Tape::CheckMine(Var a, const char* op) const {
  if (a.tape != this || a.id < 0 ||
      a.id >= static_cast<int>(nodes_.size())) {
    throw StateError(std::string(op) + ": operand does not live on this tape");
  }
}

void Tape::CheckSame(Var a, Var b, const char* op) const {
  CheckMine(a, op);
  CheckMine(b, op);
  if (At(a.id).val().rows() != At(b.id).val().rows() ||
      At(a.id).val().cols() != At(b.id).val().cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     std::to_string(At(a.id).val().rows()) + "x" +
                     std::to_string(At(a.id).val().cols()) + " vs " +
                     std::to_string(At(b.id).val().rows()) + "x" +
                     std::to_string(At(b.id).val().cols()));
  }
}

Matrix& Tape::GradBuf(int id) {
  Node& n = At(id);
  if (n.grad.size() == 0) {
    n.grad = Matrix::Zero(n.val().rows(), n.val().cols());
  }
  return n.grad;
}

const Matrix& Tape::ValueOf(Var v) const {
  CheckMine(v, "ValueOf");
  return At(v.id).val();
}

const Matrix& Tape::GradOf(Var v) const {
  CheckMine(v, "GradOf");
  const Node& n = At(v.id);
  if (n.grad.size() == 0) {
    throw StateError("GradOf: node has no gradient (not grad-tracked, or "
                     "Backward not run)");
  }
  return n.grad;
}

// ---------------------------------------------------------------------------
// Leaves
// ---------------------------------------------------------------------------

Var Tape::Input(Matrix v, bool requires_grad) {
  int id = Emit(std::move(v), track_ && requires_grad);
  return {this, id};
}

Var Tape::Param(Parameter& p) {
  Node n;
  n.external = &p.value;
  n.requires_grad = track_ && p.trainable;
  n.param = n.requires_grad ? &p : nullptr;
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::Constant(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return Input(std::move(m), false);
}

// ---------------------------------------------------------------------------
// Arithmetic
// ---------------------------------------------------------------------------

Var Tape::Add(Var a, Var b) {
  CheckSame(a, b, "Add");
  int id = Emit(At(a.id).val() + At(b.id).val(),
                At(a.id).requires_grad || At(b.id).requires_grad);
  if (At(id).requires_grad) {
    int ia = a.id, ib = b.id;
    At(id).backfn = [id, ia, ib](Tape& t) {
      const Matrix& g = t.At(id).grad;
      if (t.At(ia).requires_grad) t.GradBuf(ia) += g;
      if (t.At(ib).requires_grad) t.GradBuf(ib) += g;
    };
  }
  return {this, id};
}

Var Tape::Sub(Var a, Var b) {
  CheckSame(a, b, "Sub");
  int id = Emit(At(a.id).val() - At(b.id).val(),
                At(a.id).requires_grad || At(b.id).requires_grad);
  if (At(id).requires_grad) {
    int ia = a.id, ib = b.id;
    At(id).backfn = [id, ia, ib](Tape& t) {
      const Matrix& g = t.At(id).grad;
      if (t.At(ia).requires_grad) t.GradBuf(ia) += g;
      if (t.At(ib).requires_grad) t.GradBuf(ib) -= g;
    };
  }
  return {this, id};
}

Var Tape::Mul(Var a, Var b) {
  CheckSame(a, b, "Mul");
  int id = Emit(At(a.id).val().cwiseProduct(At(b.id).val()),
                At(a.id).requires_grad || At(b.id).requires_grad);
  if (At(id).requires_grad) {
    int ia = a.id, ib = b.id;
    At(id).backfn = [id, ia, ib](Tape& t) {
      const Matrix& g = t.At(id).grad;
      if (t.At(ia).requires_grad)
        t.GradBuf(ia) += g.cwiseProduct(t.At(ib).val());
      if (t.At(ib).requires_grad)
        t.GradBuf(ib) += g.cwiseProduct(t.At(ia).val());
    };
  }
  return {this, id};
}

Var Tape::Scale(Var a, double s) {
  CheckMine(a, "Scale");
  int id = Emit(At(a.id).val() * s, At(a.id).requires_grad);
  if (At(id).requires_grad) {
    int ia = a.id;
    At(id).backfn = [id, ia, s](Tape& t) {
      t.GradBuf(ia) += t.At(id).grad * s;
    };
  }
  return {this, id};
}

Var Tape::AddScalar(Var a, double s) {
  CheckMine(a, "AddScalar");
  int id = Emit(At(a.id).val().array() + s, At(a.id).requires_grad);
  if (At(id).requires_grad) {
    int ia = a.id;
    At(id).backfn = [id, ia](Tape& t) { t.GradBuf(ia) += t.At(id).grad; };
  }
  return {this, id};
}

Var Tape::MatMul(Var a, Var b) {
  CheckMine(a, "MatMul");
  CheckMine(b, "MatMul");
  if (At(a.id).val().cols() != At(b.id).val().rows()) {
    throw ShapeError("MatMul: inner dimensions disagree: " +
                     std::to_string(At(a.id).val().cols()) + " vs " +
                     std::to_string(At(b.id).val().rows()));
  }
  int id = Emit(At(a.id).val() * At(b.id).val(),
                At(a.id).requires_grad || At(b.id).requires_grad);
  if (At(id).requires_grad) {
    int ia = a.id, ib = b.id;
    At(id).backfn = [id, ia, ib](Tape& t) {
      const Matrix& g = t.At(id).grad;
      if (t.At(ia).requires_grad)
        t.GradBuf(ia) += g * t.At(ib).val().transpose();
      if (t.At(ib).requires_grad)
        t.GradBuf(ib) += t.At(ia).val().transpose() * g;
    };
  }
  return {this, id};
}

// ---------------------------------------------------------------------------
// Elementwise nonlinearities
// ---------------------------------------------------------------------------

Var Tape::Square(Var a) {
  CheckMine(a, "Square");
  int id = Emit(At(a.id).val().array().square(), At(a.id).requires_grad);
  if (At(id).requires_grad) {
    int ia = a.id;
    At(id).backfn = [id, ia](Tape& t) {
      t.GradBuf(ia).array() +=
          2.0 * t.At(id).grad.array() * t.At(ia).val().array();
    };
  }
  return {this, id};
}

Var Tape::SqrtShift(Var a, double delta) {
  CheckMine(a, "SqrtShift");
  Matrix v = (At(a.id).val().array() + delta).sqrt();
  int id = Emit(std::move(v), At(a.id).requires_grad);
  if (At(id).requires_grad) {
    int ia = a.id;
    At(id).backfn = [id, ia](Tape& t) {
      t.GradBuf(ia).array() +=
          t.At(id).grad.array() * 0.5 / t.At(id).val().array();
    };
  }
  return {this, id};
}

Var Tape::Reciprocal(Var a) {
  CheckMine(a, "Reciprocal");
  int id = Emit(At(a.id).val().array().inverse(), At(a.id).requires_grad);
  if (At(id).requires_grad) {
    int ia = a.id;
    At(id).backfn = [id, ia](Tape& t) {
      t.GradBuf(ia).array() -=
          t.At(id).grad.array() * t.At(id).val().array().square();
    };
  }
  return {this, id};
}

Var Tape::Abs(Var a) {
  CheckMine(a, "Abs");
  int id = Emit(At(a.id).val().array().abs(), At(a.id).requires_grad);
  if (At(id).requires_grad) {
    int ia = a.id;
    At(id).backfn = [id, ia](Tape& t) {
      t.GradBuf(ia).array() += t.At(id).grad.array() *
                               t.At(ia).val().array().sign();
    };
  }
  return {this, id};
}

Var Tape::Relu(Var a) {
  CheckMine(a, "Relu");
  int id = Emit(At(a.id).val().array().max(0.0), At(a.id).requires_grad);
  if (At(id).requires_grad) {
    int ia = a.id;
    At(id).backfn = [id, ia](Tape& t) {
      t.GradBuf(ia).array() +=
          t.At(id).grad.array() *
          (t.At(ia).val().array() > 0.0).cast<double>();
    };
  }
  return {this, id};
}

Var Tape::LeakyRelu(Var a, double slope) {
  CheckMine(a, "LeakyRelu");
  const auto& x = At(a.id).val().array();
  Matrix v = (x > 0.0).select(At(a.id).val(), At(a.id).val() * slope);
  int id = Emit(std::move(v), At(a.id).requires_grad);
  if (At(id).requires_grad) {
    int ia = a.id;
    At(id).backfn = [id, ia, slope](Tape& t) {
      const auto& x = t.At(ia).val().array();
      t.GradBuf(ia).array() +=
          t.At(id).grad.array() *
          ((x > 0.0).cast<double>() + (x <= 0.0).cast<double>() * slope);
    };
  }
  return {this, id};
}

Var Tape::Tanh(Var a) {
  CheckMine(a, "Tanh");
  int id = Emit(At(a.id).val().array().tanh(), At(a.id).requires_grad);
  if (At(id).requires_grad) {
    int ia = a.id;
    At(id).backfn = [id, ia](Tape& t) {
      t.GradBuf(ia).array() +=
          t.At(id).grad.array() * (1.0 - t.At(id).val().array().square());
    };
  }
  return {this, id};
}

Var Tape::Sigmoid(Var a) {
  CheckMine(a, "Sigmoid");
  Matrix v = (1.0 / (1.0 + (-At(a.id).val().array()).exp())).matrix();
  int id = Emit(std::move(v), At(a.id).requires_grad);
  if (At(id).requires_grad) {
    int ia = a.id;
    At(id).backfn = [id, ia](Tape& t) {
      const auto& y = t.At(id).val().array();
      t.GradBuf(ia).array() += t.At(id).grad.array() * y * (1.0 - y);
    };
  }
  return {this, id};
}

Var Tape::LogFloor(Var a, double eps) {
  CheckMine(a, "LogFloor");
  if (eps <= 0.0) throw ArgumentError("LogFloor: eps must be positive");
  Matrix v = At(a.id).val().array().max(eps).log();
  int id = Emit(std::move(v), At(a.id).requires_grad);
  if (At(id).requires_grad) {
    int ia = a.id;
    At(id).backfn = [id, ia, eps](Tape& t) {
      const auto& x = t.At(ia).val().array();
      t.GradBuf(ia).array() += t.At(id).grad.array() *
                               (x > eps).cast<double>() / x.max(eps);
    };
  }
  return {this, id};
}

// ---------------------------------------------------------------------------
// Shape / gather
// ---------------------------------------------------------------------------

Var Tape::Block(Var a, int r0, int nr, int c0, int nc) {
  CheckMine(a, "Block");
  const Matrix& m = At(a.id).val();
  if (r0 < 0 || c0 < 0 || nr < 0 || nc < 0 || r0 + nr > m.rows() ||
      c0 + nc > m.cols()) {
    throw ShapeError("Block: region out of bounds");
  }
  int id = Emit(m.block(r0, c0, nr, nc), At(a.id).requires_grad);
  if (At(id).requires_grad) {
    int ia = a.id;
    At(id).backfn = [id, ia, r0, c0, nr, nc](Tape& t) {
      t.GradBuf(ia).block(r0, c0, nr, nc) += t.At(id).grad;
    };
  }
  return {this, id};
}

Var Tape::VCat(const std::vector<Var>& parts) {
  if (parts.empty()) throw ArgumentError("VCat: no inputs");
  long cols = -1;
  long rows = 0;
  bool rg = false;
  for (Var p : parts) {
    CheckMine(p, "VCat");
    const Matrix& m = At(p.id).val();
    if (cols < 0) cols = m.cols();
    if (m.cols() != cols) throw ShapeError("VCat: column counts differ");
    rows += m.rows();
    rg = rg || At(p.id).requires_grad;
  }
  Matrix v(rows, cols);
  long r = 0;
  std::vector<int> ids;
  std::vector<long> offs;
  for (Var p : parts) {
    const Matrix& m = At(p.id).val();
    v.middleRows(r, m.rows()) = m;
    ids.push_back(p.id);
    offs.push_back(r);
    r += m.rows();
  }
  int id = Emit(std::move(v), rg);
  if (rg) {
    At(id).backfn = [id, ids, offs](Tape& t) {
      const Matrix& g = t.At(id).grad;
      for (size_t i = 0; i < ids.size(); ++i) {
        if (!t.At(ids[i]).requires_grad) continue;
        long nr = t.At(ids[i]).val().rows();
        t.GradBuf(ids[i]) += g.middleRows(offs[i], nr);
      }
    };
  }
  return {this, id};
}

Var Tape::HCat(const std::vector<Var>& parts) {
  if (parts.empty()) throw ArgumentError("HCat: no inputs");
  long rows = -1;
  long cols = 0;
  bool rg = false;
  for (Var p : parts) {
    CheckMine(p, "HCat");
    const Matrix& m = At(p.id).val();
    if (rows < 0) rows = m.rows();
    if (m.rows() != rows) throw ShapeError("HCat: row counts differ");
    cols += m.cols();
    rg = rg || At(p.id).requires_grad;
  }
  Matrix v(rows, cols);
  long c = 0;
  std::vector<int> ids;
  std::vector<long> offs;
  for (Var p : parts) {
    const Matrix& m = At(p.id).val();
    v.middleCols(c, m.cols()) = m;
    ids.push_back(p.id);
    offs.push_back(c);
    c += m.cols();
  }
  int id = Emit(std::move(v), rg);
  if (rg) {
    At(id).backfn = [id, ids, offs](Tape& t) {
      const Matrix& g = t.At(id).grad;
      for (size_t i = 0; i < ids.size(); ++i) {
        if (!t.At(ids[i]).requires_grad) continue;
        long nc = t.At(ids[i]).val().cols();
        t.GradBuf(ids[i]) += g.middleCols(offs[i], nc);
      }
    };
  }
  return {this, id};
}

Var Tape::GatherCols(Var a, std::vector<int> idx) {
  CheckMine(a, "GatherCols");
  const Matrix& m = At(a.id).val();
  for (int j : idx) {
    if (j < 0 || j >= m.cols()) {
      throw ShapeError("GatherCols: index " + std::to_string(j) +
                       " outside 0.." + std::to_string(m.cols() - 1));
    }
  }
  Matrix v(m.rows(), static_cast<long>(idx.size()));
  for (size_t j = 0; j < idx.size(); ++j) {
    v.col(static_cast<long>(j)) = m.col(idx[j]);
  }
  int id = Emit(std::move(v), At(a.id).requires_grad);
  if (At(id).requires_grad) {
    int ia = a.id;
    At(id).backfn = [id, ia, idx = std::move(idx)](Tape& t) {
      const Matrix& g = t.At(id).grad;
      Matrix& ga = t.GradBuf(ia);
      for (size_t j = 0; j < idx.size(); ++j) {
        ga.col(idx[j]) += g.col(static_cast<long>(j));
      }
    };
  }
  return {this, id};
}

Var Tape::BroadcastCol(Var v, int n_cols) {
  CheckMine(v, "BroadcastCol");
  const Matrix& m = At(v.id).val();
  if (m.cols() != 1) throw ShapeError("BroadcastCol: input must be R x 1");
  if (n_cols < 1) throw ArgumentError("BroadcastCol: need n_cols >= 1");
  int id = Emit(m.replicate(1, n_cols), At(v.id).requires_grad);
  if (At(id).requires_grad) {
    int iv = v.id;
    At(id).backfn = [id, iv](Tape& t) {
      t.GradBuf(iv) += t.At(id).grad.rowwise().sum();
    };
  }
  return {this, id};
}

// ---------------------------------------------------------------------------
// Reductions / broadcasts
// ---------------------------------------------------------------------------

Var Tape::Sum(Var a) {
  CheckMine(a, "Sum");
  Matrix v(1, 1);
  v(0, 0) = At(a.id).val().sum();
  int id = Emit(std::move(v), At(a.id).requires_grad);
  if (At(id).requires_grad) {
    int ia = a.id;
    At(id).backfn = [id, ia](Tape& t) {
      t.GradBuf(ia).array() += t.At(id).grad(0, 0);
    };
  }
  return {this, id};
}

Var Tape::Mean(Var a) {
  CheckMine(a, "Mean");
  double n = static_cast<double>(At(a.id).val().size());
  Matrix v(1, 1);
  v(0, 0) = At(a.id).val().sum() / n;
  int id = Emit(std::move(v), At(a.id).requires_grad);
  if (At(id).requires_grad) {
    int ia = a.id;
    At(id).backfn = [id, ia, n](Tape& t) {
      t.GradBuf(ia).array() += t.At(id).grad(0, 0) / n;
    };
  }
  return {this, id};
}

Var Tape::SumCols(Var a) {
  CheckMine(a, "SumCols");
  int id = Emit(At(a.id).val().rowwise().sum(), At(a.id).requires_grad);
  if (At(id).requires_grad) {
    int ia = a.id;
    At(id).backfn = [id, ia](Tape& t) {
      t.GradBuf(ia).colwise() +=
          Eigen::VectorXd(t.At(id).grad.col(0));
    };
  }
  return {this, id};
}

Var Tape::MulColVec(Var a, Var v) {
  CheckMine(a, "MulColVec");
  CheckMine(v, "MulColVec");
  const Matrix& av = At(a.id).val();
  const Matrix& vv = At(v.id).val();
  if (vv.cols() != 1 || vv.rows() != av.rows()) {
    throw ShapeError("MulColVec: vector must be R x 1 matching rows");
  }
  Matrix out = av.array().colwise() * vv.col(0).array();
  int id = Emit(std::move(out),
                At(a.id).requires_grad || At(v.id).requires_grad);
  if (At(id).requires_grad) {
    int ia = a.id, iv = v.id;
    At(id).backfn = [id, ia, iv](Tape& t) {
      const Matrix& g = t.At(id).grad;
      if (t.At(ia).requires_grad) {
        t.GradBuf(ia).array() +=
            g.array().colwise() * t.At(iv).val().col(0).array();
      }
      if (t.At(iv).requires_grad) {
        t.GradBuf(iv).col(0) +=
            g.cwiseProduct(t.At(ia).val()).rowwise().sum();
      }
    };
  }
  return {this, id};
}

Var Tape::AddColVec(Var a, Var v) {
  CheckMine(a, "AddColVec");
  CheckMine(v, "AddColVec");
  const Matrix& av = At(a.id).val();
  const Matrix& vv = At(v.id).val();
  if (vv.cols() != 1 || vv.rows() != av.rows()) {
    throw ShapeError("AddColVec: vector must be R x 1 matching rows");
  }
  Matrix out = av.array().colwise() + vv.col(0).array();
  int id = Emit(std::move(out),
                At(a.id).requires_grad || At(v.id).requires_grad);
  if (At(id).requires_grad) {
    int ia = a.id, iv = v.id;
    At(id).backfn = [id, ia, iv](Tape& t) {
      const Matrix& g = t.At(id).grad;
      if (t.At(ia).requires_grad) t.GradBuf(ia) += g;
      if (t.At(iv).requires_grad) t.GradBuf(iv).col(0) += g.rowwise().sum();
    };
  }
  return {this, id};
}

// ---------------------------------------------------------------------------
// Convolutions
// ---------------------------------------------------------------------------

namespace {

// Unfolds x (Cin x T) into (Cin*K x T_out) with zero padding.
Matrix Im2Col(const Matrix& x, int k, int stride, int dilation, int pad_left,
              int t_out) {
  long cin = x.rows();
  long t_in = x.cols();
  Matrix u = Matrix::Zero(cin * k, t_out);
  for (int t = 0; t < t_out; ++t) {
    long base = static_cast<long>(t) * stride - pad_left;
    for (int kk = 0; kk < k; ++kk) {
      long pos = base + static_cast<long>(kk) * dilation;
      if (pos < 0 || pos >= t_in) continue;
      for (long c = 0; c < cin; ++c) {
        u(c * k + kk, t) = x(c, pos);
      }
    }
  }
  return u;
}

}  // namespace

Var Tape::Conv1d(Var x, Var w, int k, int stride, int dilation, int pad_left,
                 int pad_right) {
  CheckMine(x, "Conv1d");
  CheckMine(w, "Conv1d");
  if (k < 1 || stride < 1 || dilation < 1 || pad_left < 0 || pad_right < 0) {
    throw ArgumentError("Conv1d: bad geometry");
  }
  const Matrix& xv = At(x.id).val();
  const Matrix& wv = At(w.id).val();
  long cin = xv.rows();
  if (wv.cols() != cin * k) {
    throw ShapeError("Conv1d: weight is " + std::to_string(wv.rows()) + "x" +
                     std::to_string(wv.cols()) + " but expected Cout x " +
                     std::to_string(cin * k));
  }
  long span = static_cast<long>(k - 1) * dilation + 1;
  long padded = xv.cols() + pad_left + pad_right;
  if (padded < span) {
    throw ShapeError("Conv1d: input of length " + std::to_string(xv.cols()) +
                     " is shorter than the kernel span " +
                     std::to_string(span));
  }
  int t_out = static_cast<int>((padded - span) / stride + 1);
  Matrix u = Im2Col(xv, k, stride, dilation, pad_left, t_out);
  int id = Emit(wv * u, At(x.id).requires_grad || At(w.id).requires_grad);
  if (At(id).requires_grad) {
    int ix = x.id, iw = w.id;
    At(id).backfn = [id, ix, iw, u = std::move(u), k, stride, dilation,
                     pad_left](Tape& t) {
      const Matrix& g = t.At(id).grad;
      if (t.At(iw).requires_grad) t.GradBuf(iw) += g * u.transpose();
      if (t.At(ix).requires_grad) {
        Matrix gu = t.At(iw).val().transpose() * g;  // Cin*K x T_out
        Matrix& gx = t.GradBuf(ix);
        long cin = gx.rows();
        long t_in = gx.cols();
        for (long tt = 0; tt < gu.cols(); ++tt) {
          long base = tt * stride - pad_left;
          for (int kk = 0; kk < k; ++kk) {
            long pos = base + static_cast<long>(kk) * dilation;
            if (pos < 0 || pos >= t_in) continue;
            for (long c = 0; c < cin; ++c) {
              gx(c, pos) += gu(c * k + kk, tt);
            }
          }
        }
      }
    };
  }
  return {this, id};
}

Var Tape::ConvTranspose1d(Var x, Var w, int k, int stride, int pad) {
  CheckMine(x, "ConvTranspose1d");
  CheckMine(w, "ConvTranspose1d");
  if (k < 1 || stride < 1 || pad < 0) {
    throw ArgumentError("ConvTranspose1d: bad geometry");
  }
  const Matrix& xv = At(x.id).val();
  const Matrix& wv = At(w.id).val();
  long cin = xv.rows();
  if (wv.rows() != cin || wv.cols() % k != 0) {
    throw ShapeError("ConvTranspose1d: weight is " + std::to_string(wv.rows()) +
                     "x" + std::to_string(wv.cols()) +
                     " but expected Cin x Cout*K with Cin=" +
                     std::to_string(cin));
  }
  long cout = wv.cols() / k;
  long t_in = xv.cols();
  long t_out = (t_in - 1) * stride - 2L * pad + k;
  if (t_out < 1) throw ShapeError("ConvTranspose1d: empty output");

  Matrix z = wv.transpose() * xv;  // (Cout*K) x T_in
  Matrix y = Matrix::Zero(cout, t_out);
  for (long tt = 0; tt < t_in; ++tt) {
    long base = tt * stride - pad;
    for (int kk = 0; kk < k; ++kk) {
      long pos = base + kk;
      if (pos < 0 || pos >= t_out) continue;
      for (long co = 0; co < cout; ++co) {
        y(co, pos) += z(co * k + kk, tt);
      }
    }
  }
  int id = Emit(std::move(y), At(x.id).requires_grad || At(w.id).requires_grad);
  if (At(id).requires_grad) {
    int ix = x.id, iw = w.id;
    At(id).backfn = [id, ix, iw, k, stride, pad, cout, t_in](Tape& t) {
      const Matrix& g = t.At(id).grad;
      Matrix gz = Matrix::Zero(cout * k, t_in);
      for (long tt = 0; tt < t_in; ++tt) {
        long base = tt * stride - pad;
        for (int kk = 0; kk < k; ++kk) {
          long pos = base + kk;
          if (pos < 0 || pos >= g.cols()) continue;
          for (long co = 0; co < cout; ++co) {
            gz(co * k + kk, tt) = g(co, pos);
          }
        }
      }
      if (t.At(iw).requires_grad) {
        t.GradBuf(iw) += t.At(ix).val() * gz.transpose();
      }
      if (t.At(ix).requires_grad) {
        t.GradBuf(ix) += t.At(iw).val() * gz;
      }
    };
  }
  return {this, id};
}

Var Tape::AvgPool1d(Var x, int k, int stride, int pad) {
  CheckMine(x, "AvgPool1d");
  if (k < 1 || stride < 1 || pad < 0) {
    throw ArgumentError("AvgPool1d: bad geometry");
  }
  const Matrix& xv = At(x.id).val();
  long t_in = xv.cols();
  long padded = t_in + 2L * pad;
  if (padded < k) throw ShapeError("AvgPool1d: input shorter than window");
  long t_out = (padded - k) / stride + 1;
  Matrix y = Matrix::Zero(xv.rows(), t_out);
  for (long t = 0; t < t_out; ++t) {
    long base = t * stride - pad;
    for (int kk = 0; kk < k; ++kk) {
      long pos = base + kk;
      if (pos < 0 || pos >= t_in) continue;  // zero padding contributes zero
      y.col(t) += xv.col(pos);
    }
    y.col(t) /= static_cast<double>(k);
  }
  int id = Emit(std::move(y), At(x.id).requires_grad);
  if (At(id).requires_grad) {
    int ix = x.id;
    At(id).backfn = [id, ix, k, stride, pad](Tape& t) {
      const Matrix& g = t.At(id).grad;
      Matrix& gx = t.GradBuf(ix);
      for (long tt = 0; tt < g.cols(); ++tt) {
        long base = tt * stride - pad;
        for (int kk = 0; kk < k; ++kk) {
          long pos = base + kk;
          if (pos < 0 || pos >= gx.cols()) continue;
          gx.col(pos) += g.col(tt) / static_cast<double>(k);
        }
      }
    };
  }
  return {this, id};
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

Var Tape::SoftmaxCrossEntropy(Var logits, std::vector<int> labels) {
  CheckMine(logits, "SoftmaxCrossEntropy");
  const Matrix& lv = At(logits.id).val();
  long c = lv.rows();
  long n = lv.cols();
  if (static_cast<long>(labels.size()) != n) {
    throw ShapeError("SoftmaxCrossEntropy: " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(n) + " columns");
  }
  for (int l : labels) {
    if (l < 0 || l >= c) {
      throw ArgumentError("SoftmaxCrossEntropy: label " + std::to_string(l) +
                          " outside 0.." + std::to_string(c - 1));
    }
  }
  Matrix probs(c, n);
  double loss = 0.0;
  for (long j = 0; j < n; ++j) {
    double mx = lv.col(j).maxCoeff();
    Eigen::ArrayXd e = (lv.col(j).array() - mx).exp();
    double z = e.sum();
    probs.col(j) = (e / z).matrix();
    loss -= std::log(probs(labels[static_cast<size_t>(j)], j));
  }
  Matrix v(1, 1);
  v(0, 0) = loss / static_cast<double>(n);
  int id = Emit(std::move(v), At(logits.id).requires_grad);
  if (At(id).requires_grad) {
    int il = logits.id;
    At(id).backfn = [id, il, probs = std::move(probs),
                     labels = std::move(labels)](Tape& t) {
      double g = t.At(id).grad(0, 0);
      Matrix d = probs;
      for (long j = 0; j < d.cols(); ++j) {
        d(labels[static_cast<size_t>(j)], j) -= 1.0;
      }
      t.GradBuf(il) += d * (g / static_cast<double>(d.cols()));
    };
  }
  return {this, id};
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

void Tape::Backward(Var root) {
  CheckMine(root, "Backward");
  Node& r = At(root.id);
  if (r.val().size() != 1) {
    throw ShapeError("Backward: root must be scalar (1x1)");
  }
  for (Node& n : nodes_) n.grad.resize(0, 0);
  GradBuf(root.id)(0, 0) = 1.0;
  for (int i = root.id; i >= 0; --i) {
    Node& n = At(i);
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (n.param != nullptr) {
      if (n.param->grad.size() == 0) {
        n.param->grad = Matrix::Zero(n.val().rows(), n.val().cols());
      }
      n.param->grad += n.grad;
    }
    if (n.backfn) n.backfn(*this);
  }
}

}  // namespace ag
}  // namespace fastvc
