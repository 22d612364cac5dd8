// tests/test_nn.cpp

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fastvc/error.hpp"
#include "fastvc/nn.hpp"
#include "fastvc/rng.hpp"

using namespace fastvc;
namespace agx = fastvc::ag;

namespace {

double Sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

agx::Matrix RandomMatrix(int r, int c, uint64_t salt) {
  Rng rng = Rng::Derive(600, {salt});
  agx::Matrix m(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) m(i, j) = rng.Uniform(-1.0, 1.0);
  }
  return m;
}

}  // namespace

TEST_CASE("store enforces unique names and keeps creation order") {
  ParameterStore ps;
  ps.Create("a", 2, 2);
  ps.Create("b", 1, 3);
  CHECK_THROWS_AS(ps.Create("a", 2, 2), StateError);
  CHECK(ps.size() == 2);
  CHECK(ps.items()[0]->name == "a");
  CHECK(ps.items()[1]->name == "b");
  CHECK(ps.TotalValues() == 7);
  CHECK(ps.Has("a"));
  CHECK_FALSE(ps.Has("c"));
  CHECK(ps.Find("c") == nullptr);
  CHECK_THROWS_AS(ps.Get("c"), LookupError);
}

TEST_CASE("trainability toggles by prefix") {
  ParameterStore ps;
  ps.Create("enc.w", 1, 1);
  ps.Create("enc.b", 1, 1);
  ps.Create("dec.w", 1, 1);
  ps.SetTrainable("enc.", false);
  std::vector<Parameter*> tr = ps.Trainable();
  REQUIRE(tr.size() == 1);
  CHECK(tr[0]->name == "dec.w");
  CHECK(ps.WithPrefix("enc.").size() == 2);
}

TEST_CASE("fan-in init is bounded and independent of creation order") {
  ParameterStore a;
  Parameter& p1 = a.Create("layer.w", 8, 8);
  InitUniformFanIn(p1, 16, 42);

  ParameterStore b;
  b.Create("unrelated", 3, 3);
  Parameter& p2 = b.Create("layer.w", 8, 8);
  InitUniformFanIn(p2, 16, 42);

  CHECK(p1.value == p2.value);
  double bound = 1.0 / std::sqrt(16.0);
  CHECK(p1.value.cwiseAbs().maxCoeff() <= bound);
  CHECK(p1.value.cwiseAbs().maxCoeff() > 0.0);

  // Another name, another stream.
  ParameterStore c;
  Parameter& p3 = c.Create("layer.v", 8, 8);
  InitUniformFanIn(p3, 16, 42);
  CHECK(p3.value != p1.value);
}

TEST_CASE("conv layer output length follows its formula") {
  ParameterStore ps;
  Conv1dLayer conv(ps, "c", 1, 3, 4, 5, 2, 1, -1, -1, false);
  // k=5, stride=2, default same-ish padding 2+2.
  agx::Tape t(false);
  for (int len : {5, 6, 9, 16}) {
    agx::Var y = conv.Apply(t, t.Input(agx::Matrix::Zero(3, len)));
    CHECK(y.cols() == conv.OutLen(len));
    CHECK(y.rows() == 4);
  }
}

TEST_CASE("conv with odd kernel and stride one preserves length") {
  ParameterStore ps;
  Conv1dLayer conv(ps, "c", 2, 4, 4, 5);
  agx::Tape t(false);
  agx::Var y = conv.Apply(t, t.Input(agx::Matrix::Zero(4, 33)));
  CHECK(y.cols() == 33);
}

TEST_CASE("conv matches a direct correlation on a hand example") {
  ParameterStore ps;
  Conv1dLayer conv(ps, "c", 3, 1, 1, 3, 1, 1, 0, 0, false);
  ps.Get("c.weight").value << 1.0, 2.0, 3.0;  // taps over time
  ps.Get("c.bias").value << 0.5;
  agx::Matrix x(1, 5);
  x << 1, 0, 2, -1, 3;
  agx::Tape t(false);
  agx::Var y = conv.Apply(t, t.Input(x));
  REQUIRE(y.cols() == 3);
  CHECK(t.ValueOf(y)(0, 0) == doctest::Approx(1 * 1 + 0 * 2 + 2 * 3 + 0.5));
  CHECK(t.ValueOf(y)(0, 1) == doctest::Approx(0 * 1 + 2 * 2 - 1 * 3 + 0.5));
  CHECK(t.ValueOf(y)(0, 2) == doctest::Approx(2 * 1 - 1 * 2 + 3 * 3 + 0.5));
}

TEST_CASE("weight norm matches the plain init at creation") {
  ParameterStore plain_ps;
  Conv1dLayer plain(plain_ps, "c", 7, 3, 5, 4, 1, 1, -1, -1, false);
  ParameterStore wn_ps;
  Conv1dLayer normed(wn_ps, "c", 7, 3, 5, 4, 1, 1, -1, -1, true);
  agx::Tape t1(false), t2(false);
  agx::Matrix w_plain = t1.ValueOf(plain.Weight(t1));
  agx::Matrix w_eff = t2.ValueOf(normed.Weight(t2));
  CHECK((w_plain - w_eff).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("weight norm is invariant to rescaling the direction") {
  ParameterStore ps;
  Conv1dLayer conv(ps, "c", 7, 2, 3, 3, 1, 1, -1, -1, true);
  agx::Tape t1(false);
  agx::Matrix before = t1.ValueOf(conv.Weight(t1));
  ps.Get("c.weight").value.row(1) *= 7.5;  // direction row only
  agx::Tape t2(false);
  agx::Matrix after = t2.ValueOf(conv.Weight(t2));
  CHECK((before - after).cwiseAbs().maxCoeff() < 1e-12);
  // Scaling the gain scales the row.
  ps.Get("c.gain").value(1, 0) *= 2.0;
  agx::Tape t3(false);
  agx::Matrix scaled = t3.ValueOf(conv.Weight(t3));
  CHECK((scaled.row(1) - 2.0 * before.row(1)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((scaled.row(0) - before.row(0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("channel norm standardizes rows over time") {
  ParameterStore ps;
  ChannelNorm norm(ps, "n", 3);
  agx::Matrix x = RandomMatrix(3, 50, 1);
  agx::Tape t(false);
  agx::Matrix y = t.ValueOf(norm.Apply(t, t.Input(x)));
  for (int r = 0; r < 3; ++r) {
    double mean = y.row(r).mean();
    double var = (y.row(r).array() - mean).square().mean();
    CHECK(mean == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("channel norm maps a constant row to its bias") {
  ParameterStore ps;
  ChannelNorm norm(ps, "n", 2);
  ps.Get("n.bias").value << 0.25, -0.5;
  agx::Matrix x(2, 10);
  x.row(0).setConstant(3.0);
  x.row(1).setConstant(-7.0);
  agx::Tape t(false);
  agx::Matrix y = t.ValueOf(norm.Apply(t, t.Input(x)));
  CHECK((y.row(0).array() - 0.25).abs().maxCoeff() < 1e-6);
  CHECK((y.row(1).array() + 0.5).abs().maxCoeff() < 1e-6);
}

TEST_CASE("linear layer computes Wx plus b") {
  ParameterStore ps;
  LinearLayer lin(ps, "l", 3, 2, 2);
  ps.Get("l.weight").value << 1.0, 2.0, -1.0, 0.5;
  ps.Get("l.bias").value << 0.0, 1.0;
  agx::Matrix x(2, 2);
  x << 1.0, 0.0, 2.0, -2.0;
  agx::Tape t(false);
  agx::Matrix y = t.ValueOf(lin.Apply(t, t.Input(x)));
  CHECK(y(0, 0) == doctest::Approx(5.0));
  CHECK(y(1, 0) == doctest::Approx(1.0));
  CHECK(y(0, 1) == doctest::Approx(-4.0));
  CHECK(y(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("lstm step matches a hand computation") {
  ParameterStore ps;
  LstmLayer lstm(ps, "r", 5, 1, 1);
  // Gates stacked i, f, g, o.
  ps.Get("r.wx").value << 0.5, -0.3, 0.8, 0.2;
  ps.Get("r.wh").value << 0.1, 0.4, -0.2, 0.3;
  ps.Get("r.bias").value << 0.05, -0.05, 0.0, 0.1;

  agx::Matrix x(1, 2);
  x << 1.0, -0.5;
  agx::Tape t(false);
  agx::Matrix y = t.ValueOf(lstm.Apply(t, t.Input(x)));
  REQUIRE(y.rows() == 1);
  REQUIRE(y.cols() == 2);

  // Step 1 from zero state.
  double i1 = Sig(0.5 * 1.0 + 0.05);
  double f1 = Sig(-0.3 * 1.0 - 0.05);
  double g1 = std::tanh(0.8 * 1.0 + 0.0);
  double o1 = Sig(0.2 * 1.0 + 0.1);
  double c1 = i1 * g1;
  double h1 = o1 * std::tanh(c1);
  CHECK(y(0, 0) == doctest::Approx(h1).epsilon(1e-12));

  // Step 2 carries (h1, c1).
  double i2 = Sig(0.5 * -0.5 + 0.1 * h1 + 0.05);
  double f2 = Sig(-0.3 * -0.5 + 0.4 * h1 - 0.05);
  double g2 = std::tanh(0.8 * -0.5 - 0.2 * h1 + 0.0);
  double o2 = Sig(0.2 * -0.5 + 0.3 * h1 + 0.1);
  double c2 = f2 * c1 + i2 * g2;
  double h2 = o2 * std::tanh(c2);
  CHECK(y(0, 1) == doctest::Approx(h2).epsilon(1e-12));
}

TEST_CASE("reversed lstm equals the forward lstm on the reversed input") {
  ParameterStore ps;
  LstmLayer lstm(ps, "r", 6, 3, 4);
  agx::Matrix x = RandomMatrix(3, 7, 2);
  agx::Matrix xrev = x.rowwise().reverse();
  agx::Tape t(false);
  agx::Matrix back = t.ValueOf(lstm.Apply(t, t.Input(x), true));
  agx::Matrix fwd = t.ValueOf(lstm.Apply(t, t.Input(xrev), false));
  CHECK((back - fwd.rowwise().reverse()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("bidirectional lstm stacks both directions") {
  ParameterStore ps;
  BiLstmLayer bi(ps, "bi", 8, 3, 4);
  agx::Matrix x = RandomMatrix(3, 6, 3);
  agx::Tape t(false);
  agx::Matrix y = t.ValueOf(bi.Apply(t, t.Input(x)));
  CHECK(y.rows() == 8);
  CHECK(y.cols() == 6);
}

TEST_CASE("adam follows its update rule bit for bit") {
  ParameterStore ps;
  Parameter& p = ps.Create("w", 1, 1);
  p.value << 1.0;
  AdamConfig cfg{0.1, 0.9, 0.99, 1e-8};
  Adam opt({&p}, cfg);

  double m = 0.0, v = 0.0, x = 1.0;
  for (int step = 1; step <= 3; ++step) {
    double g = 2.0 * x;  // pretend loss x^2
    p.grad = agx::Matrix::Constant(1, 1, g);
    opt.Step();
    m = 0.9 * m + 0.1 * g;
    v = 0.99 * v + 0.01 * g * g;
    double mhat = m / (1.0 - std::pow(0.9, step));
    double vhat = v / (1.0 - std::pow(0.99, step));
    x -= 0.1 * mhat / (std::sqrt(vhat) + 1e-8);
    CHECK(p.value(0, 0) == doctest::Approx(x).epsilon(1e-15));
  }
  CHECK(opt.step_count() == 3);
}

TEST_CASE("adam bias correction resumes from a restored step count") {
  // Same gradients, one continuous run vs stop-and-restore. Identical
  // parameters prove step_count is the only hidden scalar state.
  auto run = [](int split) {
    ParameterStore ps;
    Parameter& p = ps.Create("w", 1, 1);
    p.value << 0.5;
    Adam first({&p}, AdamConfig{0.05, 0.9, 0.99, 1e-8});
    int step = 0;
    Adam* opt = &first;
    Adam second({&p}, AdamConfig{0.05, 0.9, 0.99, 1e-8});
    for (int i = 0; i < 6; ++i) {
      if (i == split) {
        second.set_step_count(first.step_count());
        opt = &second;
      }
      p.grad = agx::Matrix::Constant(1, 1, std::sin(i + 1.0));
      opt->Step();
    }
    return p.value(0, 0);
  };
  CHECK(run(6) == run(3));
}

TEST_CASE("zero grad clears accumulated gradients") {
  ParameterStore ps;
  Parameter& p = ps.Create("w", 2, 2);
  p.grad = agx::Matrix::Ones(2, 2);
  Adam opt({&p}, AdamConfig{});
  opt.ZeroGrad();
  CHECK(p.grad.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sgd takes a plain step") {
  ParameterStore ps;
  Parameter& p = ps.Create("w", 1, 2);
  p.value << 1.0, -1.0;
  p.grad = agx::Matrix::Constant(1, 2, 0.5);
  Sgd opt({&p}, 0.2);
  opt.Step();
  CHECK(p.value(0, 0) == doctest::Approx(0.9));
  CHECK(p.value(0, 1) == doctest::Approx(-1.1));
}

TEST_CASE("layers reject inputs with the wrong channel count") {
  ParameterStore ps;
  Conv1dLayer conv(ps, "c", 1, 3, 2, 3);
  LstmLayer lstm(ps, "r", 1, 4, 2);
  agx::Tape t(false);
  CHECK_THROWS_AS(conv.Apply(t, t.Input(agx::Matrix::Zero(2, 5))),
                  ShapeError);
  CHECK_THROWS_AS(lstm.Apply(t, t.Input(agx::Matrix::Zero(3, 5))),
                  ShapeError);
}
