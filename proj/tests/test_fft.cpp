// tests/test_fft.cpp

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
#include <complex>
#include <vector>

#include "fastvc/error.hpp"
#include "fastvc/fft.hpp"
#include "fastvc/rng.hpp"

using namespace fastvc;
using cd = std::complex<double>;

namespace {

// Quadratic-time reference transform, written independently of the
// implementation under test.
std::vector<cd> NaiveDft(const std::vector<cd>& x, bool inverse) {
  const size_t n = x.size();
  std::vector<cd> out(n);
  const double sign = inverse ? 1.0 : -1.0;
  for (size_t k = 0; k < n; ++k) {
    cd acc = 0.0;
    for (size_t j = 0; j < n; ++j) {
      double ang = sign * 2.0 * M_PI * static_cast<double>(k * j) /
                   static_cast<double>(n);
      acc += x[j] * cd(std::cos(ang), std::sin(ang));
    }
    out[k] = inverse ? acc / static_cast<double>(n) : acc;
  }
  return out;
}

std::vector<cd> RandomSignal(size_t n, uint64_t salt) {
  Rng rng = Rng::Derive(100, {salt, n});
  std::vector<cd> x(n);
  for (auto& v : x) v = cd(rng.Uniform(-1.0, 1.0), rng.Uniform(-1.0, 1.0));
  return x;
}

}  // namespace

TEST_CASE("IsPowerOfTwo") {
  CHECK(IsPowerOfTwo(1));
  CHECK(IsPowerOfTwo(2));
  CHECK(IsPowerOfTwo(1024));
  CHECK_FALSE(IsPowerOfTwo(0));
  CHECK_FALSE(IsPowerOfTwo(-4));
  CHECK_FALSE(IsPowerOfTwo(3));
  CHECK_FALSE(IsPowerOfTwo(1023));
}

TEST_CASE("non power of two size is rejected") {
  CHECK_THROWS_AS(Fft(3), ArgumentError);
  CHECK_THROWS_AS(Fft(0), ArgumentError);
  CHECK_THROWS_AS(Fft(-8), ArgumentError);
}

TEST_CASE("buffer length must match the plan size") {
  Fft fft(8);
  std::vector<cd> buf(7);
  CHECK_THROWS_AS(fft.Forward(buf), ShapeError);
}

TEST_CASE("forward transform matches the quadratic reference") {
  for (size_t n : {2u, 4u, 8u, 16u, 64u, 256u, 1024u}) {
    std::vector<cd> x = RandomSignal(n, 1);
    std::vector<cd> want = NaiveDft(x, false);
    std::vector<cd> got = x;
    Fft fft(static_cast<int>(n));
    fft.Forward(got);
    double scale = std::sqrt(static_cast<double>(n));
    for (size_t i = 0; i < n; ++i) {
      CHECK(std::abs(got[i] - want[i]) < 1e-9 * scale);
    }
  }
}

TEST_CASE("inverse transform matches the quadratic reference") {
  for (size_t n : {2u, 8u, 128u}) {
    std::vector<cd> x = RandomSignal(n, 2);
    std::vector<cd> want = NaiveDft(x, true);
    std::vector<cd> got = x;
    Fft fft(static_cast<int>(n));
    fft.Inverse(got);
    for (size_t i = 0; i < n; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-10);
  }
}

TEST_CASE("roundtrip restores the input") {
  std::vector<cd> x = RandomSignal(512, 3);
  std::vector<cd> buf = x;
  Fft fft(512);
  fft.Forward(buf);
  fft.Inverse(buf);
  for (size_t i = 0; i < x.size(); ++i) CHECK(std::abs(buf[i] - x[i]) < 1e-12);
}

TEST_CASE("impulse has a flat spectrum") {
  std::vector<cd> x(64, cd(0.0, 0.0));
  x[0] = 1.0;
  Fft fft(64);
  fft.Forward(x);
  for (const cd& v : x) CHECK(std::abs(v - cd(1.0, 0.0)) < 1e-12);
}

TEST_CASE("pure tone concentrates in one bin") {
  const int n = 256;
  const int bin = 19;
  std::vector<cd> x(n);
  for (int i = 0; i < n; ++i) {
    x[static_cast<size_t>(i)] = std::cos(2.0 * M_PI * bin * i / n);
  }
  Fft fft(n);
  fft.Forward(x);
  for (int k = 0; k < n; ++k) {
    double mag = std::abs(x[static_cast<size_t>(k)]);
    if (k == bin || k == n - bin) {
      CHECK(mag == doctest::Approx(n / 2.0).epsilon(1e-9));
    } else {
      CHECK(mag < 1e-9 * n);
    }
  }
}

TEST_CASE("transform is linear") {
  std::vector<cd> a = RandomSignal(128, 4);
  std::vector<cd> b = RandomSignal(128, 5);
  std::vector<cd> sum(128);
  for (size_t i = 0; i < 128; ++i) sum[i] = 2.0 * a[i] + 3.0 * b[i];
  Fft fft(128);
  std::vector<cd> fa = a, fb = b, fsum = sum;
  fft.Forward(fa);
  fft.Forward(fb);
  fft.Forward(fsum);
  for (size_t i = 0; i < 128; ++i) {
    CHECK(std::abs(fsum[i] - (2.0 * fa[i] + 3.0 * fb[i])) < 1e-9);
  }
}
