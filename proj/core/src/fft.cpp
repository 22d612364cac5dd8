// core/src/fft.cpp

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

#include "fastvc/fft.hpp"

#include <cmath>

#include "fastvc/error.hpp"

namespace fastvc {

bool IsPowerOfTwo(int n) { return n > 0 && (n & (n - 1)) == 0; }

Fft::Fft(int n) : n_(n) {
  if (!IsPowerOfTwo(n)) {
    throw ArgumentError("Fft: size must be a power of two, got " +
                        std::to_string(n));
  }
  bitrev_.resize(n);
  int log2n = 0;
  while ((1 << log2n) < n) ++log2n;
  for (int i = 0; i < n; ++i) {
    int r = 0;
    for (int b = 0; b < log2n; ++b) r |= ((i >> b) & 1) << (log2n - 1 - b);
    bitrev_[i] = r;
  }
  twiddle_.resize(n / 2 > 0 ? n / 2 : 1);
  const double kTwoPi = 6.283185307179586476925286766559;
  for (int k = 0; k < n / 2; ++k) {
    double a = -kTwoPi * k / n;
    twiddle_[k] = {std::cos(a), std::sin(a)};
  }
}

void Fft::Transform(std::vector<std::complex<double>>& buf,
                    bool inverse) const {
  if (static_cast<int>(buf.size()) != n_) {
    throw ShapeError("Fft: buffer length " + std::to_string(buf.size()) +
                     " does not match transform size " + std::to_string(n_));
  }
  for (int i = 0; i < n_; ++i) {
    int j = bitrev_[i];
    if (j > i) std::swap(buf[i], buf[j]);
  }
  for (int len = 2; len <= n_; len <<= 1) {
    int half = len >> 1;
    int step = n_ / len;
    for (int start = 0; start < n_; start += len) {
      for (int k = 0; k < half; ++k) {
        std::complex<double> w = twiddle_[k * step];
        if (inverse) w = std::conj(w);
        std::complex<double> u = buf[start + k];
        std::complex<double> v = buf[start + k + half] * w;
        buf[start + k] = u + v;
        buf[start + k + half] = u - v;
      }
    }
  }
}

void Fft::Forward(std::vector<std::complex<double>>& buf) const {
  Transform(buf, false);
}

void Fft::Inverse(std::vector<std::complex<double>>& buf) const {
  Transform(buf, true);
  double scale = 1.0 / n_;
  for (auto& v : buf) v *= scale;
}

}  // namespace fastvc
