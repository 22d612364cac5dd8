// core/include/fastvc/fft.hpp

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

#ifndef FASTVC_FFT_HPP_
#define FASTVC_FFT_HPP_

#include <complex>
#include <vector>

namespace fastvc {

/// Iterative radix-2 FFT over a power-of-two length. Precomputes twiddle
/// factors and the bit-reversal permutation at construction.
class Fft {
 public:
  explicit Fft(int n);

  int size() const { return n_; }

  /// In-place forward transform (no scaling).
  void Forward(std::vector<std::complex<double>>& buf) const;

  /// In-place inverse transform, scaled by 1/n.
  void Inverse(std::vector<std::complex<double>>& buf) const;

 private:
  void Transform(std::vector<std::complex<double>>& buf, bool inverse) const;

  int n_;
  std::vector<int> bitrev_;
  std::vector<std::complex<double>> twiddle_;  // e^{-2*pi*i*k/n}, k < n/2
};

bool IsPowerOfTwo(int n);

}  // namespace fastvc

#endif  // FASTVC_FFT_HPP_
