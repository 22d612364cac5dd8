// core/include/fastvc/rng.hpp

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

#ifndef FASTVC_RNG_HPP_
#define FASTVC_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace fastvc {

// SplitMix64 generator. The standard library distributions are not pinned
// across implementations, so every draw here is defined in terms of the raw
// 64-bit stream; checkpoints and logs stay bit-identical across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  // Derives an independent substream from a base seed and a list of stream
  // coordinates (epoch, step, purpose, ...). Same inputs, same stream.
  static Rng Derive(uint64_t seed, std::initializer_list<uint64_t> coords) {
    uint64_t s = seed;
    for (uint64_t c : coords) {
      s = Mix(s ^ (c + 0x9e3779b97f4a7c15ULL));
    }
    return Rng(s);
  }

  uint64_t NextU64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return Mix(state_);
  }

  /// Uniform double in [0, 1), 53 bits of entropy.
  double Uniform() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  /// Unbiased integer in [0, n). Mask-and-reject, so the sequence is pinned.
  uint64_t Below(uint64_t n) {
    if (n <= 1) return 0;
    uint64_t mask = ~uint64_t{0} >> CountLeadingZeros(n - 1);
    uint64_t v;
    do {
      v = NextU64() & mask;
    } while (v >= n);
    return v;
  }

  /// Standard normal via Box-Muller (pair cached).
  double Normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = Uniform();
    } while (u1 <= 0.0);
    u2 = Uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void Shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(Below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static uint64_t Mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static int CountLeadingZeros(uint64_t x) {
    int n = 0;
    if (x == 0) return 64;
    while (!(x & 0x8000000000000000ULL)) {
      x <<= 1;
      ++n;
    }
    return n;
  }

  uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// FNV-1a hash of a string, used to derive per-parameter init streams.
inline uint64_t HashName(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace fastvc

#endif  // FASTVC_RNG_HPP_
