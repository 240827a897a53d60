// Copyright (c) 2026 pcc contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PCC_RNG_HPP
#define PCC_RNG_HPP

#include <cmath>
#include <cstdint>
#include <vector>

namespace pcc
{

/// xoshiro256++ seeded via splitmix64. Self-contained so that streams are
/// bit-identical across standard libraries; std::uniform_real_distribution
/// gives no such guarantee.
class Rng
{
public:
  explicit Rng(uint64_t seed)
  {
    uint64_t x = seed;
    for (auto & si : s_) {
      x += 0x9E3779B97F4A7C15ULL;
      uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
      si = z ^ (z >> 31);
    }
  }

  uint64_t next_u64()
  {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform() {return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;}

  double uniform(double lo, double hi) {return lo + (hi - lo) * uniform();}

  /// Uniform integer in [0, n), n >= 1. Widening-multiply method, unbiased
  /// enough for data generation and shuffling at desk scale.
  uint64_t uniform_int(uint64_t n)
  {
    return static_cast<uint64_t>(
      (static_cast<__uint128_t>(next_u64()) * static_cast<__uint128_t>(n)) >> 64);
  }

  /// Standard normal via Box-Muller (second value cached).
  double gaussian()
  {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    double u2 = uniform();
    // avoid log(0)
    if (u1 <= 0.0) {u1 = 0x1.0p-53;}
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  template<typename T>
  void shuffle(std::vector<T> & v)
  {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  static uint64_t rotl(uint64_t x, int k) {return (x << k) | (x >> (64 - k));}

  uint64_t s_[4];
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// Stable derivation of per-item seeds from a base seed (dataset examples,
/// parameter init streams).
inline uint64_t derive_seed(uint64_t base, uint64_t index)
{
  uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace pcc

#endif  // PCC_RNG_HPP
