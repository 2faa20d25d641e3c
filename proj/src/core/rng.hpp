// Copyright 2026 The Configlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CONFIGLAB_CORE_RNG_HPP_
#define CONFIGLAB_CORE_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

#include "errors.hpp"

namespace configlab {

// SplitMix64; used to whiten seeds and to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic random source.  The engine is std::mt19937_64, whose output
// sequence is pinned by the standard; every distribution below is implemented
// by hand so that streams are bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  // Independent stream derived from (seed, stream index).  Used to give each
  // Monte Carlo path / worker / chain its own reproducible source.
  static Rng derived(std::uint64_t seed, std::uint64_t stream) {
    return Rng(splitmix64(seed ^ splitmix64(stream + 0x51ab5e11ULL)));
  }

  std::uint64_t bits() { return gen_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Uniform index in {0, ..., n-1} by rejection on the top bits (unbiased).
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw InvalidArgument("uniform_index: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = gen_();
    while (v >= limit) v = gen_();
    return static_cast<std::size_t>(v % n);
  }

  // Standard normal via the polar method; the rejected pair count varies, so
  // a cached spare keeps consumption consistent within one stream.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double r = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * r;
    has_spare_ = true;
    return u * r;
  }

  // Poisson count by CDF inversion.  Means above the chunk threshold are
  // split using Poisson additivity, which keeps the inversion numerically
  // well conditioned at any mean.
  int poisson(double mean) {
    if (!(mean >= 0.0)) throw InvalidArgument("poisson: mean must be >= 0");
    int total = 0;
    while (mean > 30.0) {
      total += poisson_small(15.0);
      mean -= 15.0;
    }
    return total + poisson_small(mean);
  }

 private:
  int poisson_small(double mean) {
    if (mean == 0.0) return 0;
    const double u = uniform01();
    double p = std::exp(-mean);
    double cum = p;
    int k = 0;
    while (u > cum) {
      ++k;
      p *= mean / k;
      cum += p;
      if (k > 2000) throw NumericalFailure("poisson: inversion ran away");
    }
    return k;
  }

  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace configlab

#endif  // CONFIGLAB_CORE_RNG_HPP_
