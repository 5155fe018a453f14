// Copyright 2026 The pega-tsp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Deterministic randomness.
//
// Every random decision in the library is drawn from an Rng, which wraps
// std::mt19937_64. The engine's output sequence is fixed by the C++ standard,
// but the standard distributions are not, so all distributions used here are
// implemented on top of raw 64-bit words:
//
//   uniform_below(n)  rejection sampling on the top of the word range
//   uniform01()       53 high bits scaled by 2^-53, in [0, 1)
//   coin()            the most significant bit
//   random_bits(b)    little-endian words, top word masked to b bits
//   random_below(n)   random_bits(bitlen(n)) with rejection
//
// Seeds for independent streams are derived with splitmix64.

#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pega {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derive the seed of sub-stream `index` under `root`.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(root) ^ splitmix64(index + 0x5851f42d4c957f2dULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: empty range");
    // Largest multiple of n that fits in 2^64, expressed as a rejection threshold.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= threshold) return x % n;
    }
  }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  int coin() { return static_cast<int>(engine_() >> 63); }

  mpz_class random_bits(unsigned bits) {
    mpz_class out = 0;
    if (bits == 0) return out;
    const unsigned words = (bits + 63) / 64;
    std::vector<std::uint64_t> limbs(words);
    for (auto& w : limbs) w = engine_();
    const unsigned top = bits % 64;
    if (top != 0) limbs.back() &= (std::uint64_t{1} << top) - 1;
    mpz_import(out.get_mpz_t(), words, -1, sizeof(std::uint64_t), 0, 0, limbs.data());
    return out;
  }

  /// Uniform integer in [0, bound). bound must be positive.
  mpz_class random_below(const mpz_class& bound) {
    if (sgn(bound) <= 0) throw std::invalid_argument("random_below: empty range");
    const auto bits = static_cast<unsigned>(mpz_sizeinbase(bound.get_mpz_t(), 2));
    for (;;) {
      mpz_class x = random_bits(bits);
      if (x < bound) return x;
    }
  }

  /// Uniform integer in the closed range [lo, hi].
  mpz_class random_between(const mpz_class& lo, const mpz_class& hi) {
    if (hi < lo) throw std::invalid_argument("random_between: empty range");
    mpz_class span = hi - lo + 1;
    return lo + random_below(span);
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

/// Fisher-Yates shuffle driven by Rng::uniform_below.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace pega
