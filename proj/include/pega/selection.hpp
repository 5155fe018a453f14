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

// Plaintext selection primitives shared by the reference GA and the
// encrypted engine. Both sides draw from these functions so that equal seeds
// give equal selections.

#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "pega/errors.hpp"
#include "pega/fixedpoint.hpp"
#include "pega/random.hpp"

namespace pega::selection {

/// k distinct indices in [0, n), drawn in order by rejection, returned sorted.
inline std::vector<std::size_t> sample_distinct(Rng& rng, std::size_t n, std::size_t k) {
  if (k > n) throw std::invalid_argument("tournament size exceeds population");
  std::vector<std::size_t> picked;
  picked.reserve(k);
  while (picked.size() < k) {
    const auto idx = static_cast<std::size_t>(rng.uniform_below(n));
    if (std::find(picked.begin(), picked.end(), idx) == picked.end()) picked.push_back(idx);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

/// Roulette threshold r * 2^(2 precision) with r uniform over the dyadic
/// rationals in (0, 1): an integer in [1, 2^(2 precision) - 1].
inline mpz_class draw_threshold(Rng& rng, unsigned precision) {
  return rng.random_between(1, fixedpoint::pow2(2 * precision) - 1);
}

/// Quantized selection weights for a minimization objective.
///
///   raw_i = cost_i 2^precision,  v_i = sum_j raw_j - raw_i
///   D     = round(2^(2 precision) / sum_j v_j)
///   p_i   = v_i D                 (~ v_i / sum v * 2^(2 precision))
///
/// These are exactly the integers the encrypted probability protocol
/// produces, so a plaintext roulette over them replays the encrypted one.
struct FpsWeights {
  std::vector<mpz_class> fitness;        // v_i
  std::vector<mpz_class> probabilities;  // p_i
  mpz_class scalar;                      // D
};

inline FpsWeights fps_weights(std::span<const std::int64_t> costs, unsigned precision) {
  FpsWeights out;
  const mpz_class unit = fixedpoint::pow2(precision);
  mpz_class sum = 0;
  for (auto c : costs) sum += mpz_class(static_cast<long>(c)) * unit;
  mpz_class fitness_sum = 0;
  out.fitness.reserve(costs.size());
  for (auto c : costs) {
    out.fitness.push_back(sum - mpz_class(static_cast<long>(c)) * unit);
    fitness_sum += out.fitness.back();
  }
  if (sgn(fitness_sum) == 0) throw DegeneratePopulation("fitness values sum to zero");
  mpq_class denominator(fitness_sum, unit);
  denominator.canonicalize();
  out.scalar = fixedpoint::reciprocal_code(denominator, precision);
  out.probabilities.reserve(costs.size());
  for (const auto& v : out.fitness) out.probabilities.push_back(v * out.scalar);
  return out;
}

/// Smallest index i with threshold <= prefix[i]; the last index when the
/// threshold exceeds every prefix sum. `less` reports prefix[i] < threshold.
template <typename Less>
std::size_t lower_bound_index(std::size_t n, Less&& less) {
  std::size_t lo = 0;
  std::size_t hi = n - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (less(mid)) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace pega::selection
