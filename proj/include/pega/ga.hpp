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

// Plaintext genetic algorithm for the symmetric TSP.
//
// The operators here are also used by the encrypted engine. Randomness comes
// from four named streams (population, selection, crossover, mutation); a run
// that consumes the same streams in the same order makes the same choices.

#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "pega/random.hpp"
#include "pega/selection.hpp"
#include "pega/tsp.hpp"

namespace pega::ga {

using Chromosome = tsp::Tour;
using Population = std::vector<Chromosome>;

enum class SelectionKind { Fps, Tournament };

struct Seeds {
  std::uint64_t population = 1;
  std::uint64_t selection = 2;
  std::uint64_t crossover = 3;
  std::uint64_t mutation = 4;

  /// Four streams derived from one root seed.
  static Seeds from_root(std::uint64_t root) {
    return Seeds{derive_seed(root, 0), derive_seed(root, 1), derive_seed(root, 2), derive_seed(root, 3)};
  }
  friend bool operator==(const Seeds&, const Seeds&) = default;
};

struct GaParams {
  std::size_t n = 300;
  double crossover_rate = 0.8;
  double mutation_rate = 0.1;
  SelectionKind selection = SelectionKind::Tournament;
  std::size_t k = 2;
  std::size_t max_generations = 100;
  unsigned precision = 106;  // fixed-point scale of roulette probabilities
  Seeds seeds;

  void validate() const {
    if (n < 1) throw std::invalid_argument("population size must be positive");
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) {
      throw std::invalid_argument("crossover rate must lie in [0, 1]");
    }
    if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) {
      throw std::invalid_argument("mutation rate must lie in [0, 1]");
    }
    if (selection == SelectionKind::Tournament && n > 1) {
      if (k < 2) throw std::invalid_argument("tournament size must be at least 2");
      if (k > n) throw std::invalid_argument("tournament size exceeds population");
    }
  }
};

struct RunStats {
  std::vector<std::int64_t> best_costs;  // best so far, generation 0..t
  std::vector<double> mean_costs;        // population mean, generation 0..t
  Chromosome best_tour;
  std::int64_t best_cost = 0;
  Seeds seeds;
};

struct Streams {
  Rng population;
  Rng selection;
  Rng crossover;
  Rng mutation;

  explicit Streams(const Seeds& s)
      : population(s.population), selection(s.selection), crossover(s.crossover), mutation(s.mutation) {}
};

// ---- operators ---------------------------------------------------------------

inline Population init_population(std::uint32_t m, std::size_t n, Rng& rng) {
  Population pop;
  pop.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Chromosome c(m);
    for (std::uint32_t k = 0; k < m; ++k) c[k] = k + 1;
    shuffle(c, rng);
    pop.push_back(std::move(c));
  }
  return pop;
}

/// Roulette selection over quantized probabilities; one threshold per slot.
inline std::vector<std::size_t> fps_select(std::span<const std::int64_t> costs, std::size_t n,
                                           unsigned precision, Rng& rng) {
  if (costs.size() == 1) return std::vector<std::size_t>(n, 0);
  const auto w = selection::fps_weights(costs, precision);
  std::vector<mpz_class> prefix(w.probabilities.size());
  mpz_class run = 0;
  for (std::size_t i = 0; i < prefix.size(); ++i) prefix[i] = run += w.probabilities[i];
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t slot = 0; slot < n; ++slot) {
    const mpz_class t = selection::draw_threshold(rng, precision);
    out.push_back(selection::lower_bound_index(prefix.size(), [&](std::size_t i) { return prefix[i] < t; }));
  }
  return out;
}

inline std::vector<std::size_t> tournament_select(std::span<const std::int64_t> costs, std::size_t k,
                                                  std::size_t n, Rng& rng) {
  if (costs.size() == 1) return std::vector<std::size_t>(n, 0);
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t slot = 0; slot < n; ++slot) {
    const auto idx = selection::sample_distinct(rng, costs.size(), k);
    std::size_t best = idx.front();
    for (auto i : idx) {
      if (costs[i] < costs[best]) best = i;
    }
    out.push_back(best);
  }
  return out;
}

/// Edge recombination. Starts at p1's first city; the next city is the
/// unvisited neighbour with the fewest remaining neighbours. On the first step
/// p1's own successor wins a tie, so identical parents reproduce themselves;
/// other ties and dead ends are broken uniformly with `rng`.
inline Chromosome erx_crossover(const Chromosome& p1, const Chromosome& p2, Rng& rng) {
  const std::size_t m = p1.size();
  if (p2.size() != m) throw std::invalid_argument("parents differ in length");
  if (m < 3) return p1;

  // neighbours[c] holds at most four distinct cities.
  std::vector<std::vector<std::uint32_t>> neighbours(m + 1);
  auto link = [&](std::uint32_t a, std::uint32_t b) {
    auto& na = neighbours[a];
    if (std::find(na.begin(), na.end(), b) == na.end()) na.push_back(b);
  };
  for (const auto* parent : {&p1, &p2}) {
    for (std::size_t i = 0; i < m; ++i) {
      const auto a = (*parent)[i];
      const auto b = (*parent)[(i + 1) % m];
      link(a, b);
      link(b, a);
    }
  }

  std::vector<bool> visited(m + 1, false);
  Chromosome child;
  child.reserve(m);
  auto visit = [&](std::uint32_t c) {
    visited[c] = true;
    child.push_back(c);
    for (auto nb : neighbours[c]) {
      auto& back = neighbours[nb];
      back.erase(std::remove(back.begin(), back.end(), c), back.end());
    }
  };

  visit(p1[0]);
  std::vector<std::uint32_t> tied;
  while (child.size() < m) {
    const auto cur = child.back();
    tied.clear();
    std::size_t fewest = SIZE_MAX;
    for (auto nb : neighbours[cur]) {
      if (visited[nb]) continue;
      const auto deg = neighbours[nb].size();
      if (deg < fewest) {
        fewest = deg;
        tied.assign(1, nb);
      } else if (deg == fewest) {
        tied.push_back(nb);
      }
    }
    std::uint32_t next = 0;
    if (!tied.empty()) {
      std::sort(tied.begin(), tied.end());
      if (child.size() == 1 && std::binary_search(tied.begin(), tied.end(), p1[1])) {
        next = p1[1];
      } else if (tied.size() == 1) {
        next = tied.front();
      } else {
        next = tied[rng.uniform_below(tied.size())];
      }
    } else {
      std::vector<std::uint32_t> open;
      for (std::uint32_t c = 1; c <= m; ++c) {
        if (!visited[c]) open.push_back(c);
      }
      next = open.size() == 1 ? open.front() : open[rng.uniform_below(open.size())];
    }
    visit(next);
  }
  return child;
}

/// With probability `rate`, swap two distinct uniformly chosen positions.
/// Always consumes one uniform variate.
inline void swap_mutation(Chromosome& c, double rate, Rng& rng) {
  const double u = rng.uniform01();
  if (!(u < rate) || c.size() < 2) return;
  const auto i = rng.uniform_below(c.size());
  auto j = rng.uniform_below(c.size() - 1);
  if (j >= i) ++j;
  std::swap(c[i], c[j]);
}

/// Offspring of the selected individuals: consecutive slots are mated with
/// probability crossover_rate (two children, one per parent order), an odd
/// last individual is copied, then every child is offered to mutation.
inline Population breed(const Population& pop, std::span<const std::size_t> selected,
                        const GaParams& params, Rng& crossover_rng, Rng& mutation_rng) {
  Population next;
  next.reserve(selected.size());
  std::size_t slot = 0;
  for (; slot + 1 < selected.size(); slot += 2) {
    const auto& a = pop[selected[slot]];
    const auto& b = pop[selected[slot + 1]];
    if (crossover_rng.uniform01() < params.crossover_rate) {
      next.push_back(erx_crossover(a, b, crossover_rng));
      next.push_back(erx_crossover(b, a, crossover_rng));
    } else {
      next.push_back(a);
      next.push_back(b);
    }
  }
  if (slot < selected.size()) next.push_back(pop[selected[slot]]);
  for (auto& c : next) swap_mutation(c, params.mutation_rate, mutation_rng);
  return next;
}

/// Index of the first minimum.
inline std::size_t argmin(std::span<const std::int64_t> costs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < costs.size(); ++i) {
    if (costs[i] < costs[best]) best = i;
  }
  return best;
}

inline double mean_of(std::span<const std::int64_t> costs) {
  mpz_class sum = 0;
  for (auto c : costs) sum += mpz_class(static_cast<long>(c));
  return sum.get_d() / static_cast<double>(costs.size());
}

inline RunStats run_ga(const tsp::CostMatrix& d, const GaParams& params) {
  params.validate();
  Streams rng(params.seeds);
  RunStats stats;
  stats.seeds = params.seeds;

  Population pop = init_population(d.size(), params.n, rng.population);
  std::vector<std::int64_t> costs(params.n);

  auto evaluate = [&](std::size_t gen) {
    for (std::size_t i = 0; i < pop.size(); ++i) costs[i] = tsp::route_cost_plain(d, pop[i]);
    const auto b = argmin(costs);
    if (gen == 0 || costs[b] < stats.best_cost) {
      stats.best_cost = costs[b];
      stats.best_tour = pop[b];
    }
    stats.best_costs.push_back(stats.best_cost);
    stats.mean_costs.push_back(mean_of(costs));
  };

  evaluate(0);
  for (std::size_t gen = 1; gen <= params.max_generations; ++gen) {
    const auto selected = params.selection == SelectionKind::Fps
                              ? fps_select(costs, params.n, params.precision, rng.selection)
                              : tournament_select(costs, params.k, params.n, rng.selection);
    pop = breed(pop, selected, params, rng.crossover, rng.mutation);
    evaluate(gen);
  }
  return stats;
}

}  // namespace pega::ga
