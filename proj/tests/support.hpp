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

// Fixtures and independent oracles shared by the unit and acceptance tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <numeric>
#include <string>
#include <vector>

#include "pega/ga.hpp"
#include "pega/protocols.hpp"
#include "pega/thpc.hpp"
#include "pega/tsp.hpp"

namespace pega::testing {

#ifndef PEGA_TEST_DATA_DIR
#define PEGA_TEST_DATA_DIR "tests/data"
#endif
#ifndef PEGA_SOURCE_DIR
#define PEGA_SOURCE_DIR "."
#endif

inline std::string data_path(const std::string& name) { return std::string(PEGA_TEST_DATA_DIR) + "/" + name; }

/// Keys are expensive at large kappa; one per (kappa, seed) per process.
inline const thpc::KeyMaterial& keys(unsigned kappa, std::uint64_t seed = 1) {
  static std::mutex mu;
  static std::map<std::pair<unsigned, std::uint64_t>, thpc::KeyMaterial> cache;
  std::lock_guard lock(mu);
  auto it = cache.find({kappa, seed});
  if (it == cache.end()) {
    Rng rng(seed);
    it = cache.emplace(std::pair{kappa, seed}, thpc::keygen(kappa, rng)).first;
  }
  return it->second;
}

/// S1 client and S2 helper joined by an in-process channel, S2 on its own thread.
struct ProtocolRig {
  ProtocolRig(const thpc::KeyMaterial& km, protocols::ProtocolParams params, std::uint64_t threshold_seed = 5,
              std::uint64_t s1_seed = 6, std::uint64_t s2_seed = 7)
      : pair(channel::make_inproc_pair()),
        s2(km.pk, km.s2, params, threshold_seed, s2_seed),
        s1(km.pk, km.s1, *pair.first, params, s1_seed),
        thread(s2, *pair.second) {}
  ~ProtocolRig() {
    try {
      s1.shutdown();
    } catch (...) {
    }
  }

  std::pair<std::unique_ptr<channel::Channel>, std::unique_ptr<channel::Channel>> pair;
  protocols::S2Helper s2;
  protocols::S1Client s1;
  protocols::S2Thread thread;
};

// ---- oracles -----------------------------------------------------------------

/// Minimum closed-tour cost by enumerating every permutation that fixes city 1.
inline std::int64_t brute_force_optimum(const tsp::CostMatrix& d) {
  std::vector<std::uint32_t> rest(d.size() - 1);
  std::iota(rest.begin(), rest.end(), 2u);
  std::int64_t best = INT64_MAX;
  do {
    std::int64_t cost = d.at(1, rest.front()) + d.at(rest.back(), 1);
    for (std::size_t i = 0; i + 1 < rest.size(); ++i) cost += d.at(rest[i], rest[i + 1]);
    best = std::min(best, cost);
  } while (std::next_permutation(rest.begin(), rest.end()));
  return best;
}

/// Tour cost computed straight from coordinates or weights, bypassing CostMatrix.
inline std::int64_t naive_tour_cost(const tsp::TspInstance& inst, const tsp::Tour& tour) {
  std::int64_t total = 0;
  for (std::size_t k = 0; k < tour.size(); ++k) {
    const auto a = tour[k] - 1;
    const auto b = tour[(k + 1) % tour.size()] - 1;
    if (inst.kind == tsp::WeightKind::Euc2D) {
      const double dx = inst.coords[a].first - inst.coords[b].first;
      const double dy = inst.coords[a].second - inst.coords[b].second;
      total += static_cast<std::int64_t>(std::sqrt(dx * dx + dy * dy) + 0.5);
    } else {
      total += inst.weights[static_cast<std::size_t>(a) * inst.m + b];
    }
  }
  return total;
}

/// Exact two-sided rank-sum p-value by enumerating every split of the pooled
/// midranks. Feasible for n1 + n2 <= 24 or so.
inline double exact_rank_sum_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = pooled.size();
  const std::size_t n1 = a.size();
  // midranks
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return pooled[x] < pooled[y]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = (i + j + 2) / 2.0;
    i = j + 1;
  }
  // Work in doubled ranks so midranks stay integral.
  std::vector<int> r2(n);
  int total = 0;
  for (std::size_t i = 0; i < n; ++i) total += r2[i] = static_cast<int>(std::lround(2 * rank[i]));
  int observed = 0;
  for (std::size_t i = 0; i < n1; ++i) observed += r2[i];
  // counts[k][s]: subsets of size k with doubled rank sum s
  std::vector<std::vector<double>> counts(n1 + 1, std::vector<double>(total + 1, 0.0));
  counts[0][0] = 1;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = std::min(i + 1, n1); k >= 1; --k) {
      for (int s = total; s >= r2[i]; --s) counts[k][s] += counts[k - 1][s - r2[i]];
    }
  }
  double all = 0;
  for (double c : counts[n1]) all += c;
  const double mean2 = static_cast<double>(n1) * (n + 1);  // doubled expectation
  const double dev = std::abs(observed - mean2);
  double extreme = 0;
  for (int s = 0; s <= total; ++s) {
    if (std::abs(s - mean2) >= dev - 1e-9) extreme += counts[n1][s];
  }
  return std::min(1.0, extreme / all);
}

/// Pearson chi-square statistic of observed counts against expected probabilities.
inline double chi_square(const std::vector<std::size_t>& observed, const std::vector<double>& p) {
  double total = 0;
  for (auto o : observed) total += static_cast<double>(o);
  double chi = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = total * p[i];
    chi += (observed[i] - e) * (observed[i] - e) / e;
  }
  return chi;
}

/// Upper 1% points of the chi-square distribution.
inline double chi_square_critical_001(std::size_t df) {
  switch (df) {
    case 1: return 6.6349;
    case 3: return 11.3449;
    case 5: return 15.0863;
    default: throw std::invalid_argument("no tabulated critical value");
  }
}

/// Random symmetric instance with uniform points on a square.
inline tsp::TspInstance random_euclidean(std::uint32_t m, std::uint64_t seed, double side = 1000.0) {
  Rng rng(seed);
  tsp::TspInstance inst;
  inst.name = "random" + std::to_string(m);
  inst.m = m;
  inst.kind = tsp::WeightKind::Euc2D;
  for (std::uint32_t i = 0; i < m; ++i) inst.coords.emplace_back(rng.uniform01() * side, rng.uniform01() * side);
  return inst;
}

}  // namespace pega::testing
