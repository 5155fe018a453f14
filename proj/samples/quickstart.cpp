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

// Solve a small random instance twice, once in the clear and once over the
// encrypted matrix, and show that both runs report the same best costs.

#include <cstdio>

#include "pega/engine.hpp"

int main() {
  using namespace pega;

  const std::uint32_t m = 12;
  Rng pts(2026);
  tsp::TspInstance inst;
  inst.name = "random12";
  inst.m = m;
  for (std::uint32_t i = 0; i < m; ++i) {
    inst.coords.emplace_back(pts.uniform01() * 1000.0, pts.uniform01() * 1000.0);
  }
  const auto matrix = tsp::build_matrix(inst);

  engine::SessionConfig cfg;
  cfg.ga.n = 16;
  cfg.ga.max_generations = 20;
  cfg.ga.selection = ga::SelectionKind::Fps;
  cfg.ga.seeds = ga::Seeds::from_root(7);
  cfg.kappa = 128;

  const auto enc = engine::run_session(matrix, cfg);
  const auto plain = ga::run_ga(engine::session_matrix(matrix, cfg.perm_seed), cfg.ga);

  std::printf("generation  encrypted  plaintext\n");
  for (std::size_t g = 0; g < enc.stats.best_costs.size(); ++g) {
    std::printf("%10zu  %9lld  %9lld\n", g, static_cast<long long>(enc.stats.best_costs[g]),
                static_cast<long long>(plain.best_costs[g]));
  }
  std::printf("best tour:");
  for (auto c : enc.stats.best_tour) std::printf(" %u", c);
  std::printf("\ncost %lld, recomputed %lld\n", static_cast<long long>(enc.stats.best_cost),
              static_cast<long long>(tsp::route_cost_plain(matrix, enc.stats.best_tour)));
  std::printf("S1<->S2 traffic: %llu bytes in %llu messages, %llu secure comparisons\n",
              static_cast<unsigned long long>(enc.transcript.total_bytes()),
              static_cast<unsigned long long>(enc.transcript.messages),
              static_cast<unsigned long long>(enc.cmp_calls));
  return enc.stats.best_costs == plain.best_costs ? 0 : 1;
}
