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

// Genetic algorithm over an encrypted TSP.
//
// Three roles:
//   User  generates keys, relabels cities, encrypts the matrix, and later
//         decrypts the result. It keeps the secret key and the city map.
//   S1    holds the encrypted matrix and key share 1, runs the evolution and
//         drives every two-party protocol.
//   S2    holds key share 2 and answers protocol requests.
//
// S1 sees tours over pseudonymous city indices and the comparison bits the
// protocols reveal, never a plaintext cost. S2 sees blinded values and sums,
// never a tour.

#pragma once

#include <chrono>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "pega/channel.hpp"
#include "pega/errors.hpp"
#include "pega/ga.hpp"
#include "pega/protocols.hpp"
#include "pega/random.hpp"
#include "pega/thpc.hpp"
#include "pega/tsp.hpp"

namespace pega::engine {

using thpc::Ciphertext;

/// What S1 receives from the user.
struct S1Package {
  thpc::PublicKey pk;
  thpc::PartialKey share;
  tsp::EncryptedTsp problem;
};

/// What S2 receives from the user.
struct S2Package {
  thpc::PublicKey pk;
  thpc::PartialKey share;
};

/// What S1 hands back when the run ends.
struct EncryptedResult {
  std::vector<Ciphertext> best_costs;  // best so far, generation 0..t
  std::vector<Ciphertext> cost_sums;   // population cost total, generation 0..t
  std::size_t population = 0;
  tsp::Tour best_tour;  // pseudonymous
  Ciphertext best_cost;
  ga::Seeds seeds;
};

// ---- User --------------------------------------------------------------------

class User {
 public:
  User(tsp::CostMatrix matrix, thpc::KeyMaterial keys)
      : matrix_(std::move(matrix)), keys_(std::move(keys)) {}

  /// Relabel cities with a permutation drawn from `perm_seed`, then encrypt
  /// the relabeled matrix at `scale`.
  std::pair<S1Package, S2Package> submit(unsigned scale, std::uint64_t perm_seed,
                                         std::uint64_t encrypt_seed, bool relabel = true) {
    if (relabel) {
      Rng rng(perm_seed);
      auto [map, pseudo] = tsp::pseudonymize(matrix_, rng);
      map_ = std::move(map);
      pseudo_ = std::move(pseudo);
    } else {
      map_ = tsp::CityMap::identity(matrix_.size());
      pseudo_ = matrix_;
    }
    auto problem = tsp::encrypt_tsp(keys_.pk, pseudo_, scale, encrypt_seed);
    return {S1Package{keys_.pk, keys_.s1, std::move(problem)}, S2Package{keys_.pk, keys_.s2}};
  }

  /// Decrypt the run and translate the tour back to original city labels.
  ga::RunStats finalize(const EncryptedResult& r) const {
    ga::RunStats out;
    out.seeds = r.seeds;
    for (const auto& c : r.best_costs) out.best_costs.push_back(decrypt_integer(c));
    for (const auto& c : r.cost_sums) {
      const mpz_class sum = decrypt_mpz(c);
      out.mean_costs.push_back(sum.get_d() / static_cast<double>(r.population));
    }
    out.best_cost = decrypt_integer(r.best_cost);
    out.best_tour = map_.to_labels(r.best_tour);
    return out;
  }

  const tsp::CityMap& city_map() const noexcept { return map_; }
  /// The relabeled matrix S1's ciphertexts encrypt. Used by mirror tests.
  const tsp::CostMatrix& pseudonymous_matrix() const noexcept { return pseudo_; }
  const tsp::CostMatrix& matrix() const noexcept { return matrix_; }
  const thpc::KeyMaterial& keys() const noexcept { return keys_; }

 private:
  mpz_class decrypt_mpz(const Ciphertext& c) const {
    const auto code = thpc::dec(keys_.sk, c);
    const mpq_class v = fixedpoint::decode(code, keys_.pk.n);
    if (v.get_den() != 1) throw MalformedCiphertext("route cost is not an integer");
    return v.get_num();
  }
  std::int64_t decrypt_integer(const Ciphertext& c) const {
    const mpz_class v = decrypt_mpz(c);
    if (!v.fits_slong_p()) throw MalformedCiphertext("route cost out of range");
    return v.get_si();
  }

  tsp::CostMatrix matrix_;
  thpc::KeyMaterial keys_;
  tsp::CityMap map_;
  tsp::CostMatrix pseudo_;
};

// ---- S1 ----------------------------------------------------------------------

struct Evaluation {
  std::vector<Ciphertext> costs;
  std::size_t best = 0;
};

class S1Engine {
 public:
  S1Engine(S1Package pkg, ga::GaParams params, protocols::S1Client& client)
      : pkg_(std::move(pkg)), params_(std::move(params)), client_(client), rng_(params_.seeds) {
    params_.validate();
    if (pkg_.share.index != 1) throw std::invalid_argument("S1 must hold partial key 1");
    if (thpc::fingerprint(pkg_.pk) != pkg_.problem.pk_fingerprint) {
      throw FormatError("encrypted problem was made under a different public key");
    }
    if (pkg_.problem.scale != params_.precision) {
      throw std::invalid_argument("problem scale must equal the selection precision");
    }
    if (client_.params().precision != params_.precision) {
      throw std::invalid_argument("protocol precision must equal the selection precision");
    }
    dmax_ = pkg_.problem.cost_bound();
  }

  ga::Population gen_initial_pop() {
    return ga::init_population(pkg_.problem.m, params_.n, rng_.population);
  }

  Evaluation evaluate(const ga::Population& pop) {
    Evaluation e;
    e.costs.reserve(pop.size());
    for (const auto& t : pop) e.costs.push_back(tsp::route_cost_enc(pkg_.pk, pkg_.problem, t));
    e.best = client_.sec_argmin(e.costs, dmax_);
    return e;
  }

  std::vector<std::size_t> select(std::span<const Ciphertext> costs) {
    if (costs.size() == 1) return std::vector<std::size_t>(params_.n, 0);
    if (params_.selection == ga::SelectionKind::Fps) {
      auto pro = client_.sec_pro(costs);
      return client_.sec_fps(pro.probabilities);
    }
    return client_.sec_tournament(costs, params_.k, dmax_, rng_.selection);
  }

  ga::Population crossover_mutate(const ga::Population& pop, std::span<const std::size_t> selected) {
    return ga::breed(pop, selected, params_, rng_.crossover, rng_.mutation);
  }

  EncryptedResult run() {
    EncryptedResult out;
    out.population = params_.n;
    out.seeds = params_.seeds;

    ga::Population pop = gen_initial_pop();
    Evaluation eval;
    auto step = [&](std::size_t gen) {
      eval = evaluate(pop);
      const auto& cand = eval.costs[eval.best];
      if (gen == 0 || client_.sec_cmp(cand, out.best_cost, dmax_) == 1) {
        out.best_cost = cand;
        out.best_tour = pop[eval.best];
      }
      out.best_costs.push_back(out.best_cost);
      Ciphertext sum = thpc::identity(pkg_.problem.scale);
      for (const auto& c : eval.costs) sum = thpc::add(pkg_.pk, sum, c);
      out.cost_sums.push_back(std::move(sum));
      if (on_generation) on_generation(gen, pop);
    };

    step(0);
    for (std::size_t gen = 1; gen <= params_.max_generations; ++gen) {
      const auto selected = select(eval.costs);
      if (on_selected) on_selected(gen, selected);
      pop = crossover_mutate(pop, selected);
      step(gen);
    }
    return out;
  }

  const mpz_class& cost_bound() const noexcept { return dmax_; }
  const S1Package& package() const noexcept { return pkg_; }

  std::function<void(std::size_t, const ga::Population&)> on_generation;
  std::function<void(std::size_t, std::span<const std::size_t>)> on_selected;

 private:
  S1Package pkg_;
  ga::GaParams params_;
  protocols::S1Client& client_;
  ga::Streams rng_;
  mpz_class dmax_;
};

// ---- session -----------------------------------------------------------------

enum class Transport { InProc, Tcp };

struct SessionConfig {
  ga::GaParams ga;
  unsigned kappa = 128;  // prime size; the modulus has 2 kappa bits
  unsigned sigma = 128;
  std::uint64_t key_seed = 11;
  std::uint64_t perm_seed = 12;
  std::uint64_t encrypt_seed = 13;
  std::uint64_t s1_crypto_seed = 14;
  std::uint64_t s2_crypto_seed = 15;
  bool relabel = true;
  Transport transport = Transport::InProc;
};

struct PhaseTimes {
  double keygen = 0;
  double encrypt = 0;
  double evolve = 0;
  double finalize = 0;
};

struct SessionResult {
  ga::RunStats stats;               // original city labels
  channel::Transcript transcript;   // as seen by S1
  std::size_t problem_payload_bytes = 0;   // ciphertexts only
  std::size_t problem_container_bytes = 0; // full container file
  std::uint64_t cmp_calls = 0;
  unsigned effective_sigma = 0;
  PhaseTimes times;
  std::vector<channel::FrameType> s2_received;
};

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Runs S2 on a background thread over a channel produced by `make`.
/// join() rethrows what the thread threw.
class S2Runner {
 public:
  S2Runner(protocols::S2Helper& helper, std::function<std::unique_ptr<channel::Channel>()> make)
      : thread_([this, &helper, make = std::move(make)] {
          try {
            ch_ = make();
            helper.serve(*ch_);
          } catch (...) {
            error_ = std::current_exception();
          }
        }) {}
  ~S2Runner() {
    if (thread_.joinable()) thread_.join();
  }
  S2Runner(const S2Runner&) = delete;
  S2Runner& operator=(const S2Runner&) = delete;

  void join() {
    if (thread_.joinable()) thread_.join();
    if (error_) std::rethrow_exception(error_);
  }
  /// Valid after join().
  const channel::Channel* channel() const noexcept { return ch_.get(); }

 private:
  std::unique_ptr<channel::Channel> ch_;
  std::exception_ptr error_;
  std::thread thread_;
};

/// Key generation, submission, evolution and finalization in one call.
/// Pass `keys` to skip key generation.
inline SessionResult run_session(const tsp::CostMatrix& matrix, const SessionConfig& cfg,
                                 std::optional<thpc::KeyMaterial> keys = std::nullopt,
                                 const std::function<void(S1Engine&)>& configure = {}) {
  SessionResult res;
  auto t0 = std::chrono::steady_clock::now();
  if (!keys) {
    Rng key_rng(cfg.key_seed);
    keys = thpc::keygen(cfg.kappa, key_rng);
  }
  res.times.keygen = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  User user(matrix, std::move(*keys));
  auto [s1pkg, s2pkg] = user.submit(cfg.ga.precision, cfg.perm_seed, cfg.encrypt_seed, cfg.relabel);
  res.problem_payload_bytes = s1pkg.problem.payload_bytes();
  res.problem_container_bytes = tsp::serialize(s1pkg.problem).size();
  res.times.encrypt = seconds_since(t0);

  const protocols::ProtocolParams pp{cfg.ga.precision, cfg.sigma};
  protocols::S2Helper s2(s2pkg.pk, s2pkg.share, pp, cfg.ga.seeds.selection, cfg.s2_crypto_seed);

  std::unique_ptr<channel::Channel> s1ch;
  std::unique_ptr<S2Runner> runner;
  std::unique_ptr<channel::TcpListener> listener;
  if (cfg.transport == Transport::InProc) {
    auto [a, b] = channel::make_inproc_pair();
    s1ch = std::move(a);
    auto shared = std::make_shared<std::unique_ptr<channel::Channel>>(std::move(b));
    runner = std::make_unique<S2Runner>(s2, [shared] { return std::move(*shared); });
  } else {
    listener = std::make_unique<channel::TcpListener>(0);
    auto* l = listener.get();
    runner = std::make_unique<S2Runner>(
        s2, [l]() -> std::unique_ptr<channel::Channel> { return l->accept(channel::PartyId::S2); });
    s1ch = channel::TcpChannel::connect(channel::PartyId::S1, "127.0.0.1", listener->port());
  }

  t0 = std::chrono::steady_clock::now();
  protocols::S1Client client(s1pkg.pk, s1pkg.share, *s1ch, pp, cfg.s1_crypto_seed);
  EncryptedResult enc;
  try {
    S1Engine engine(std::move(s1pkg), cfg.ga, client);
    if (configure) configure(engine);
    enc = engine.run();
    client.shutdown();
  } catch (...) {
    s1ch->close();
    runner->join();
    throw;
  }
  runner->join();
  res.times.evolve = seconds_since(t0);
  res.transcript = s1ch->transcript();
  res.cmp_calls = client.cmp_calls();
  res.effective_sigma = client.min_effective_sigma();
  res.s2_received = s2.received();

  t0 = std::chrono::steady_clock::now();
  res.stats = user.finalize(enc);
  res.times.finalize = seconds_since(t0);
  return res;
}

/// The relabeled matrix a session with `perm_seed` encrypts. A plaintext run
/// over it with the same GA seeds replays the encrypted run.
inline tsp::CostMatrix session_matrix(const tsp::CostMatrix& matrix, std::uint64_t perm_seed,
                                      bool relabel = true) {
  if (!relabel) return matrix;
  Rng rng(perm_seed);
  return tsp::pseudonymize(matrix, rng).second;
}

}  // namespace pega::engine
