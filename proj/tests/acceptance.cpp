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

// Acceptance suite. Prints one PASS/FAIL line per criterion followed by a
// summary. Exits 0 once every criterion has been evaluated; set
// PEGA_ACCEPTANCE_STRICT=1 to exit 1 when any criterion fails.
//
// Real TSPLIB files are looked up in $PEGA_TSPLIB_DIR and data/tsplib/. When
// absent, the random stand-ins in data/surrogate/ are used and the output says
// so.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "pega/engine.hpp"
#include "support.hpp"

namespace {

using namespace pega;
namespace fp = pega::fixedpoint;
using Clock = std::chrono::steady_clock;

constexpr unsigned kL = 106;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void note(const std::string& s) {
  std::printf("    %s\n", s.c_str());
  std::fflush(stdout);
}

struct Instance {
  tsp::TspInstance inst;
  bool real = false;
  std::string path;
};

Instance instance(const std::string& name) {
  std::vector<std::filesystem::path> dirs;
  if (const char* env = std::getenv("PEGA_TSPLIB_DIR")) dirs.emplace_back(env);
  dirs.emplace_back(std::filesystem::path(PEGA_SOURCE_DIR) / "data" / "tsplib");
  for (const auto& d : dirs) {
    const auto p = d / (name + ".tsp");
    if (std::filesystem::exists(p)) return {tsp::load_tsplib(p.string()), true, p.string()};
  }
  const auto p = std::filesystem::path(PEGA_SOURCE_DIR) / "data" / "surrogate" / (name + "-surrogate.tsp");
  return {tsp::load_tsplib(p.string()), false, p.string()};
}

std::string origin(const Instance& i) { return i.real ? "real " + i.inst.name : i.inst.name + " (random stand-in)"; }

thpc::Ciphertext enc_raw(const thpc::KeyMaterial& km, const mpz_class& raw, unsigned scale, Rng& rng) {
  return thpc::enc_raw(km.pk, raw, scale, rng);
}

mpq_class value(const thpc::KeyMaterial& km, const thpc::Ciphertext& c) {
  return fp::decode(thpc::dec(km.sk, c), km.pk.n);
}

mpz_class signed_bits(Rng& rng, unsigned bits) {
  mpz_class v = rng.random_bits(bits);
  return rng.coin() ? mpz_class(-v) : v;
}

// ---- 1 ----------------------------------------------------------------------

Outcome crypto_correctness() {
  const auto t0 = Clock::now();
  std::size_t bad = 0, total = 0;
  for (unsigned kappa : {32u, 128u}) {
    const auto& km = testing::keys(kappa, 101);
    Rng rng(kappa);
    for (int i = 0; i < 1000; ++i) {
      const mpz_class m = rng.random_below(km.pk.n);
      const auto c = thpc::enc_raw(km.pk, m, 0, rng);
      bad += thpc::dec(km.sk, c).raw != m;
      bad += thpc::tdec(km.pk, thpc::pdec(km.s1, c), thpc::pdec(km.s2, c)).raw != m;
      const mpz_class a = rng.random_below(km.pk.n);
      const mpz_class k = rng.random_below(km.pk.n);
      const auto ca = thpc::enc_raw(km.pk, a, 0, rng);
      bad += thpc::dec(km.sk, thpc::add(km.pk, c, ca)).raw != fp::to_ring(m + a, km.pk.n);
      bad += thpc::dec(km.sk, thpc::sub(km.pk, c, ca)).raw != fp::to_ring(m - a, km.pk.n);
      bad += thpc::dec(km.sk, thpc::scalar_mul(km.pk, c, k)).raw != fp::to_ring(m * k, km.pk.n);
      total += 5;
    }
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {bad == 0 && secs < 60, fmt("%zu/%zu checks exact, %.1f s (limit 60 s)", total - bad, total, secs)};
}

// ---- 2 ----------------------------------------------------------------------

Outcome seccmp_equivalence() {
  const auto t0 = Clock::now();
  std::size_t bad = 0, total = 0;
  {
    const auto& km = testing::keys(32, 102);
    testing::ProtocolRig rig(km, {0, 128});
    Rng rng(2);
    std::vector<thpc::Ciphertext> cts;
    for (long v = -100; v <= 100; ++v) cts.push_back(enc_raw(km, v, 0, rng));
    for (int pi : {0, 1}) {
      rig.s1.force_pi = pi;
      for (long x = -100; x <= 100; ++x) {
        for (long y = -100; y <= 100; ++y) {
          bad += rig.s1.sec_cmp(cts[x + 100], cts[y + 100], 200) != (x < y ? 1 : 0);
          ++total;
        }
      }
    }
  }
  const double small_secs = std::chrono::duration<double>(Clock::now() - t0).count();
  note(fmt("exhaustive [-100,100]^2, both branches, 64-bit modulus: %zu/%zu agree, %.1f s", total - bad, total,
           small_secs));

  const auto t1 = Clock::now();
  Rng key_rng(2048);
  const auto km = thpc::keygen(1024, key_rng);
  const double keygen_secs = std::chrono::duration<double>(Clock::now() - t1).count();
  std::size_t bad2 = 0;
  double cmp_secs = 0;
  const std::size_t pairs = 10000;
  {
    testing::ProtocolRig rig(km, {kL, 128});
    Rng rng(3);
    const mpz_class dmax = fp::pow2(128);
    // Inputs come from a pool of fresh encryptions; every value appears under
    // two ciphertexts so equal pairs also compare distinct ciphertexts.
    std::vector<mpz_class> xs;
    std::vector<thpc::Ciphertext> cts;
    for (int i = 0; i < 128; ++i) {
      const mpz_class v = signed_bits(rng, 126);
      for (int twice = 0; twice < 2; ++twice) {
        xs.push_back(v);
        cts.push_back(enc_raw(km, v, kL, rng));
      }
    }
    const auto t2 = Clock::now();
    for (std::size_t i = 0; i < pairs; ++i) {
      const std::size_t a = rng.uniform_below(xs.size());
      const std::size_t b = i % 10 == 0 ? (a ^ 1) : rng.uniform_below(xs.size());
      rig.s1.force_pi = static_cast<int>(i % 2);
      bad2 += rig.s1.sec_cmp(cts[a], cts[b], dmax) != (xs[a] < xs[b] ? 1 : 0);
    }
    cmp_secs = std::chrono::duration<double>(Clock::now() - t2).count();
  }
  const double big_secs = std::chrono::duration<double>(Clock::now() - t1).count();
  note(fmt("2048-bit modulus, scale %u: %zu/%zu agree, keygen %.1f s, total %.1f s, %.1f ms per comparison", kL,
           pairs - bad2, pairs, keygen_secs, big_secs, 1000 * cmp_secs / pairs));
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {bad == 0 && bad2 == 0 && secs < 300,
          fmt("%zu mismatches, %.1f s (limit 300 s)", bad + bad2, secs)};
}

// ---- 3 ----------------------------------------------------------------------

Outcome secdiv_accuracy() {
  const auto& km = testing::keys(128, 103);
  testing::ProtocolRig rig(km, {kL, 128});
  Rng rng(4);
  std::size_t bad = 0;
  const std::size_t trials = 10000;
  mpq_class worst = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    const mpz_class xr = signed_bits(rng, 140);
    mpz_class yr = rng.random_between(fp::pow2(100), fp::pow2(130));
    if (rng.coin()) yr = -yr;
    const mpq_class x(xr, fp::pow2(kL));
    const mpq_class y(yr, fp::pow2(kL));
    const mpq_class got = value(km, rig.s1.sec_div(enc_raw(km, xr, kL, rng), enc_raw(km, yr, kL, rng)));
    mpq_class q = x / y;
    q.canonicalize();
    const mpq_class err = abs(got - q);
    const mpq_class bound = abs(x) * mpq_class(fp::pow2(1), fp::pow2(kL));
    if (bound > 0) worst = std::max(worst, mpq_class(err / bound));
    bad += err > bound;
  }
  return {bad == 0, fmt("%zu/%zu within |x| 2^(1-%u), worst error/bound %.3f", trials - bad, trials, kL,
                        worst.get_d())};
}

// ---- 4 ----------------------------------------------------------------------

Outcome secpro_secfps() {
  const auto& km = testing::keys(128, 104);
  testing::ProtocolRig rig(km, {kL, 128});
  Rng rng(5);
  std::size_t bad_vectors = 0;
  for (int v = 0; v < 1000; ++v) {
    const std::size_t n = 2 + rng.uniform_below(15);
    std::vector<long> costs(n);
    std::vector<thpc::Ciphertext> cts;
    for (auto& c : costs) {
      c = 1 + static_cast<long>(rng.uniform_below(10000));
      cts.push_back(enc_raw(km, mpz_class(c) << kL, kL, rng));
    }
    const auto pro = rig.s1.sec_pro(cts);
    std::vector<mpq_class> p;
    for (const auto& c : pro.probabilities) p.push_back(value(km, c));
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (costs[i] < costs[j] && !(p[i] > p[j])) ok = false;
      }
    }
    bad_vectors += !ok;
  }
  note(fmt("ordering: %zu/1000 cost vectors inverted exactly", 1000 - bad_vectors));

  const std::vector<double> probs{0.1, 0.2, 0.3, 0.4};
  std::vector<thpc::Ciphertext> cts;
  for (int i = 1; i <= 4; ++i) cts.push_back(thpc::enc(km.pk, fp::encode(mpq_class(i, 10), 2 * kL, km.pk.n), rng));
  std::vector<std::size_t> counts(4, 0);
  for (int round = 0; round < 2500; ++round) {
    for (auto i : rig.s1.sec_fps(cts)) ++counts[i];
  }
  const double chi = testing::chi_square(counts, probs);
  const double crit = testing::chi_square_critical_001(3);
  note(fmt("SecFPS 10000 draws: counts %zu %zu %zu %zu, chi-square %.3f (critical %.4f)", counts[0], counts[1],
           counts[2], counts[3], chi, crit));
  return {bad_vectors == 0 && chi < crit, fmt("%zu ordering violations, chi-square %.3f < %.4f", bad_vectors, chi,
                                              crit)};
}

// ---- 5 ----------------------------------------------------------------------

engine::SessionConfig session(ga::SelectionKind sel, std::size_t n, std::size_t gens, std::uint64_t seed) {
  engine::SessionConfig cfg;
  cfg.ga.n = n;
  cfg.ga.max_generations = gens;
  cfg.ga.selection = sel;
  cfg.ga.seeds = ga::Seeds::from_root(seed);
  cfg.perm_seed = derive_seed(seed, 4);
  cfg.encrypt_seed = derive_seed(seed, 6);
  cfg.s1_crypto_seed = derive_seed(seed, 7);
  cfg.s2_crypto_seed = derive_seed(seed, 8);
  return cfg;
}

Outcome mirror() {
  const auto t0 = Clock::now();
  const auto gr48 = instance("gr48");
  struct Case {
    std::string name;
    tsp::CostMatrix d;
  };
  std::vector<Case> cases{{"random20", tsp::build_matrix(testing::random_euclidean(20, 2020))},
                          {origin(gr48), tsp::build_matrix(gr48.inst)}};
  bool all = true;
  for (const auto& c : cases) {
    for (auto sel : {ga::SelectionKind::Fps, ga::SelectionKind::Tournament}) {
      const auto cfg = session(sel, 30, 50, 55);
      const auto enc = engine::run_session(c.d, cfg, testing::keys(128, 105));
      const auto plain = ga::run_ga(engine::session_matrix(c.d, cfg.perm_seed), cfg.ga);
      const bool same = enc.stats.best_costs == plain.best_costs;
      all = all && same;
      note(fmt("%s %s vs %s: %s, best %lld -> %lld, %.1f s", c.name.c_str(),
               sel == ga::SelectionKind::Fps ? "PEGA1" : "PEGA2", sel == ga::SelectionKind::Fps ? "GA1" : "GA2",
               same ? "identical" : "DIFFERENT", static_cast<long long>(enc.stats.best_costs.front()),
               static_cast<long long>(enc.stats.best_cost), enc.times.evolve));
    }
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {all && secs < 600, fmt("4 series pairs %s, %.1f s (limit 600 s)", all ? "identical" : "differ", secs)};
}

// ---- 6 ----------------------------------------------------------------------

Outcome convergence() {
  const auto gr48 = instance("gr48");
  const auto d = tsp::build_matrix(gr48.inst);
  double total = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ga::GaParams p;
    p.n = 100;
    p.max_generations = 2000;
    p.selection = ga::SelectionKind::Tournament;
    p.seeds = ga::Seeds::from_root(seed);
    total += static_cast<double>(ga::run_ga(d, p).best_cost);
  }
  const double mean = total / 10;
  const bool plain_ok = gr48.real && mean <= 6400;
  note(fmt("GA2 on %s, n=100, 2000 generations, 10 seeds: mean final best %.1f (bound 6400%s)",
           origin(gr48).c_str(), mean, gr48.real ? "" : "; the bound refers to the real gr48 and is not judged"));

  bool pega_ok = true;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto res = engine::run_session(d, session(ga::SelectionKind::Tournament, 30, 200, seed),
                                         testing::keys(128, 106));
    const auto& b = res.stats.best_costs;
    bool monotone = true;
    for (std::size_t g = 1; g < b.size(); ++g) monotone = monotone && b[g] <= b[g - 1];
    const double drop = 1.0 - static_cast<double>(b.back()) / static_cast<double>(b.front());
    const bool ok = monotone && drop >= 0.25;
    pega_ok = pega_ok && ok;
    note(fmt("PEGA2 seed %llu: %lld -> %lld (%.1f%% lower), non-increasing %s", static_cast<unsigned long long>(seed),
             static_cast<long long>(b.front()), static_cast<long long>(b.back()), 100 * drop,
             monotone ? "yes" : "no"));
  }
  std::string detail = fmt("plain mean %.1f %s; PEGA2 runs %s", mean,
                           gr48.real ? (plain_ok ? "<= 6400" : "> 6400") : "(real gr48 unavailable)",
                           pega_ok ? "converge" : "fail to converge");
  return {plain_ok && pega_ok, detail};
}

// ---- 7 ----------------------------------------------------------------------

Outcome exhaustive_optimum() {
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto d = tsp::build_matrix(testing::random_euclidean(6, 7000 + seed));
    const auto opt = testing::brute_force_optimum(d);
    const auto res = engine::run_session(d, session(ga::SelectionKind::Tournament, 20, 200, seed),
                                         testing::keys(128, 107));
    hits += res.stats.best_cost == opt;
  }
  return {hits >= 25, fmt("optimum reached in %d/30 seeds (need 25)", hits)};
}

// ---- 8 ----------------------------------------------------------------------

Outcome communication() {
  const auto& km = testing::keys(128, 108);
  std::vector<std::pair<double, double>> points;  // (m, payload bytes)
  bool in_range = false;
  for (const char* name : {"gr48", "kroA100", "kroB200"}) {
    const auto inst = instance(name);
    const auto d = tsp::build_matrix(inst.inst);
    const auto enc = tsp::encrypt_tsp(km.pk, d, kL, 9);
    const auto payload = enc.payload_bytes();
    const auto container = tsp::serialize(enc).size();
    points.emplace_back(d.size(), static_cast<double>(payload));
    note(fmt("%s: m=%zu, %zu ciphertexts, payload %zu B (%.1f KB), container %zu B", origin(inst).c_str(), d.size(),
             d.entries().size(), payload, payload / 1000.0, container));
    if (std::string(name) == "gr48") in_range = payload >= 70000 && payload <= 400000;
  }
  bool quadratic = true;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double slope = std::log(points[i + 1].second / points[i].second) / std::log(points[i + 1].first / points[i].first);
    const double m0 = points[i].first, m1 = points[i + 1].first;
    const double pair_ratio = m1 * (m1 - 1) / (m0 * (m0 - 1));
    const double ratio = points[i + 1].second / points[i].second;
    note(fmt("m %.0f -> %.0f: size ratio %.3f, pair ratio %.3f, log-log slope %.3f", m0, m1, ratio, pair_ratio,
             slope));
    quadratic = quadratic && std::abs(ratio / pair_ratio - 1) < 0.02;
  }
  return {in_range && quadratic, fmt("gr48 payload %.1f KB %s [70, 400] KB; growth %s", points[0].second / 1000,
                                     in_range ? "within" : "outside", quadratic ? "tracks m(m-1)/2" : "not quadratic")};
}

// ---- 9 ----------------------------------------------------------------------

Outcome selection_complexity() {
  const auto& km = testing::keys(128, 109);
  const auto d = tsp::build_matrix(testing::random_euclidean(20, 909));
  bool ok = true;
  std::string detail;
  for (std::size_t n : {16u, 64u, 256u}) {
    ga::GaParams p;
    p.n = n;
    p.max_generations = 2;
    p.selection = ga::SelectionKind::Fps;
    p.seeds = ga::Seeds::from_root(n);
    engine::User user(d, km);
    auto [s1pkg, s2pkg] = user.submit(kL, 1, 2);
    auto [a, b] = channel::make_inproc_pair();
    const protocols::ProtocolParams pp{kL, 128};
    protocols::S2Helper s2(s2pkg.pk, s2pkg.share, pp, p.seeds.selection, 3);
    protocols::S2Thread thread(s2, *b);
    protocols::S1Client client(s1pkg.pk, s1pkg.share, *a, pp, 4);
    engine::S1Engine eng(s1pkg, p, client);
    std::uint64_t prev = 0, worst = 0;
    eng.on_generation = [&](std::size_t gen, const ga::Population&) {
      if (gen > 0) worst = std::max(worst, client.cmp_calls() - prev);
      prev = client.cmp_calls();
    };
    eng.run();
    client.shutdown();
    thread.join();
    const auto logn = static_cast<std::uint64_t>(std::ceil(std::log2(static_cast<double>(n))));
    const std::uint64_t bound = n * (logn + 1);
    ok = ok && worst <= bound;
    note(fmt("n=%zu: %llu comparisons per generation (bound %llu)", n, static_cast<unsigned long long>(worst),
             static_cast<unsigned long long>(bound)));
    detail += fmt("%sn=%zu %llu<=%llu", detail.empty() ? "" : ", ", n, static_cast<unsigned long long>(worst),
                  static_cast<unsigned long long>(bound));
  }
  return {ok, detail};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "crypto correctness", crypto_correctness},
      {2, "SecCmp equals plaintext comparison", seccmp_equivalence},
      {3, "SecDiv accuracy", secdiv_accuracy},
      {4, "SecPro ordering and SecFPS frequencies", secpro_secfps},
      {5, "seed-matched encrypted/plaintext mirror", mirror},
      {6, "convergence sanity", convergence},
      {7, "exhaustive optimum on 6 cities", exhaustive_optimum},
      {8, "communication metering", communication},
      {9, "selection comparisons per generation", selection_complexity},
  };
  int passed = 0;
  for (const auto& c : criteria) {
    std::printf("[%d] %s\n", c.id, c.title);
    std::fflush(stdout);
    const auto t0 = Clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("%s %d %s: %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", c.id, c.title, out.detail.c_str(), secs);
    std::fflush(stdout);
    passed += out.pass;
  }
  const int total = static_cast<int>(criteria.size());
  std::printf("SUMMARY %d/%d criteria passed\n", passed, total);
  const char* strict = std::getenv("PEGA_ACCEPTANCE_STRICT");
  if (strict && std::string(strict) != "0" && passed != total) return 1;
  return 0;
}
