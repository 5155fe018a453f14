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

// Command implementations behind the `pega` tool. Argument parsing lives in
// tools/pega.cpp; everything here takes a filled options struct.

#pragma once

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "pega/engine.hpp"
#include "pega/ga.hpp"
#include "pega/stats.hpp"
#include "pega/thpc.hpp"
#include "pega/tsp.hpp"

namespace pega::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

inline Bytes read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline void write_bytes(const std::string& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error("write failed: " + path);
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed: " + path);
}

inline thpc::KeyMaterial load_keys(const std::string& prefix) {
  thpc::KeyMaterial keys{thpc::parse_public_key(read_bytes(prefix + ".pk")),
                         thpc::parse_secret_key(read_bytes(prefix + ".sk")),
                         thpc::parse_partial_key(read_bytes(prefix + ".s1")),
                         thpc::parse_partial_key(read_bytes(prefix + ".s2"))};
  if (keys.sk.n != keys.pk.n || keys.s1.n != keys.pk.n || keys.s2.n != keys.pk.n) {
    throw FormatError("key files belong to different moduli");
  }
  if (keys.s1.index != 1 || keys.s2.index != 2) throw FormatError("partial key files are swapped");
  return keys;
}

// ---- keygen ------------------------------------------------------------------

struct KeygenOptions {
  unsigned bits = 256;  // modulus size
  std::uint64_t seed = 1;
  std::string out = "pega";
};

inline int cmd_keygen(const KeygenOptions& o, std::ostream& log) {
  if (o.bits < 16 || o.bits % 2 != 0) throw std::invalid_argument("--bits must be even and at least 16");
  Rng rng(o.seed);
  const auto keys = thpc::keygen(o.bits / 2, rng);
  write_bytes(o.out + ".pk", thpc::serialize(keys.pk));
  write_bytes(o.out + ".sk", thpc::serialize(keys.sk));
  write_bytes(o.out + ".s1", thpc::serialize(keys.s1));
  write_bytes(o.out + ".s2", thpc::serialize(keys.s2));
  char fp[32];
  std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(thpc::fingerprint(keys.pk)));
  log << "modulus_bits=" << keys.pk.modulus_bits() << " fingerprint=" << fp << "\n";
  return kExitOk;
}

// ---- encrypt -----------------------------------------------------------------

struct EncryptOptions {
  std::string tsp;
  std::string pk;
  unsigned scale = 106;
  std::uint64_t perm_seed = 1;
  std::uint64_t seed = 1;
  std::string out = "problem";
};

inline int cmd_encrypt(const EncryptOptions& o, std::ostream& log) {
  const auto inst = tsp::load_tsplib(o.tsp);
  const auto matrix = tsp::build_matrix(inst);
  const auto pk = thpc::parse_public_key(read_bytes(o.pk));
  Rng rng(o.perm_seed);
  auto [map, pseudo] = tsp::pseudonymize(matrix, rng);
  const auto enc = tsp::encrypt_tsp(pk, pseudo, o.scale, o.seed);
  const auto container = tsp::serialize(enc);
  write_bytes(o.out + ".etsp", container);
  write_bytes(o.out + ".cmap", tsp::serialize(map));
  log << "cities=" << enc.m << " ciphertext_bytes=" << enc.payload_bytes()
      << " container_bytes=" << container.size() << "\n";
  return kExitOk;
}

// ---- solve -------------------------------------------------------------------

struct SolveOptions {
  std::string tsp;
  std::string mode = "plain";         // plain | pega
  std::string selection = "tournament";  // fps | tournament
  std::size_t k = 2;
  std::size_t pop = 30;
  std::size_t gens = 50;
  double crossover_rate = 0.8;
  double mutation_rate = 0.1;
  unsigned precision = 106;
  unsigned sigma = 128;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> population_seed, selection_seed, crossover_seed, mutation_seed;
  std::optional<std::uint64_t> perm_seed, key_seed, encrypt_seed, s1_seed, s2_seed;
  bool relabel = true;
  unsigned key_bits = 256;
  std::string keys;  // key file prefix; generated when empty
  std::string transport = "inproc";  // inproc | tcp
  std::string csv;     // stdout when empty
  std::string record;  // JSON run record
};

struct SolveResult {
  ga::RunStats stats;  // original labels
  std::string csv;
  nlohmann::json record;
};

inline std::string format_mean(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

inline std::string render_csv(const ga::RunStats& s) {
  std::ostringstream out;
  out << "generation,best_cost,mean_cost\n";
  for (std::size_t g = 0; g < s.best_costs.size(); ++g) {
    out << g << "," << s.best_costs[g] << "," << format_mean(s.mean_costs[g]) << "\n";
  }
  out << "tour," << s.best_cost << ",";
  for (std::size_t i = 0; i < s.best_tour.size(); ++i) out << (i ? " " : "") << s.best_tour[i];
  out << "\n";
  return out.str();
}

inline SolveResult run_solve(const SolveOptions& o) {
  if (o.mode != "plain" && o.mode != "pega") throw std::invalid_argument("--mode must be plain or pega");
  if (o.selection != "fps" && o.selection != "tournament") {
    throw std::invalid_argument("--selection must be fps or tournament");
  }
  if (o.transport != "inproc" && o.transport != "tcp") {
    throw std::invalid_argument("--transport must be inproc or tcp");
  }
  const auto inst = tsp::load_tsplib(o.tsp);
  const auto matrix = tsp::build_matrix(inst);

  ga::GaParams p;
  p.n = o.pop;
  p.crossover_rate = o.crossover_rate;
  p.mutation_rate = o.mutation_rate;
  p.selection = o.selection == "fps" ? ga::SelectionKind::Fps : ga::SelectionKind::Tournament;
  p.k = o.k;
  p.max_generations = o.gens;
  p.precision = o.precision;
  p.seeds = ga::Seeds::from_root(o.seed);
  if (o.population_seed) p.seeds.population = *o.population_seed;
  if (o.selection_seed) p.seeds.selection = *o.selection_seed;
  if (o.crossover_seed) p.seeds.crossover = *o.crossover_seed;
  if (o.mutation_seed) p.seeds.mutation = *o.mutation_seed;
  p.validate();

  engine::SessionConfig cfg;
  cfg.ga = p;
  cfg.kappa = o.key_bits / 2;
  cfg.sigma = o.sigma;
  cfg.perm_seed = o.perm_seed.value_or(derive_seed(o.seed, 4));
  cfg.key_seed = o.key_seed.value_or(derive_seed(o.seed, 5));
  cfg.encrypt_seed = o.encrypt_seed.value_or(derive_seed(o.seed, 6));
  cfg.s1_crypto_seed = o.s1_seed.value_or(derive_seed(o.seed, 7));
  cfg.s2_crypto_seed = o.s2_seed.value_or(derive_seed(o.seed, 8));
  cfg.relabel = o.relabel;
  cfg.transport = o.transport == "tcp" ? engine::Transport::Tcp : engine::Transport::InProc;

  const bool fps = p.selection == ga::SelectionKind::Fps;
  std::string tag = o.mode == "pega" ? (fps ? "PEGA1" : "PEGA2") : (fps ? "GA1" : "GA2");

  SolveResult res;
  nlohmann::json rec;
  rec["algorithm"] = tag;
  rec["instance"] = inst.name;
  rec["cities"] = matrix.size();
  rec["params"] = {{"population", p.n},
                   {"generations", p.max_generations},
                   {"crossover_rate", p.crossover_rate},
                   {"mutation_rate", p.mutation_rate},
                   {"selection", o.selection},
                   {"k", p.k},
                   {"precision", p.precision}};
  rec["seeds"] = {{"root", o.seed},
                  {"population", p.seeds.population},
                  {"selection", p.seeds.selection},
                  {"crossover", p.seeds.crossover},
                  {"mutation", p.seeds.mutation},
                  {"perm", cfg.perm_seed}};

  if (o.mode == "plain") {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(cfg.perm_seed);
    tsp::CityMap map = tsp::CityMap::identity(matrix.size());
    tsp::CostMatrix work = matrix;
    if (cfg.relabel) std::tie(map, work) = tsp::pseudonymize(matrix, rng);
    res.stats = ga::run_ga(work, p);
    res.stats.best_tour = map.to_labels(res.stats.best_tour);
    rec["times"] = {{"evolve", engine::seconds_since(t0)}};
  } else {
    std::optional<thpc::KeyMaterial> keys;
    if (!o.keys.empty()) keys = load_keys(o.keys);
    auto sess = engine::run_session(matrix, cfg, std::move(keys));
    res.stats = std::move(sess.stats);
    rec["times"] = {{"keygen", sess.times.keygen},
                    {"encrypt", sess.times.encrypt},
                    {"evolve", sess.times.evolve},
                    {"finalize", sess.times.finalize}};
    rec["transcript"] = {{"messages", sess.transcript.messages},
                         {"bytes_s1_to_s2", sess.transcript.bytes_s1_to_s2},
                         {"bytes_s2_to_s1", sess.transcript.bytes_s2_to_s1},
                         {"rounds", sess.transcript.rounds},
                         {"digest", sess.transcript.digest}};
    rec["problem_bytes"] = {{"ciphertexts", sess.problem_payload_bytes},
                            {"container", sess.problem_container_bytes}};
    rec["secure_comparisons"] = sess.cmp_calls;
    rec["effective_sigma"] = sess.effective_sigma;
    rec["transport"] = o.transport;
  }
  rec["best_costs"] = res.stats.best_costs;
  rec["best_cost"] = res.stats.best_cost;
  rec["best_tour"] = res.stats.best_tour;
  res.record = std::move(rec);
  res.csv = render_csv(res.stats);
  return res;
}

inline int cmd_solve(const SolveOptions& o, std::ostream& out) {
  auto res = run_solve(o);
  if (o.csv.empty() || o.csv == "-") {
    out << res.csv;
  } else {
    write_text(o.csv, res.csv);
  }
  if (!o.record.empty()) write_text(o.record, res.record.dump(2) + "\n");
  return kExitOk;
}

// ---- bench -------------------------------------------------------------------

struct BenchOptions {
  std::vector<std::string> instances;
  std::size_t repeat = 1;
  unsigned key_bits = 256;
  unsigned precision = 106;
  std::size_t gens = 0;  // 0: encryption only
  std::size_t pop = 10;
  std::string selection = "tournament";
  std::size_t jobs = 1;
  std::uint64_t seed = 1;
};

struct BenchRow {
  std::string instance;
  std::uint32_t m = 0;
  std::size_t run = 0;
  std::size_t ciphertext_bytes = 0;
  std::size_t container_bytes = 0;
  double keygen_s = 0;
  double encrypt_s = 0;
  double evolve_s = 0;
  std::uint64_t transcript_bytes = 0;
  std::uint64_t messages = 0;
  std::uint64_t rounds = 0;
};

inline BenchRow bench_one(const std::string& path, std::size_t run, const BenchOptions& o) {
  const auto inst = tsp::load_tsplib(path);
  const auto matrix = tsp::build_matrix(inst);
  engine::SessionConfig cfg;
  cfg.ga.n = o.pop;
  cfg.ga.max_generations = o.gens;
  cfg.ga.precision = o.precision;
  cfg.ga.selection = o.selection == "fps" ? ga::SelectionKind::Fps : ga::SelectionKind::Tournament;
  const auto root = derive_seed(o.seed, run);
  cfg.ga.seeds = ga::Seeds::from_root(root);
  cfg.kappa = o.key_bits / 2;
  cfg.key_seed = derive_seed(root, 5);
  cfg.perm_seed = derive_seed(root, 4);
  cfg.encrypt_seed = derive_seed(root, 6);
  BenchRow row;
  row.instance = inst.name.empty() ? path : inst.name;
  row.m = matrix.size();
  row.run = run;
  if (o.gens == 0) {
    auto t0 = std::chrono::steady_clock::now();
    Rng key_rng(cfg.key_seed);
    auto keys = thpc::keygen(cfg.kappa, key_rng);
    row.keygen_s = engine::seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    engine::User user(matrix, std::move(keys));
    auto pkgs = user.submit(cfg.ga.precision, cfg.perm_seed, cfg.encrypt_seed);
    row.encrypt_s = engine::seconds_since(t0);
    row.ciphertext_bytes = pkgs.first.problem.payload_bytes();
    row.container_bytes = tsp::serialize(pkgs.first.problem).size();
    return row;
  }
  auto sess = engine::run_session(matrix, cfg);
  row.ciphertext_bytes = sess.problem_payload_bytes;
  row.container_bytes = sess.problem_container_bytes;
  row.keygen_s = sess.times.keygen;
  row.encrypt_s = sess.times.encrypt;
  row.evolve_s = sess.times.evolve;
  row.transcript_bytes = sess.transcript.total_bytes();
  row.messages = sess.transcript.messages;
  row.rounds = sess.transcript.rounds;
  return row;
}

inline std::vector<BenchRow> run_bench(const BenchOptions& o) {
  if (o.instances.empty()) throw std::invalid_argument("--instances needs at least one file");
  if (o.jobs < 1) throw std::invalid_argument("--jobs must be positive");
  struct Task {
    std::string path;
    std::size_t run;
  };
  std::vector<Task> tasks;
  for (const auto& path : o.instances)
    for (std::size_t r = 0; r < o.repeat; ++r) tasks.push_back({path, r});

  std::vector<BenchRow> rows(tasks.size());
  for (std::size_t start = 0; start < tasks.size(); start += o.jobs) {
    std::vector<std::future<BenchRow>> batch;
    const auto end = std::min(tasks.size(), start + o.jobs);
    for (std::size_t i = start; i < end; ++i) {
      batch.push_back(std::async(std::launch::async, bench_one, tasks[i].path, tasks[i].run, std::cref(o)));
    }
    for (std::size_t i = start; i < end; ++i) rows[i] = batch[i - start].get();
  }
  return rows;
}

inline int cmd_bench(const BenchOptions& o, std::ostream& out) {
  const auto rows = run_bench(o);
  out << "instance,m,run,ciphertext_bytes,container_bytes,keygen_s,encrypt_s,evolve_s,"
         "transcript_bytes,messages,rounds\n";
  for (const auto& r : rows) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%u,%zu,%zu,%zu,%.3f,%.3f,%.3f,%llu,%llu,%llu\n", r.instance.c_str(), r.m,
                  r.run, r.ciphertext_bytes, r.container_bytes, r.keygen_s, r.encrypt_s, r.evolve_s,
                  static_cast<unsigned long long>(r.transcript_bytes),
                  static_cast<unsigned long long>(r.messages), static_cast<unsigned long long>(r.rounds));
    out << buf;
  }
  return kExitOk;
}

// ---- stats -------------------------------------------------------------------

struct StatsOptions {
  std::string csv_a;
  std::string csv_b;
  std::string column;  // header name; first column when empty
};

/// Numeric values of one column. A first row naming `column` selects it;
/// tour lines, comments and cells that do not parse are skipped.
inline std::vector<double> read_column(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::size_t col = 0;
  bool header_seen = false;
  std::vector<double> values;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#' || line.rfind("tour,", 0) == 0) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (!header_seen && !column.empty()) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i] == column) {
          col = i;
          header_seen = true;
        }
      }
      if (header_seen) continue;
    }
    if (col >= cells.size()) continue;
    try {
      std::size_t used = 0;
      const double v = std::stod(cells[col], &used);
      if (used == cells[col].size() && std::isfinite(v)) values.push_back(v);
    } catch (const std::exception&) {
    }
  }
  if (!column.empty() && !header_seen) throw FormatError(path + ": no column named " + column);
  if (values.empty()) throw FormatError(path + ": no numeric values");
  return values;
}

struct StatsReport {
  double mean_a = 0, std_a = 0, mean_b = 0, std_b = 0, p_value = 1;
};

inline StatsReport compute_stats(std::span<const double> a, std::span<const double> b) {
  StatsReport r;
  r.mean_a = stats::mean(a);
  r.std_a = stats::sample_std(a);
  r.mean_b = stats::mean(b);
  r.std_b = stats::sample_std(b);
  r.p_value = stats::rank_sum_test(a, b).p_value;
  return r;
}

inline int cmd_stats(const StatsOptions& o, std::ostream& out) {
  const auto a = read_column(o.csv_a, o.column);
  const auto b = read_column(o.csv_b, o.column);
  const auto r = compute_stats(a, b);
  char buf[256];
  std::snprintf(buf, sizeof buf, "mean_a=%.6g\nstd_a=%.6g\nmean_b=%.6g\nstd_b=%.6g\np_value=%.6g\n", r.mean_a,
                r.std_a, r.mean_b, r.std_b, r.p_value);
  out << buf;
  return kExitOk;
}

}  // namespace pega::cli
