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

// pega: key generation, problem encryption, solving, benchmarking and
// statistics from the command line.
//
// Every option may also come from a config file (--config FILE, key=value
// lines) or from the environment as PEGA_<OPTION>, e.g. PEGA_POP=30.
//
// Exit status: 0 success, 1 usage error, 2 data error.

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "pega/cli.hpp"

namespace {

std::string env_name(const std::string& long_name) {
  std::string out = "PEGA_";
  for (char ch : long_name) {
    out += ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

/// Replace `--config FILE` with the options it lists. Keys already given on
/// the command line or through the environment keep those values.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::string path;
  std::set<std::string> given;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
      continue;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      continue;
    }
    if (args[i].rfind("--", 0) == 0) given.insert(args[i].substr(2, args[i].find('=') - 2));
    out.push_back(args[i]);
  }
  if (path.empty()) return out;
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  for (std::string line; std::getline(in, line);) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw CLI::ConversionError("config line without '=': " + line);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    for (auto& ch : key) ch = ch == '_' ? '-' : ch;
    if (given.count(key) || std::getenv(env_name(key).c_str())) continue;
    out.push_back("--" + key + "=" + value);
  }
  return out;
}

/// Give every long option of `app` an environment variable.
void finish(CLI::App* app) {
  for (CLI::Option* opt : app->get_options()) {
    const auto& names = opt->get_lnames();
    if (names.empty() || names.front() == "help" || names.front() == "config") continue;
    opt->envname(env_name(names.front()));
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace pega::cli;
  CLI::App app{"Genetic TSP solving over encrypted cost matrices"};
  app.require_subcommand(1);

  KeygenOptions kg;
  auto* keygen = app.add_subcommand("keygen", "Generate a threshold Paillier key pair and two key shares");
  keygen->add_option("--bits", kg.bits, "Modulus size in bits")->capture_default_str();
  keygen->add_option("--seed", kg.seed, "Key generation seed")->capture_default_str();
  keygen->add_option("--out", kg.out, "Output prefix (.pk .sk .s1 .s2)")->capture_default_str();

  EncryptOptions en;
  auto* encrypt = app.add_subcommand("encrypt", "Relabel and encrypt a TSPLIB instance");
  encrypt->add_option("--tsp", en.tsp, "TSPLIB file")->required();
  encrypt->add_option("--pk", en.pk, "Public key file")->required();
  encrypt->add_option("--scale", en.scale, "Fixed-point scale")->capture_default_str();
  encrypt->add_option("--perm-seed", en.perm_seed, "City relabeling seed")->capture_default_str();
  encrypt->add_option("--seed", en.seed, "Encryption randomness seed")->capture_default_str();
  encrypt->add_option("--out", en.out, "Output prefix (.etsp .cmap)")->capture_default_str();

  SolveOptions so;
  auto* solve = app.add_subcommand("solve", "Run the plaintext or the encrypted GA");
  solve->add_option("--tsp", so.tsp, "TSPLIB file")->required();
  solve->add_option("--mode", so.mode, "plain | pega")->capture_default_str();
  solve->add_option("--selection", so.selection, "fps | tournament")->capture_default_str();
  solve->add_option("--k", so.k, "Tournament size")->capture_default_str();
  solve->add_option("--pop", so.pop, "Population size")->capture_default_str();
  solve->add_option("--gens", so.gens, "Generations")->capture_default_str();
  solve->add_option("--crossover-rate", so.crossover_rate)->capture_default_str();
  solve->add_option("--mutation-rate", so.mutation_rate)->capture_default_str();
  solve->add_option("--precision", so.precision, "Fixed-point scale")->capture_default_str();
  solve->add_option("--sigma", so.sigma, "Comparison blinding bits")->capture_default_str();
  solve->add_option("--seed", so.seed, "Root seed for every stream not set explicitly")->capture_default_str();
  solve->add_option("--population-seed", so.population_seed);
  solve->add_option("--selection-seed", so.selection_seed);
  solve->add_option("--crossover-seed", so.crossover_seed);
  solve->add_option("--mutation-seed", so.mutation_seed);
  solve->add_option("--perm-seed", so.perm_seed, "City relabeling seed");
  solve->add_option("--key-seed", so.key_seed);
  solve->add_option("--encrypt-seed", so.encrypt_seed);
  solve->add_option("--s1-seed", so.s1_seed, "S1 protocol randomness");
  solve->add_option("--s2-seed", so.s2_seed, "S2 encryption randomness");
  solve->add_flag("--relabel,!--no-relabel", so.relabel, "Relabel cities before solving")->capture_default_str();
  solve->add_option("--key-bits", so.key_bits, "Modulus size when generating keys")->capture_default_str();
  solve->add_option("--keys", so.keys, "Key file prefix from `keygen`");
  solve->add_option("--transport", so.transport, "inproc | tcp")->capture_default_str();
  solve->add_option("--csv", so.csv, "CSV output file (stdout by default)");
  solve->add_option("--record", so.record, "JSON run record output file");

  BenchOptions bo;
  auto* bench = app.add_subcommand("bench", "Measure ciphertext sizes, traffic and timings");
  bench->add_option("--instances", bo.instances, "TSPLIB files")->required();
  bench->add_option("--repeat", bo.repeat)->capture_default_str();
  bench->add_option("--key-bits", bo.key_bits)->capture_default_str();
  bench->add_option("--precision", bo.precision)->capture_default_str();
  bench->add_option("--gens", bo.gens, "Generations of encrypted evolution (0: encryption only)")
      ->capture_default_str();
  bench->add_option("--pop", bo.pop)->capture_default_str();
  bench->add_option("--selection", bo.selection)->capture_default_str();
  bench->add_option("--jobs", bo.jobs, "Concurrent runs")->capture_default_str();
  bench->add_option("--seed", bo.seed)->capture_default_str();

  StatsOptions st;
  auto* stats = app.add_subcommand("stats", "Mean, std and rank-sum p-value of two samples");
  stats->add_option("--csv-a", st.csv_a)->required();
  stats->add_option("--csv-b", st.csv_b)->required();
  stats->add_option("--column", st.column, "Column name (first column by default)");

  for (auto* sub : {keygen, encrypt, solve, bench, stats}) {
    sub->add_option("--config", "Read options from a key=value file");
    finish(sub);
  }

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*keygen) return cmd_keygen(kg, std::cerr);
    if (*encrypt) return cmd_encrypt(en, std::cerr);
    if (*solve) return cmd_solve(so, std::cout);
    if (*bench) return cmd_bench(bo, std::cout);
    if (*stats) return cmd_stats(st, std::cout);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const pega::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
