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

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pega/cli.hpp"
#include "support.hpp"

namespace cli = pega::cli;
namespace fs = std::filesystem;
using pega::testing::data_path;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("pega_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + PEGA_CLI_BINARY + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> column(const std::string& csv, std::size_t idx) {
  std::vector<std::string> out;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("tour", 0) == 0 || line.rfind("generation", 0) == 0) continue;
    std::istringstream row(line);
    std::string cell;
    for (std::size_t i = 0; i <= idx; ++i) std::getline(row, cell, ',');
    out.push_back(cell);
  }
  return out;
}

cli::SolveOptions solve_opts(const std::string& tsp, const std::string& mode) {
  cli::SolveOptions o;
  o.tsp = tsp;
  o.mode = mode;
  o.pop = 8;
  o.gens = 6;
  o.seed = 21;
  return o;
}

TEST(Cli, TriangleSolves) {
  for (const char* mode : {"plain", "pega"}) {
    auto o = solve_opts(data_path("triangle.tsp"), mode);
    const auto res = cli::run_solve(o);
    EXPECT_EQ(res.stats.best_cost, 39) << mode;
    EXPECT_NE(res.csv.find("tour,39,"), std::string::npos);
  }
}

TEST(Cli, PlainAndEncryptedAgree) {
  const auto tsp = scratch("random12.tsp");
  cli::write_text(tsp.string(), pega::tsp::serialize_tsplib(pega::testing::random_euclidean(12, 77)));
  for (const char* sel : {"fps", "tournament"}) {
    auto plain = solve_opts(tsp.string(), "plain");
    plain.selection = sel;
    auto enc = plain;
    enc.mode = "pega";
    const auto a = cli::run_solve(plain);
    const auto b = cli::run_solve(enc);
    EXPECT_EQ(column(a.csv, 1), column(b.csv, 1)) << sel;
    EXPECT_EQ(column(a.csv, 2), column(b.csv, 2)) << sel;
    EXPECT_EQ(a.stats.best_tour, b.stats.best_tour);
    EXPECT_EQ(b.record["algorithm"], std::string(sel) == "fps" ? "PEGA1" : "PEGA2");
    EXPECT_EQ(a.record["algorithm"], std::string(sel) == "fps" ? "GA1" : "GA2");
  }
}

TEST(Cli, RunsAreDeterministic) {
  auto o = solve_opts(data_path("five_lower.tsp"), "pega");
  EXPECT_EQ(cli::run_solve(o).csv, cli::run_solve(o).csv);
  o.mode = "plain";
  EXPECT_EQ(cli::run_solve(o).csv, cli::run_solve(o).csv);
}

TEST(Cli, CsvLayout) {
  auto o = solve_opts(data_path("five_lower.tsp"), "plain");
  const auto csv = cli::run_solve(o).csv;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "generation,best_cost,mean_cost");
  int rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    last = line;
    ++rows;
  }
  EXPECT_EQ(rows, 7 + 1);
  EXPECT_EQ(last.rfind("tour,", 0), 0u);
}

TEST(Cli, ReadColumn) {
  const auto p = scratch("col.csv");
  cli::write_text(p.string(), "generation,best_cost,mean_cost\n0,10,11.5\n1,9,10.25\ntour,9,1 2 3\n");
  EXPECT_EQ(cli::read_column(p.string(), "best_cost"), (std::vector<double>{10, 9}));
  EXPECT_EQ(cli::read_column(p.string(), "mean_cost"), (std::vector<double>{11.5, 10.25}));
  EXPECT_EQ(cli::read_column(p.string(), ""), (std::vector<double>{0, 1}));
  EXPECT_THROW(cli::read_column(p.string(), "nope"), pega::FormatError);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("solve"), 1);
  EXPECT_EQ(run("solve --tsp " + data_path("triangle.tsp") + " --mode quantum"), 1);
  EXPECT_EQ(run("solve --tsp " + data_path("triangle.tsp") + " --pop notanumber"), 1);
  EXPECT_EQ(run("solve --tsp /nonexistent/file.tsp"), 2);
  EXPECT_EQ(run("solve --tsp " + data_path("bad_token.tsp")), 2);
  EXPECT_EQ(run("solve --tsp " + data_path("geo.tsp")), 2);
  EXPECT_EQ(run("solve --tsp " + data_path("triangle.tsp") + " --pop 4 --gens 2"), 0);
}

TEST(Cli, ConfigFileAndEnvironment) {
  const auto out1 = scratch("cfg.csv");
  const auto cfg = scratch("run.ini");
  cli::write_text(cfg.string(), "pop=6\ngens=3\nseed=5\n");
  ASSERT_EQ(run("solve --tsp " + data_path("five_lower.tsp") + " --config " + cfg.string() + " --csv " +
                out1.string()),
            0);
  const auto out2 = scratch("flags.csv");
  ASSERT_EQ(run("solve --tsp " + data_path("five_lower.tsp") + " --pop 6 --gens 3 --seed 5 --csv " + out2.string()),
            0);
  EXPECT_EQ(slurp(out1), slurp(out2));
  EXPECT_EQ(column(slurp(out1), 0).size(), 4u);

  const auto out3 = scratch("env.csv");
  ASSERT_EQ(run("solve --tsp " + data_path("five_lower.tsp") + " --csv " + out3.string(),
                "PEGA_POP=6 PEGA_GENS=3 PEGA_SEED=5"),
            0);
  EXPECT_EQ(slurp(out1), slurp(out3));
}

TEST(Cli, StatsCommand) {
  const auto a = scratch("a.csv");
  const auto b = scratch("b.csv");
  cli::write_text(a.string(), "best\n2\n4\n4\n4\n5\n5\n7\n9\n");
  cli::write_text(b.string(), "best\n2\n4\n4\n4\n5\n5\n7\n9\n");
  std::ostringstream out;
  cli::StatsOptions o{a.string(), b.string(), "best"};
  EXPECT_EQ(cli::cmd_stats(o, out), 0);
  EXPECT_NE(out.str().find("mean_a=5\n"), std::string::npos);
  EXPECT_NE(out.str().find("p_value=1\n"), std::string::npos);
  const auto r = cli::compute_stats(cli::read_column(a.string(), "best"), cli::read_column(b.string(), "best"));
  EXPECT_NEAR(r.std_a, std::sqrt(32.0 / 7.0), 1e-12);
}

TEST(Cli, KeygenEncryptRoundTrip) {
  const auto prefix = scratch("keys").string();
  cli::KeygenOptions kg;
  kg.bits = 256;
  kg.seed = 3;
  kg.out = prefix;
  std::ostringstream log;
  ASSERT_EQ(cli::cmd_keygen(kg, log), 0);
  const auto km = cli::load_keys(prefix);
  cli::EncryptOptions en;
  en.tsp = data_path("five_upper.tsp");
  en.pk = prefix + ".pk";
  en.perm_seed = 4;
  en.seed = 5;
  en.out = scratch("five").string();
  ASSERT_EQ(cli::cmd_encrypt(en, log), 0);
  const auto enc = pega::tsp::parse_encrypted_tsp(cli::read_bytes(en.out + ".etsp"));
  const auto map = pega::tsp::parse_city_map(cli::read_bytes(en.out + ".cmap"));
  const auto d = pega::tsp::build_matrix(pega::tsp::load_tsplib(en.tsp));
  const auto pd = pega::tsp::relabel(d, map);
  for (std::size_t k = 0; k < enc.entries.size(); ++k) {
    const auto code = pega::thpc::dec(km.sk, enc.entries[k]);
    EXPECT_EQ(pega::fixedpoint::decode(code, km.pk.n), mpq_class(pd.entries()[k]));
  }
  auto so = solve_opts(en.tsp, "pega");
  so.keys = prefix;
  EXPECT_EQ(cli::run_solve(so).stats.best_cost, cli::run_solve(solve_opts(en.tsp, "plain")).stats.best_cost);
}

}  // namespace
