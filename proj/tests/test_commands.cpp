/* Copyright 2026 The dsdlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dsd/commands.hpp"
#include "dsd/latency.hpp"

using namespace dsd;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("dsd_cmd_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

const char* kDivergentPair = R"(
  "draft": {"kind": "categorical-iid",
            "probs": [0.15, 0.2, 0.25, 0.2, 0.1, 0.1]},
  "target": {"kind": "categorical-iid",
             "probs": [0.45, 0.3, 0.1, 0.08, 0.04, 0.03]},
  "vocab_size": 6
)";

std::string run_config() {
  return std::string("{") + kDivergentPair + R"(,
    "gamma": 4, "tau": 0.2, "max_new": 40, "seeds": [1, 2],
    "cluster": {"n_nodes": 4, "t0_ms": 1.0, "t1_ms": 5.0}
  })";
}

CommandOptions options_for(const TempDir& dir) {
  CommandOptions opts;
  opts.out_dir = dir.path.string();
  return opts;
}

}  // namespace

TEST_CASE("smallest possible run smokes end to end") {
  TempDir dir("smoke");
  const char* cfg = R"({
    "vocab_size": 2,
    "draft": {"kind": "categorical-iid", "probs": [0.5, 0.5]},
    "target": {"kind": "categorical-iid", "probs": [0.9, 0.1]},
    "gamma": 1, "max_new": 8, "seeds": [1]
  })";
  std::ostringstream log;
  CHECK(run_command(parse_config(cfg), options_for(dir), log) == 0);
  CHECK(fs::exists(dir.path / "trace.csv"));
  CHECK(fs::exists(dir.path / "summary.csv"));
}

TEST_CASE("run emits both csv files and a summary per seed") {
  TempDir dir("run");
  std::ostringstream log;
  const int rc = run_command(parse_config(run_config()), options_for(dir), log);
  CHECK(rc == 0);

  const auto summary = read_csv(dir.path / "summary.csv");
  REQUIRE(summary.size() == 3);  // header + 2 seeds
  CHECK(summary[0][0] == "run_id");
  CHECK(summary[1][0] == "seed1");
  CHECK(summary[2][0] == "seed2");

  const auto trace = read_csv(dir.path / "trace.csv");
  CHECK(trace.size() > 2);
  CHECK(log.str().find("seed1") != std::string::npos);
}

TEST_CASE("identical configs and seeds produce byte-identical outputs") {
  TempDir a("det_a");
  TempDir b("det_b");
  std::ostringstream log;
  REQUIRE(run_command(parse_config(run_config()), options_for(a), log) == 0);
  REQUIRE(run_command(parse_config(run_config()), options_for(b), log) == 0);
  CHECK(slurp(a.path / "trace.csv") == slurp(b.path / "trace.csv"));
  CHECK(slurp(a.path / "summary.csv") == slurp(b.path / "summary.csv"));
}

TEST_CASE("seed override narrows the run to one seed") {
  TempDir dir("seed_override");
  CommandOptions opts = options_for(dir);
  opts.seed_override = 7;
  std::ostringstream log;
  REQUIRE(run_command(parse_config(run_config()), opts, log) == 0);
  const auto summary = read_csv(dir.path / "summary.csv");
  REQUIRE(summary.size() == 2);
  CHECK(summary[1][0] == "seed7");
}

TEST_CASE("deterministic trace rows reproduce the closed-form round times") {
  TempDir dir("exact");
  std::ostringstream log;
  REQUIRE(run_command(parse_config(run_config()), options_for(dir), log) == 0);
  const auto trace = read_csv(dir.path / "trace.csv");
  // columns: ...,n_nodes(4),t0_ms(5),t1_ms(6),k_accepted(7),...,total_ms(11)
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const ClusterConfig c{std::stoi(trace[i][4]), std::stod(trace[i][5]),
                          std::stod(trace[i][6])};
    const int k = std::stoi(trace[i][7]);
    const double total = std::stod(trace[i][11]);
    const double expected =
        k * c.compute_step_ms + (c.n_nodes - 1) * c.link_latency_ms;
    CHECK(total == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("sweep emits per-seed rows plus one aggregate row per value") {
  TempDir dir("sweep");
  std::string cfg = std::string("{") + kDivergentPair + R"(,
    "gamma": 4, "max_new": 24, "seeds": [1, 2, 3],
    "sweep": {"parameter": "tau", "values": [0.0, 0.2, 0.4, 0.8]}
  })";
  std::ostringstream log;
  REQUIRE(sweep_command(parse_config(cfg), options_for(dir), log) == 0);

  const auto summary = read_csv(dir.path / "summary.csv");
  CHECK(summary.size() == 1 + 12 + 4);  // header + value*seed + aggregates
  int means = 0;
  double len_at_zero = -1.0;
  double len_at_eight = -1.0;
  for (std::size_t i = 1; i < summary.size(); ++i) {
    if (summary[i][0].find("-mean") == std::string::npos) continue;
    ++means;
    if (summary[i][0] == "tau=0-mean") len_at_zero = std::stod(summary[i][2]);
    if (summary[i][0] == "tau=0.8-mean") len_at_eight = std::stod(summary[i][2]);
  }
  CHECK(means == 4);
  // relaxation extends the aggregate accepted length on a divergent pair
  REQUIRE(len_at_zero > 0.0);
  CHECK(len_at_eight >= len_at_zero);
  CHECK(log.str().find("variance") != std::string::npos);
}

TEST_CASE("sweeps are reproducible and worker-count independent") {
  std::string cfg = std::string("{") + kDivergentPair + R"(,
    "gamma": 3, "max_new": 16, "seeds": [1, 2],
    "sweep": {"parameter": "n_nodes", "values": [2, 4, 8, 16]}
  })";
  TempDir serial("sweep_serial");
  TempDir parallel("sweep_parallel");
  std::ostringstream log;
  CommandOptions serial_opts = options_for(serial);
  REQUIRE(sweep_command(parse_config(cfg), serial_opts, log) == 0);
  CommandOptions parallel_opts = options_for(parallel);
  parallel_opts.workers = 4;
  REQUIRE(sweep_command(parse_config(cfg), parallel_opts, log) == 0);
  CHECK(slurp(serial.path / "trace.csv") == slurp(parallel.path / "trace.csv"));
  CHECK(slurp(serial.path / "summary.csv") == slurp(parallel.path / "summary.csv"));
}

TEST_CASE("node sweeps keep measured totals on the analytic curve") {
  TempDir dir("nodes");
  std::string cfg = std::string("{") + kDivergentPair + R"(,
    "gamma": 3, "max_new": 12, "seeds": [5],
    "sweep": {"parameter": "n_nodes", "values": [2, 5, 9, 16]}
  })";
  std::ostringstream log;
  REQUIRE(sweep_command(parse_config(cfg), options_for(dir), log) == 0);
  const auto trace = read_csv(dir.path / "trace.csv");
  REQUIRE(trace.size() > 1);
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const ClusterConfig c{std::stoi(trace[i][4]), std::stod(trace[i][5]),
                          std::stod(trace[i][6])};
    const int k = std::stoi(trace[i][7]);
    const double total = std::stod(trace[i][11]);
    CHECK(total ==
          doctest::Approx(k * c.compute_step_ms + (c.n_nodes - 1) * c.link_latency_ms)
              .epsilon(1e-9));
  }
}

TEST_CASE("verify-lossless accepts strict configs and flags relaxed ones") {
  TempDir dir("lossless");
  std::string strict = std::string("{") + kDivergentPair + R"(,
    "gamma": 3, "tau": 0.0, "horizon": 2
  })";
  std::ostringstream log;
  CHECK(verify_lossless_command(parse_config(strict), options_for(dir), log) == 0);
  CHECK(log.str().find("max total_variation") != std::string::npos);

  std::string relaxed = std::string("{") + kDivergentPair + R"(,
    "gamma": 3, "tau": 0.6, "horizon": 2,
    "criteria": {"ratio_limit": "inf", "gap_limit": 1.0, "overlap_floor": 0.0}
  })";
  std::ostringstream relaxed_log;
  CHECK(verify_lossless_command(parse_config(relaxed), options_for(dir), relaxed_log) ==
        ExitCode::kInformativeDivergence);

  // identical models are lossless even at tau=1
  const char* same = R"({
    "vocab_size": 2,
    "draft": {"kind": "categorical-iid", "probs": [0.7, 0.3]},
    "target": {"kind": "categorical-iid", "probs": [0.7, 0.3]},
    "gamma": 2, "tau": 1.0, "horizon": 2
  })";
  std::ostringstream same_log;
  CHECK(verify_lossless_command(parse_config(same), options_for(dir), same_log) == 0);
}

TEST_CASE("oversized lossless instances trip the enumeration guard") {
  TempDir dir("guard");
  const char* big = R"({
    "vocab_size": 9,
    "draft": {"kind": "categorical-iid",
              "probs": [0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]},
    "target": {"kind": "categorical-iid",
               "probs": [0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]},
    "gamma": 2, "horizon": 2
  })";
  std::ostringstream log;
  CHECK_THROWS_AS(verify_lossless_command(parse_config(big), options_for(dir), log),
                  EnumerationTooLargeError);
}

TEST_CASE("calibrate command writes the grid log") {
  TempDir dir("calibrate");
  std::string cfg = std::string("{") + kDivergentPair + R"(,
    "tau": 0.5,
    "calibration": {
      "budget": 0.2,
      "gamma": 2,
      "grid": {"ratio_limit": ["inf"], "gap_limit": [0.1, 1.0], "overlap_floor": [0.0]},
      "items": [
        {"vocab_size": 2,
         "draft": {"kind": "categorical-iid", "probs": [0.5, 0.5]},
         "target": {"kind": "categorical-iid", "probs": [0.9, 0.1]},
         "horizon": 1}
      ]
    }
  })";
  std::ostringstream log;
  REQUIRE(calibrate_command(parse_config(cfg), options_for(dir), log) == 0);
  const auto grid = read_csv(dir.path / "calibration.csv");
  REQUIRE(grid.size() == 3);  // header + 2 points
  CHECK(grid[0][0] == "ratio_limit");
  int selected = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i].back() == "true") ++selected;
  }
  CHECK(selected == 1);
  CHECK(log.str().find("calibrated thresholds") != std::string::npos);

  std::ostringstream missing_log;
  CHECK_THROWS_AS(
      calibrate_command(parse_config(run_config()), options_for(dir), missing_log),
      ConfigError);
}

TEST_CASE("analytic grid reproduces the latency examples") {
  AnalyticQuery query;
  query.n_nodes = {4};
  query.t0_ms = {1.0};
  query.t1_ms = {5.0};
  query.k_tokens = {1.0, 4.0};
  query.rho = 0.5;
  query.gamma = 8;
  const std::vector<AnalyticRow> rows = analytic_grid(query);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].r_comm == doctest::Approx(0.0));
  CHECK(rows[1].t_std_ms == doctest::Approx(64.0));
  CHECK(rows[1].t_dsd_ms == doctest::Approx(19.0));
  CHECK(rows[1].r_comm == doctest::Approx(0.703125).epsilon(1e-12));
  CHECK(rows[1].in_regime);

  TempDir dir("analytic");
  std::ostringstream log;
  REQUIRE(analytic_command(query, dir.path.string(), log) == 0);
  const auto csv = read_csv(dir.path / "analytic.csv");
  REQUIRE(csv.size() == 3);
  CHECK(csv[0][0] == "n_nodes");
  CHECK(csv[2][8] == "0.703125");
}

TEST_CASE("analytic validation maps to config errors") {
  AnalyticQuery query;
  query.n_nodes = {4};
  query.t0_ms = {1.0};
  query.t1_ms = {5.0};
  query.k_tokens = {0.5};  // below 1
  std::ostringstream log;
  CHECK_THROWS_AS(analytic_grid(query), ConfigError);

  query.k_tokens = {2.0};
  query.rho = 1.5;
  CHECK_THROWS_AS(analytic_grid(query), ConfigError);

  query.rho = 0.5;
  query.n_nodes = {};
  CHECK_THROWS_AS(analytic_grid(query), ConfigError);
}
