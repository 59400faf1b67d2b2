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

#include "dsd/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <thread>

#include "dsd/enumerate.hpp"
#include "dsd/metrics.hpp"

namespace dsd {

namespace {

// Stream tags for deriving per-purpose rngs from one experiment seed.
constexpr std::uint64_t kDsdSimStream = 1;
constexpr std::uint64_t kStandardSimStream = 2;

struct RunOutput {
  std::vector<TraceRow> trace_rows;
  std::vector<SummaryRow> summary_rows;
};

std::vector<std::uint64_t> effective_seeds(const ExperimentConfig& config,
                                           const CommandOptions& opts) {
  if (opts.seed_override.has_value()) return {*opts.seed_override};
  return config.seeds;
}

/// One seeded experiment: generation, both simulations, stats, rows.
RunOutput execute_run(const ExperimentConfig& config, std::uint64_t seed,
                      const std::string& run_id) {
  SeededStream gen_rng(seed);
  const GenerationResult gen =
      generate(config.draft, config.target, config.prompt, config.max_new,
               config.params, gen_rng);

  SeededStream dsd_rng = SeededStream(seed).fork(kDsdSimStream);
  SeededStream std_rng = SeededStream(seed).fork(kStandardSimStream);
  const SimReport dsd_report =
      simulate_dsd(config.cluster, gen.rounds, config.sampler, dsd_rng);
  const SimReport std_report = simulate_standard(config.cluster, dsd_report.total_tokens,
                                                 config.sampler, std_rng);

  const RunStats stats = compute_stats(gen.rounds, config.params.gamma, &dsd_report);

  // The closed-form speedup needs rho > 0 and a mean accepted span >= 1;
  // degenerate all-reject runs report 0 instead.
  const double mean_accepted = stats.avg_accepted_len - 1.0;
  double analytic = 0.0;
  if (stats.rho > 0.0 && mean_accepted >= 1.0) {
    analytic = expected_speedup(
        SpeedModelInput{stats.rho, mean_accepted, config.params.gamma}, config.cluster);
  }

  RunOutput out;
  out.trace_rows.reserve(gen.rounds.size());
  for (std::size_t i = 0; i < gen.rounds.size(); ++i) {
    const VerificationResult& round = gen.rounds[i];
    const RoundTrace& trace = dsd_report.traces[i];
    out.trace_rows.push_back(TraceRow{run_id, static_cast<int>(i), config.params.gamma,
                                      config.params.tau, config.cluster.n_nodes,
                                      config.cluster.compute_step_ms,
                                      config.cluster.link_latency_ms, round.accepted_count,
                                      round.key_count(), trace.compute_ms, trace.comm_ms,
                                      trace.total_ms, trace.sync_rounds});
  }
  out.summary_rows.push_back(SummaryRow{
      run_id, stats.rho, stats.avg_accepted_len, static_cast<double>(stats.total_tokens),
      static_cast<double>(stats.sync_rounds), stats.tokens_per_ms.value_or(0.0),
      stats.key_token_fraction, analytic, measured_speedup(std_report, dsd_report)});
  return out;
}

void append(RunOutput& into, RunOutput&& from) {
  into.trace_rows.insert(into.trace_rows.end(),
                         std::make_move_iterator(from.trace_rows.begin()),
                         std::make_move_iterator(from.trace_rows.end()));
  into.summary_rows.insert(into.summary_rows.end(),
                           std::make_move_iterator(from.summary_rows.begin()),
                           std::make_move_iterator(from.summary_rows.end()));
}

SummaryRow mean_of(const std::vector<SummaryRow>& rows, const std::string& run_id) {
  SummaryRow agg;
  agg.run_id = run_id;
  const double n = static_cast<double>(rows.size());
  for (const SummaryRow& r : rows) {
    agg.rho += r.rho / n;
    agg.avg_accepted_len += r.avg_accepted_len / n;
    agg.total_tokens += r.total_tokens / n;
    agg.sync_rounds += r.sync_rounds / n;
    agg.tokens_per_ms += r.tokens_per_ms / n;
    agg.key_token_fraction += r.key_token_fraction / n;
    agg.analytic_speedup += r.analytic_speedup / n;
    agg.measured_speedup += r.measured_speedup / n;
  }
  return agg;
}

double variance_of(const std::vector<SummaryRow>& rows,
                   double (*field)(const SummaryRow&), double mean) {
  double acc = 0.0;
  for (const SummaryRow& r : rows) {
    const double d = field(r) - mean;
    acc += d * d;
  }
  return acc / static_cast<double>(rows.size());
}

void print_summary_line(std::ostream& log, const SummaryRow& row) {
  log << "  " << row.run_id << ": rho=" << format_double(row.rho)
      << " avg_len=" << format_double(row.avg_accepted_len)
      << " tokens=" << format_double(row.total_tokens)
      << " sync_rounds=" << format_double(row.sync_rounds)
      << " analytic_speedup=" << format_double(row.analytic_speedup)
      << " measured_speedup=" << format_double(row.measured_speedup) << "\n";
}

std::string out_path(const CommandOptions& opts, const std::string& file) {
  return (std::filesystem::path(opts.out_dir) / file).string();
}

}  // namespace

int run_command(const ExperimentConfig& config, const CommandOptions& opts,
                std::ostream& log) {
  RunOutput all;
  for (std::uint64_t seed : effective_seeds(config, opts)) {
    append(all, execute_run(config, seed, "seed" + std::to_string(seed)));
  }
  write_file(out_path(opts, "trace.csv"), render_trace_csv(all.trace_rows));
  write_file(out_path(opts, "summary.csv"), render_summary_csv(all.summary_rows));
  log << "run: " << all.summary_rows.size() << " seed(s), outputs in " << opts.out_dir
      << "\n";
  for (const SummaryRow& row : all.summary_rows) print_summary_line(log, row);
  return ExitCode::kOk;
}

int sweep_command(const ExperimentConfig& config, const CommandOptions& opts,
                  std::ostream& log) {
  if (!config.sweep.has_value()) {
    throw ConfigError("sweep: config has no sweep block");
  }
  const SweepSpec& sweep = *config.sweep;
  const std::vector<std::uint64_t> seeds = effective_seeds(config, opts);
  const std::string param = sweep_parameter_name(sweep.parameter);

  struct PointResult {
    RunOutput output;
    std::vector<SummaryRow> per_seed;
    std::exception_ptr error;
  };
  std::vector<PointResult> points(sweep.values.size());

  // Every point owns its seeds and rng streams, so evaluation order cannot
  // change the results; the merge below is a fixed-order reduction.
  std::atomic<std::size_t> cursor{0};
  auto evaluate_points = [&]() {
    for (std::size_t i = cursor.fetch_add(1); i < sweep.values.size();
         i = cursor.fetch_add(1)) {
      try {
        const ExperimentConfig point_config = with_sweep_value(config, sweep.values[i]);
        const std::string prefix = param + "=" + format_double(sweep.values[i]);
        for (std::uint64_t seed : seeds) {
          RunOutput one =
              execute_run(point_config, seed, prefix + "-seed" + std::to_string(seed));
          points[i].per_seed.push_back(one.summary_rows.front());
          append(points[i].output, std::move(one));
        }
      } catch (...) {
        points[i].error = std::current_exception();
      }
    }
  };

  const int worker_count =
      std::max(1, std::min<int>(opts.workers, static_cast<int>(sweep.values.size())));
  if (worker_count == 1) {
    evaluate_points();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(worker_count));
    for (int w = 0; w < worker_count; ++w) threads.emplace_back(evaluate_points);
    for (std::thread& t : threads) t.join();
  }

  RunOutput all;
  log << "sweep over " << param << " (" << sweep.values.size() << " values x "
      << seeds.size() << " seeds)\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].error) std::rethrow_exception(points[i].error);
    const std::string prefix = param + "=" + format_double(sweep.values[i]);
    const SummaryRow agg = mean_of(points[i].per_seed, prefix + "-mean");
    print_summary_line(log, agg);
    log << "    variance: avg_len="
        << format_double(variance_of(
               points[i].per_seed,
               [](const SummaryRow& r) { return r.avg_accepted_len; }, agg.avg_accepted_len))
        << " measured_speedup="
        << format_double(variance_of(
               points[i].per_seed, [](const SummaryRow& r) { return r.measured_speedup; },
               agg.measured_speedup))
        << "\n";
    append(all, std::move(points[i].output));
    all.summary_rows.push_back(agg);
  }

  write_file(out_path(opts, "trace.csv"), render_trace_csv(all.trace_rows));
  write_file(out_path(opts, "summary.csv"), render_summary_csv(all.summary_rows));
  log << "outputs in " << opts.out_dir << "\n";
  return ExitCode::kOk;
}

int verify_lossless_command(const ExperimentConfig& config, const CommandOptions& opts,
                            std::ostream& log) {
  (void)opts;
  struct Instance {
    std::string name;
    const TokenModel* draft;
    const TokenModel* target;
    const Context* prompt;
    int horizon;
  };
  std::vector<Instance> instances;
  instances.push_back(
      Instance{"main", &config.draft, &config.target, &config.prompt, config.horizon});
  if (config.calibration.has_value()) {
    for (std::size_t i = 0; i < config.calibration->items.size(); ++i) {
      const ValidationItem& item = config.calibration->items[i];
      instances.push_back(Instance{"item" + std::to_string(i), &item.draft, &item.target,
                                   &item.prompt, item.horizon});
    }
  }

  double max_tv = 0.0;
  for (const Instance& inst : instances) {
    const SequenceDistribution speculative = enumerate_output_distribution(
        *inst.draft, *inst.target, *inst.prompt, inst.horizon, config.params);
    const SequenceDistribution reference =
        enumerate_target_distribution(*inst.target, *inst.prompt, inst.horizon);
    const double tv = total_variation(speculative, reference);
    max_tv = std::max(max_tv, tv);
    log << "  " << inst.name << ": total_variation=" << format_double(tv) << "\n";
  }
  log << "max total_variation=" << format_double(max_tv) << "\n";
  if (max_tv <= 1e-9) {
    log << "lossless within 1e-9\n";
    return ExitCode::kOk;
  }
  log << "divergent (expected for relaxed configs with tau > 0)\n";
  return ExitCode::kInformativeDivergence;
}

int calibrate_command(const ExperimentConfig& config, const CommandOptions& opts,
                      std::ostream& log) {
  if (!config.calibration.has_value()) {
    throw ConfigError("calibrate: config has no calibration block");
  }
  const CalibrationSpec& spec = *config.calibration;

  auto grid_csv = [](const std::vector<GridPointEval>& grid_log,
                     const KeyCriteria* selected) {
    std::string out =
        "ratio_limit,gap_limit,overlap_floor,top_m,avg_accepted_len,divergence,"
        "feasible,selected\n";
    for (const GridPointEval& e : grid_log) {
      const bool is_selected = selected != nullptr &&
                               e.criteria.ratio_limit == selected->ratio_limit &&
                               e.criteria.gap_limit == selected->gap_limit &&
                               e.criteria.overlap_floor == selected->overlap_floor;
      out += format_double(e.criteria.ratio_limit) + "," +
             format_double(e.criteria.gap_limit) + "," +
             format_double(e.criteria.overlap_floor) + "," +
             std::to_string(e.criteria.top_m) + "," + format_double(e.avg_accepted_len) +
             "," + format_double(e.divergence) + "," + (e.feasible ? "true" : "false") +
             "," + (is_selected ? "true" : "false") + "\n";
    }
    return out;
  };

  try {
    const CalibrationResult result =
        calibrate_thresholds(spec.items, config.params.tau, spec.budget, spec.grid,
                             spec.gamma, config.params.criteria.top_m);
    write_file(out_path(opts, "calibration.csv"),
               grid_csv(result.grid_log, &result.criteria));
    log << "calibrated thresholds: ratio_limit=" << format_double(result.criteria.ratio_limit)
        << " gap_limit=" << format_double(result.criteria.gap_limit)
        << " overlap_floor=" << format_double(result.criteria.overlap_floor)
        << "\n  avg_accepted_len=" << format_double(result.avg_accepted_len)
        << " divergence=" << format_double(result.divergence) << " (budget "
        << format_double(spec.budget) << ")\n"
        << "grid log in " << out_path(opts, "calibration.csv") << "\n";
    return ExitCode::kOk;
  } catch (const InfeasibleBudgetError& e) {
    log << "calibration infeasible: " << e.what() << "\n  strictest point: avg_accepted_len="
        << format_double(e.strictest.avg_accepted_len)
        << " divergence=" << format_double(e.strictest.divergence) << "\n";
    return ExitCode::kRuntimeError;
  }
}

std::vector<AnalyticRow> analytic_grid(const AnalyticQuery& query) {
  if (query.n_nodes.empty() || query.t0_ms.empty() || query.t1_ms.empty() ||
      query.k_tokens.empty()) {
    throw ConfigError("analytic: every axis (n_nodes, t0, t1, k) needs at least one value");
  }
  if (query.gamma < 1) {
    throw ConfigError("analytic: gamma must be >= 1");
  }
  std::vector<AnalyticRow> rows;
  for (int n : query.n_nodes) {
    for (double t0 : query.t0_ms) {
      for (double t1 : query.t1_ms) {
        const ClusterConfig cluster{n, t0, t1};
        try {
          cluster.validate();
        } catch (const InvariantError& e) {
          throw ConfigError(std::string("analytic: ") + e.what());
        }
        for (double k : query.k_tokens) {
          if (!(k >= 1.0)) {
            throw ConfigError("analytic: k values must be >= 1");
          }
          const double rho =
              query.rho.value_or(k / static_cast<double>(query.gamma + 1));
          if (!(rho > 0.0 && rho <= 1.0)) {
            throw ConfigError("analytic: rho must lie in (0, 1]");
          }
          AnalyticRow row{n,
                          t0,
                          t1,
                          k,
                          rho,
                          query.gamma,
                          standard_decode_time_ms(k, cluster),
                          dsd_round_time_ms(k, cluster),
                          comm_reduction_ratio(k, cluster),
                          expected_speedup(SpeedModelInput{rho, k, query.gamma}, cluster),
                          in_amortization_regime(cluster)};
          rows.push_back(row);
        }
      }
    }
  }
  return rows;
}

int analytic_command(const AnalyticQuery& query,
                     const std::optional<std::string>& out_dir, std::ostream& log) {
  const std::vector<AnalyticRow> rows = analytic_grid(query);

  const char* header =
      "n_nodes,t0_ms,t1_ms,k,rho,gamma,t_std_ms,t_dsd_ms,r_comm,speedup,in_regime";
  std::string csv = header;
  csv += '\n';
  log << header << "\n";
  for (const AnalyticRow& r : rows) {
    const std::string line = std::to_string(r.n_nodes) + "," + format_double(r.t0_ms) +
                             "," + format_double(r.t1_ms) + "," + format_double(r.k_tokens) +
                             "," + format_double(r.rho) + "," + std::to_string(r.gamma) +
                             "," + format_double(r.t_std_ms) + "," +
                             format_double(r.t_dsd_ms) + "," + format_double(r.r_comm) +
                             "," + format_double(r.speedup) + "," +
                             (r.in_regime ? "true" : "false");
    log << line << "\n";
    csv += line;
    csv += '\n';
  }
  if (out_dir.has_value()) {
    const std::string path = (std::filesystem::path(*out_dir) / "analytic.csv").string();
    write_file(path, csv);
    log << "wrote " << path << "\n";
  }
  return ExitCode::kOk;
}

}  // namespace dsd
