#pragma once

// Runs a scenario over its seed list and renders the metric CSV.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "doco/algorithm.hpp"
#include "doco/bench/config.hpp"
#include "doco/libsvm.hpp"
#include "doco/metrics.hpp"
#include "doco/network.hpp"
#include "doco/problems.hpp"

namespace doco::bench {

inline constexpr std::size_t kAssumptionSamples = 256;

struct SeedResult {
  std::uint64_t seed = 0;
  MetricSeries series;
  double gradient_bound = 0.0;
  double value_bound = 0.0;
};

struct SuiteResult {
  std::string name;
  std::vector<SeedResult> runs;
  MetricSeries mean;
  std::string csv;
};

// Everything one seed needs, built from the config.
struct SeedSetup {
  LossStream stream;
  BoxConstraintSet constraints;
  HyperSchedule hyper;
};

inline SeedSetup build_seed(const ScenarioConfig& cfg, const std::vector<RegressionExample>* rows,
                            std::size_t dimension, std::uint64_t seed) {
  const double radius = cfg.radius_for(dimension);
  BoxConstraintSet box(cfg.lower, cfg.upper, dimension);
  if (box.enclosing_radius() > radius * (1.0 + 1e-12)) {
    throw ConfigError("ball assumption fails: the box does not fit in the ball of radius " +
                      std::to_string(radius));
  }
  LossStream stream =
      cfg.source == ProblemSource::kSynthetic
          ? synthetic_stream(cfg.units, dimension, cfg.horizon, cfg.rho, seed, radius)
          : dataset_stream(*rows, cfg.units, cfg.horizon, cfg.rho, seed, radius);
  const auto report = validate_loss_assumptions(stream, kAssumptionSamples, seed);
  if (!report) throw ConfigError("loss assumption fails: " + report.violation);
  ScheduleInputs in;
  in.c = cfg.c;
  in.a = cfg.a;
  in.constraint_count = box.count();
  in.gradient_bound = stream.gradient_bound(box);
  in.strong_convexity = stream.strong_convexity();
  in.radius = radius;
  in.horizon = cfg.horizon;
  HyperSchedule hyper = make_schedule(cfg.variant, in);
  return SeedSetup{std::move(stream), box, hyper};
}

namespace detail {

inline std::string csv_real(double v) { return doco::detail::format_real(v); }

inline void append_row(std::string& out, const MetricRow& row, const std::string& seed) {
  out += std::to_string(row.checkpoint);
  out += ',';
  out += seed;
  out += ',';
  out += csv_real(row.sreg);
  for (double r : row.regrets) {
    out += ',';
    out += csv_real(r);
  }
  out += ',';
  out += csv_real(row.cacv);
  out += ',';
  out += csv_real(row.comm_cost);
  out += ',';
  out += csv_real(row.sreg_max_of_mean);
  out += '\n';
}

}  // namespace detail

// Header: checkpoint_T,seed,sreg,reg_unit_1..N,cacv,comm_cost,sreg_max_of_mean.
// Per-seed rows come first (seed order, then checkpoint order), followed by
// rows with seed = "mean".
inline std::string render_csv(std::size_t units, const std::vector<SeedResult>& runs,
                              const MetricSeries& mean) {
  std::string out = "checkpoint_T,seed,sreg";
  for (std::size_t i = 1; i <= units; ++i) out += ",reg_unit_" + std::to_string(i);
  out += ",cacv,comm_cost,sreg_max_of_mean\n";
  for (const auto& run : runs) {
    for (const auto& row : run.series.rows) {
      detail::append_row(out, row, std::to_string(run.seed));
    }
  }
  for (const auto& row : mean.rows) detail::append_row(out, row, "mean");
  return out;
}

// Seeds run on up to `threads` workers; output order depends only on the
// seed list.
inline SuiteResult run_suite(const ScenarioConfig& cfg, std::size_t threads = 1) {
  validate_config(cfg);
  std::vector<RegressionExample> rows;
  std::size_t dimension = cfg.dimension;
  if (cfg.source == ProblemSource::kDataset) {
    LibsvmData data = load_libsvm_file(cfg.dataset);
    if (data.examples.empty()) throw ConfigError("dataset '" + cfg.dataset + "' is empty");
    dimension = data.dimension;
    rows = std::move(data.examples);
  }
  const TopologySchedule topology = cfg.topology();
  const auto checkpoints = checkpoint_grid(cfg.horizon, cfg.checkpoint_start);

  std::vector<SeedResult> results(cfg.seeds.size());
  std::vector<std::exception_ptr> errors(cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < cfg.seeds.size(); k = next++) {
      try {
        const std::uint64_t seed = cfg.seeds[k];
        SeedSetup setup = build_seed(cfg, &rows, dimension, seed);
        const RunTrajectory traj =
            run_experiment(setup.stream, topology, setup.hyper, setup.constraints, seed);
        results[k].seed = seed;
        results[k].series =
            compute_metric_series(traj, setup.stream, setup.constraints, topology, checkpoints);
        results[k].gradient_bound = setup.hyper.inputs().gradient_bound;
        results[k].value_bound = setup.stream.value_bound();
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const std::size_t pool = std::max<std::size_t>(1, std::min(threads, cfg.seeds.size()));
  if (pool == 1) {
    worker();
  } else {
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < pool; ++w) workers.emplace_back(worker);
    for (auto& t : workers) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SuiteResult out;
  out.name = cfg.name;
  std::vector<MetricSeries> series;
  for (const auto& r : results) series.push_back(r.series);
  out.mean = averaged_metrics(series);
  out.runs = std::move(results);
  out.csv = render_csv(cfg.units, out.runs, out.mean);
  return out;
}

// Writes <dir>/<name>.csv and returns its path.
inline std::filesystem::path write_csv(const SuiteResult& result, const std::string& dir) {
  const std::filesystem::path out_dir(dir.empty() ? "." : dir);
  std::filesystem::create_directories(out_dir);
  const auto path = out_dir / (result.name + ".csv");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << result.csv;
  if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
  return path;
}

}  // namespace doco::bench
