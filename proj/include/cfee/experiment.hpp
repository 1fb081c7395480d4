#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cfee/serialization.hpp"
#include "cfee/solver.hpp"

namespace cfee {

struct EmitFlags {
  bool trace = true;
  bool summary = true;
  bool timing = true;  ///< wall-time columns; always the last column of a CSV
};

/// Cartesian sweep over the listed scenario parameters; every other scenario
/// field comes from `base`.
struct ExperimentSpec {
  ScenarioConfig base;
  std::vector<int> M{100};
  std::vector<int> K{40};
  std::vector<int> N{1};
  std::vector<int> tau_c{200};
  std::vector<int> tau_p{40};
  std::vector<double> se_target{1.0};
  int realizations = 1;
  std::uint64_t master_seed = 1;
  SolverConfig solver;
  Json power_model = Json::object();  ///< see power_model_from_json
  std::string output_dir = "out";
  EmitFlags emit;
  int workers = 1;

  /// Throws std::invalid_argument.
  void validate() const;
  std::size_t point_count() const;
};

ExperimentSpec experiment_spec_from_json(const Json& j);
Json to_json(const ExperimentSpec& spec);

struct SweepPoint {
  int M = 0, K = 0, N = 0, tau_c = 0, tau_p = 0;
  double se_target = 0.0;
};

/// Points in row-major order over (M, K, N, tau_c, tau_p, se_target).
std::vector<SweepPoint> sweep_points(const ExperimentSpec& spec);

struct RunRecord {
  std::size_t point = 0;
  int realization = 0;
  std::uint64_t seed = 0;
  SweepPoint coords;
  SolverResult result;
};

struct SummaryRow {
  SweepPoint coords;
  int runs = 0;
  double mean_ee_mbit_per_j = 0.0;
  double median_ee_mbit_per_j = 0.0;
  double mean_sum_se = 0.0;
  double feasibility_rate = 0.0;
  double mean_inner_iters = 0.0;
  double mean_outer_iters = 0.0;
  double mean_wall_time_s = 0.0;
};

struct ExperimentOutput {
  std::vector<RunRecord> runs;  ///< sorted by (point, realization)
  std::vector<SummaryRow> summary;
};

/// Scenario for one sweep point and seed.
ScenarioConfig point_config(const ExperimentSpec& spec, const SweepPoint& p, std::uint64_t seed);

/// Runs every point x realization on `workers` threads and writes
///   summary.csv, runs.csv, traces/trace_p<P>_r<R>.csv, runs/run_p<P>_r<R>.json
/// under output_dir. Throws IoError on file system failures.
ExperimentOutput run_experiment(const ExperimentSpec& spec);

/// Columns: outer_iter, inner_iter, xi, f_xi, ee_Mbit_per_J, penalty_sum,
/// violation, alpha_y, alpha_theta, branch.
void emit_convergence_data(const std::vector<IterationRecord>& trace, std::ostream& out);

void write_summary_csv(const std::vector<SummaryRow>& rows, bool timing, std::ostream& out);
void write_runs_csv(const std::vector<RunRecord>& runs, bool timing, std::ostream& out);

/// Replay sidecar of a run: scenario config, seeds, solver settings and the
/// final iterate. Contains no timing.
Json run_sidecar(const ExperimentSpec& spec, const RunRecord& run);

}  // namespace cfee
