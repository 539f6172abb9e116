#pragma once

#include <string>
#include <vector>

#include "delam/assembly.hpp"
#include "delam/config.hpp"
#include "delam/diagnostics.hpp"
#include "delam/state.hpp"

namespace delam {

/// Everything a completed run produces, kept in memory for reuse by the
/// writers, the convergence driver and the test suites.
struct RunResult {
  RunConfig config;
  MaterialSpec material;      // resolved (sigma_yield filled in)
  DiscreteOperators ops;
  History history;            // step_reports filled
  int debond_step = -1;       // first step with max zeta < 1e-12, -1 if never
};

RunResult execute_run(const RunConfig& config);

/// Writes energies.csv, reactions.csv, amdp.csv, mixity.csv, per-snapshot
/// interface_k<k>.csv and summary.json into out_dir. CSVs carry one header
/// line and one row per completed step (none for T = 0).
void write_artifacts(const RunResult& result, const std::string& out_dir);

/// run subcommand: execute + write. Returns process exit status.
int run_benchmark(const RunConfig& config, const std::string& out_dir);

struct ConvergenceLevel {
  double tau = 0.0;
  double h_target = 0.0;
  bool ok = false;
  std::string error;
  std::vector<double> t;      // step times
  std::vector<double> total;  // total energy per step
};

struct ConvergenceResult {
  std::vector<ConvergenceLevel> levels;
  // sup |total_j - total_{j+1}| over common times, one entry per adjacent pair
  std::vector<double> sup_differences;
};

/// Runs the (tau, h), (tau/2, h/2), ... ladder. Failed levels are recorded
/// and the remaining levels still run. Early stop on full delamination is
/// disabled so all levels share the time horizon.
ConvergenceResult convergence_study(const RunConfig& base_config, int levels);

/// converge subcommand: ladder + per-level CSVs + comparison table.
int write_convergence_artifacts(const ConvergenceResult& result, const std::string& out_dir);

/// Sup-difference between two sampled curves restricted to common times
/// t <= t_max (times must be nested; curve b may be finer).
double sup_difference(const std::vector<double>& ta, const std::vector<double>& va,
                      const std::vector<double>& tb, const std::vector<double>& vb,
                      double t_max);

}  // namespace delam
