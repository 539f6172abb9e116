#include "delam/runner.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "delam/stepper.hpp"

namespace delam {

namespace {

// Fixed 17-significant-digit formatting keeps CSVs diffable and
// byte-deterministic across runs.
std::string fmt(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

RunResult execute_run(const RunConfig& config) {
  config.check();
  RunResult result;
  result.config = config;
  result.material = config.material();

  const ValidationReport report = validate(result.material);
  if (!report.ok())
    throw std::invalid_argument("material parameters invalid:\n" + report.summary());

  const Mesh2D mesh = build_rectangle_mesh(config.length(), config.height(),
                                           config.glued_fraction, config.h_target());
  LoadProgram load;
  load.direction = config.unit_direction();
  load.velocity = config.velocity();
  result.ops = assemble(mesh, result.material, load);

  result.history = run_on(result.ops, result.material, config.tau(), config.horizon(),
                          config.post_debond_steps, config.stop_on_full_debond,
                          config.qp_tol);
  result.history.step_reports = energy_report(result.history, result.ops, result.material);

  result.debond_step = -1;
  for (std::size_t k = 0; k < result.history.states.size(); ++k) {
    if (result.history.states[k].zeta.maxCoeff() < 1e-12) {
      result.debond_step = static_cast<int>(k);
      break;
    }
  }
  return result;
}

void write_artifacts(const RunResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  const auto& reports = result.history.step_reports;
  const auto& ops = result.ops;
  const auto& spec = result.material;

  {
    auto out = open_out(dir / "energies.csv");
    out << "t,bulk,interface_stored,diss_R0,diss_R1,total,work,gap\n";
    for (std::size_t k = 1; k < reports.size(); ++k) {
      const auto& r = reports[k];
      out << fmt(r.t) << ',' << fmt(r.bulk_energy) << ',' << fmt(r.interface_stored) << ','
          << fmt(r.dissipated_R0_cum) << ',' << fmt(r.dissipated_R1_cum) << ','
          << fmt(r.total) << ',' << fmt(r.work_cum) << ',' << fmt(r.imbalance_gap) << '\n';
    }
  }
  {
    auto out = open_out(dir / "reactions.csv");
    out << "t,Fx,Fy\n";
    for (std::size_t k = 1; k < reports.size(); ++k)
      out << fmt(reports[k].t) << ',' << fmt(reports[k].reaction.x()) << ','
          << fmt(reports[k].reaction.y()) << '\n';
  }
  {
    auto out = open_out(dir / "amdp.csv");
    out << "t,lhs_pi,rhs_pi,lhs_zeta,rhs_zeta\n";
    for (std::size_t k = 1; k < reports.size(); ++k) {
      const auto& r = reports[k];
      out << fmt(r.t) << ',' << fmt(r.amdp_pi_lhs) << ',' << fmt(r.amdp_pi_rhs) << ','
          << fmt(r.amdp_zeta_lhs) << ',' << fmt(r.amdp_zeta_rhs) << '\n';
    }
  }
  {
    const MixityMap mix = (result.history.states.size() > 1)
                              ? mixity_map(result.history, ops, spec)
                              : MixityMap{};
    auto out = open_out(dir / "mixity.csv");
    out << "s,damage,plastic,hardening,ratio\n";
    for (std::size_t i = 0; i < mix.arc_length.size(); ++i)
      out << fmt(mix.arc_length[i]) << ',' << fmt(mix.damage_density[i]) << ','
          << fmt(mix.plastic_density[i]) << ',' << fmt(mix.hardening_density[i]) << ','
          << fmt(mix.ratio[i]) << '\n';
  }

  for (int k : result.config.snapshot_steps) {
    if (k < 0 || k >= static_cast<int>(result.history.states.size())) continue;
    const State& state = result.history.states[k];
    const Eigen::VectorXd jn = ops.J_N * state.u;
    const Eigen::VectorXd jt = ops.J_T * state.u;
    auto out = open_out(dir / ("interface_k" + std::to_string(k) + ".csv"));
    out << "s,zeta,pi,jump_N,jump_T\n";
    double s = 0.0;
    for (int i = 0; i < ops.num_interface_nodes(); ++i) {
      // zeta is element-wise; report the adjacent-element average at nodes.
      double zeta_sum = 0.0;
      int zeta_count = 0;
      if (i > 0) {
        zeta_sum += state.zeta[i - 1];
        ++zeta_count;
      }
      if (i < ops.num_interface_edges()) {
        zeta_sum += state.zeta[i];
        ++zeta_count;
      }
      out << fmt(s) << ',' << fmt(zeta_sum / zeta_count) << ',' << fmt(state.pi[i]) << ','
          << fmt(jn[i]) << ',' << fmt(jt[i]) << '\n';
      if (i < ops.num_interface_edges()) s += ops.A_e[i];
    }
  }

  // summary.json
  nlohmann::json summary;
  summary["schema_version"] = 1;
  summary["config"] = nlohmann::json::parse(serialize_config(result.config));
  summary["mesh"] = {{"vertices", ops.mesh.num_vertices()},
                     {"triangles", ops.mesh.num_triangles()},
                     {"interface_edges", ops.mesh.num_interface_edges()},
                     {"h", ops.mesh.h},
                     {"grid_spacing", ops.mesh.grid_spacing}};
  const ValidationReport validation = validate(spec);
  nlohmann::json issues = nlohmann::json::array();
  for (const auto& issue : validation.issues) {
    const char* severity = issue.severity == ValidationIssue::Severity::Hard ? "hard"
                           : issue.severity == ValidationIssue::Severity::Warning ? "warning"
                                                                                  : "info";
    issues.push_back({{"severity", severity}, {"message", issue.message}});
  }
  summary["validation"] = {{"ok", validation.ok()},
                           {"issues", issues},
                           {"yield_lower_MPa", validation.yield_lower * 1e-6},
                           {"yield_upper_MPa", validation.yield_upper * 1e-6},
                           {"sigma_yield_MPa", spec.sigma_yield * 1e-6}};
  summary["material"] = {{"a_II_J_per_m2", mode_II_toughness(spec)},
                         {"a_II_over_a_I", mode_II_toughness(spec) / spec.a_I}};
  summary["steps"] = static_cast<int>(result.history.states.size()) - 1;
  summary["debond_step"] = result.debond_step;
  if (!reports.empty()) {
    const auto& last = reports.back();
    summary["final"] = {{"t", last.t},
                        {"total", last.total},
                        {"work", last.work_cum},
                        {"gap", last.imbalance_gap}};
    const AmdpCurves amdp = amdp_report(result.history, ops, spec);
    // The zeta right-hand side is logged in both sign conventions
    // (dissipation-positive and as displayed with zeta_K - zeta_0).
    summary["amdp"] = {{"residual_pi", amdp.residual_pi()},
                       {"residual_zeta", amdp.residual_zeta()},
                       {"rhs_zeta_dissipation_positive", amdp.rhs_zeta.back()},
                       {"rhs_zeta_displayed_sign", -amdp.rhs_zeta.back()},
                       {"sign_convention", "rhs_zeta = int a_I (zeta_0 - zeta_K) dS"}};
  }

  auto out = open_out(dir / "summary.json");
  out << summary.dump(2) << '\n';
}

int run_benchmark(const RunConfig& config, const std::string& out_dir) {
  try {
    const RunResult result = execute_run(config);
    write_artifacts(result, out_dir);
  } catch (const std::exception& err) {
    std::cerr << "run failed: " << err.what() << "\n";
    return 1;
  }
  return 0;
}

double sup_difference(const std::vector<double>& ta, const std::vector<double>& va,
                      const std::vector<double>& tb, const std::vector<double>& vb,
                      double t_max) {
  double sup = 0.0;
  std::size_t jb = 0;
  for (std::size_t ia = 0; ia < ta.size(); ++ia) {
    if (ta[ia] > t_max) break;
    while (jb < tb.size() && tb[jb] < ta[ia] - 1e-12) ++jb;
    if (jb >= tb.size()) break;
    if (std::abs(tb[jb] - ta[ia]) > 1e-9 * std::max(1.0, std::abs(ta[ia]))) continue;
    sup = std::max(sup, std::abs(va[ia] - vb[jb]));
  }
  return sup;
}

ConvergenceResult convergence_study(const RunConfig& base_config, int levels) {
  if (levels < 2) throw std::invalid_argument("convergence_study: levels must be >= 2");

  ConvergenceResult result;
  for (int level = 0; level < levels; ++level) {
    ConvergenceLevel entry;
    const double scale = std::pow(0.5, level);
    RunConfig config = base_config;
    config.tau_s = base_config.tau_s * scale;
    config.h_mm = base_config.h_mm * scale;
    config.stop_on_full_debond = false;  // common horizon across levels
    config.snapshot_steps.clear();
    entry.tau = config.tau();
    entry.h_target = config.h_target();
    try {
      const RunResult run = execute_run(config);
      for (const auto& report : run.history.step_reports) {
        entry.t.push_back(report.t);
        entry.total.push_back(report.total);
      }
      entry.ok = true;
    } catch (const std::exception& err) {
      entry.ok = false;
      entry.error = err.what();
    }
    result.levels.push_back(std::move(entry));
  }

  for (int level = 0; level + 1 < levels; ++level) {
    const auto& a = result.levels[level];
    const auto& b = result.levels[level + 1];
    if (a.ok && b.ok && !a.t.empty())
      result.sup_differences.push_back(
          sup_difference(a.t, a.total, b.t, b.total, a.t.back()));
    else
      result.sup_differences.push_back(std::nan(""));
  }
  return result;
}

int write_convergence_artifacts(const ConvergenceResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  bool any_failed = false;
  for (std::size_t level = 0; level < result.levels.size(); ++level) {
    const auto& entry = result.levels[level];
    if (!entry.ok) {
      any_failed = true;
      continue;
    }
    auto out = open_out(dir / ("energies_L" + std::to_string(level) + ".csv"));
    out << "t,total\n";
    for (std::size_t k = 0; k < entry.t.size(); ++k)
      out << fmt(entry.t[k]) << ',' << fmt(entry.total[k]) << '\n';
  }

  // Comparison table on the coarsest level's times.
  if (!result.levels.empty() && result.levels.front().ok) {
    const auto& coarse = result.levels.front();
    auto out = open_out(dir / "convergence.csv");
    out << "t";
    for (std::size_t level = 0; level < result.levels.size(); ++level)
      out << ",total_L" << level;
    out << '\n';
    for (std::size_t k = 0; k < coarse.t.size(); ++k) {
      out << fmt(coarse.t[k]);
      for (const auto& entry : result.levels) {
        double value = std::nan("");
        if (entry.ok) {
          const auto idx = static_cast<std::size_t>(std::llround(coarse.t[k] / entry.tau));
          if (idx < entry.t.size() &&
              std::abs(entry.t[idx] - coarse.t[k]) <= 1e-9 * std::max(1.0, coarse.t[k]))
            value = entry.total[idx];
        }
        out << ',' << fmt(value);
      }
      out << '\n';
    }
  }

  nlohmann::json j;
  j["schema_version"] = 1;
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& entry : result.levels)
    levels.push_back({{"tau", entry.tau},
                      {"h", entry.h_target},
                      {"ok", entry.ok},
                      {"error", entry.error},
                      {"steps", entry.t.empty() ? 0 : static_cast<int>(entry.t.size()) - 1}});
  j["levels"] = levels;
  j["sup_differences"] = result.sup_differences;
  auto out = open_out(dir / "convergence_summary.json");
  out << j.dump(2) << '\n';

  return any_failed ? 1 : 0;
}

}  // namespace delam
