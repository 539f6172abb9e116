#include "delam/diagnostics.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace delam {

namespace {

// -d/dpi E(u, zeta, pi), assembled against the nodal pi values. The zeta
// argument is the one frozen in the step that produced pi (the previous
// step's zeta), which is what makes the AMDP sums one-sided.
Eigen::VectorXd pi_driving_force(const DiscreteOperators& ops, const MaterialSpec& spec,
                                 const Eigen::VectorXd& zeta, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& pi) {
  Eigen::VectorXd grad_pi;
  interface_gradients(ops, spec, zeta, u, pi, nullptr, &grad_pi);
  return -grad_pi;
}

double interface_only_energy(const DiscreteOperators& ops, const MaterialSpec& spec,
                             const Eigen::VectorXd& zeta, const Eigen::VectorXd& u,
                             const Eigen::VectorXd& pi) {
  State probe;
  probe.u = u;
  probe.zeta = zeta;
  probe.pi = pi;
  return stored_energy(ops, spec, 0.0, probe).interface;
}

}  // namespace

std::vector<StepReport> energy_report(const History& history, const DiscreteOperators& ops,
                                      const MaterialSpec& spec) {
  if (history.states.empty()) throw std::invalid_argument("energy_report: empty history");

  std::vector<StepReport> reports;
  reports.reserve(history.states.size());

  double r0_cum = 0.0, r1_cum = 0.0, work_cum = 0.0;
  double pi_lhs = 0.0, pi_rhs = 0.0, zeta_lhs = 0.0, zeta_rhs = 0.0;
  const Eigen::VectorXd zeta0 = history.states.front().zeta;

  for (std::size_t k = 0; k < history.states.size(); ++k) {
    const State& state = history.states[k];
    if (k > 0) {
      const State& prev = history.states[k - 1];
      const double dt = state.t - prev.t;

      for (int e = 0; e < state.zeta.size(); ++e)
        r0_cum += spec.a_I * ops.A_e[e] * (prev.zeta[e] - state.zeta[e]);
      for (int i = 0; i < state.pi.size(); ++i)
        r1_cum += spec.sigma_yield * ops.M_C[i] * std::abs(state.pi[i] - prev.pi[i]);

      // Left-endpoint rule, exact for the linear-in-time loading.
      work_cum += -dt * ops.f1_rate.dot(prev.u);

      // AMDP increments use the driving forces at the previous step's state;
      // within step k-1 the QP froze zeta at index k-2.
      const Eigen::VectorXd& zeta_frozen =
          (k >= 2) ? history.states[k - 2].zeta : history.states.front().zeta;
      const Eigen::VectorXd f_prev =
          pi_driving_force(ops, spec, zeta_frozen, prev.u, prev.pi);
      pi_lhs += f_prev.dot(state.pi - prev.pi);
      for (int i = 0; i < state.pi.size(); ++i)
        pi_rhs += spec.sigma_yield * ops.M_C[i] * std::abs(state.pi[i] - prev.pi[i]);

      const Eigen::VectorXd gap_prev = gap_energy_density(ops, spec, prev.u, prev.pi);
      for (int e = 0; e < state.zeta.size(); ++e)
        zeta_lhs += ops.A_e[e] * gap_prev[e] * (prev.zeta[e] - state.zeta[e]);
      zeta_rhs = 0.0;
      for (int e = 0; e < state.zeta.size(); ++e)
        zeta_rhs += spec.a_I * ops.A_e[e] * (zeta0[e] - state.zeta[e]);
    }

    StepReport report;
    report.t = state.t;
    const EnergyParts parts = stored_energy(ops, spec, state.t, state);
    report.bulk_energy = parts.bulk;
    report.interface_stored = parts.interface;
    report.dissipated_R0_cum = r0_cum;
    report.dissipated_R1_cum = r1_cum;
    report.total = parts.total() + r0_cum + r1_cum;
    report.work_cum = work_cum;
    report.imbalance_gap = work_cum - report.total;
    report.reaction = reaction_force(ops, spec, state, state.t);
    report.amdp_pi_lhs = pi_lhs;
    report.amdp_pi_rhs = pi_rhs;
    report.amdp_zeta_lhs = zeta_lhs;
    report.amdp_zeta_rhs = zeta_rhs;
    reports.push_back(report);
  }
  return reports;
}

double AmdpCurves::residual_pi() const {
  if (rhs_pi.empty() || rhs_pi.back() <= 0.0) return 0.0;
  return (rhs_pi.back() - lhs_pi.back()) / rhs_pi.back();
}

double AmdpCurves::residual_zeta() const {
  if (rhs_zeta.empty() || rhs_zeta.back() <= 0.0) return 0.0;
  return (rhs_zeta.back() - lhs_zeta.back()) / rhs_zeta.back();
}

AmdpCurves amdp_report(const History& history, const DiscreteOperators& ops,
                       const MaterialSpec& spec) {
  const std::vector<StepReport> reports = energy_report(history, ops, spec);
  AmdpCurves curves;
  for (const auto& report : reports) {
    curves.t.push_back(report.t);
    curves.lhs_pi.push_back(report.amdp_pi_lhs);
    curves.rhs_pi.push_back(report.amdp_pi_rhs);
    curves.lhs_zeta.push_back(report.amdp_zeta_lhs);
    curves.rhs_zeta.push_back(report.amdp_zeta_rhs);
  }
  return curves;
}

MixityMap mixity_map(const History& history, const DiscreteOperators& ops,
                     const MaterialSpec& spec) {
  if (history.states.empty()) throw std::invalid_argument("mixity_map: empty history");
  const State& final = history.states.back();
  const Eigen::VectorXd& zeta0 = history.states.front().zeta;
  const int m = ops.num_interface_nodes();

  MixityMap map;
  map.arc_length.resize(m);
  map.damage_density.assign(m, 0.0);
  map.plastic_density.assign(m, 0.0);
  map.hardening_density.assign(m, 0.0);
  map.ratio.assign(m, 0.0);

  double s = 0.0;
  for (int k = 0; k < m; ++k) {
    map.arc_length[k] = s;
    if (k < ops.num_interface_edges()) s += ops.A_e[k];
  }

  // a_I share of adjacent elements, averaged with the lumped node weights.
  for (int e = 0; e < ops.num_interface_edges(); ++e) {
    const double drop = zeta0[e] - final.zeta[e];
    map.damage_density[e] += spec.a_I * 0.5 * ops.A_e[e] * drop / ops.M_C[e];
    map.damage_density[e + 1] += spec.a_I * 0.5 * ops.A_e[e] * drop / ops.M_C[e + 1];
  }

  for (std::size_t k = 1; k < history.states.size(); ++k)
    for (int i = 0; i < m; ++i)
      map.plastic_density[i] += spec.sigma_yield *
                                std::abs(history.states[k].pi[i] - history.states[k - 1].pi[i]);

  for (int i = 0; i < m; ++i) {
    map.hardening_density[i] = 0.5 * spec.kappa_H * final.pi[i] * final.pi[i];
    map.ratio[i] =
        (map.damage_density[i] + map.plastic_density[i] + map.hardening_density[i]) / spec.a_I;
  }
  return map;
}

double semistability_audit(const State& state, const DiscreteOperators& ops,
                           const MaterialSpec& spec, int n_samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const Eigen::VectorXd gap = gap_energy_density(ops, spec, state.u, state.pi);
  const double base_energy =
      interface_only_energy(ops, spec, state.zeta, state.u, state.pi);

  double pi_scale = state.pi.size() ? state.pi.cwiseAbs().maxCoeff() : 0.0;
  if (spec.kappa_T > 0.0)
    pi_scale = std::max(pi_scale, spec.sigma_yield / spec.kappa_T);
  if (pi_scale == 0.0) pi_scale = 1e-6;

  double worst = 0.0;
  for (int sample = 0; sample < n_samples; ++sample) {
    if (sample % 2 == 0) {
      // zeta competitor: elementwise shrink, margin of (4.5b).
      double margin = 0.0;
      for (int e = 0; e < state.zeta.size(); ++e) {
        const double zeta_tilde = state.zeta[e] * unit(rng);
        margin += ops.A_e[e] * (state.zeta[e] - zeta_tilde) * (spec.a_I - gap[e]);
      }
      worst = std::min(worst, margin);
    } else {
      // pi competitor: arbitrary perturbation, margin of (4.5c).
      Eigen::VectorXd pi_tilde = state.pi;
      double r1 = 0.0;
      for (int i = 0; i < pi_tilde.size(); ++i) {
        const double delta = pi_scale * gauss(rng);
        pi_tilde[i] += delta;
        r1 += spec.sigma_yield * ops.M_C[i] * std::abs(delta);
      }
      const double competitor =
          interface_only_energy(ops, spec, state.zeta, state.u, pi_tilde) + r1;
      worst = std::min(worst, competitor - base_energy);
    }
  }
  return worst;
}

}  // namespace delam
