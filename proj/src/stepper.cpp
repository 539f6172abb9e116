#include "delam/stepper.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "delam/config.hpp"

namespace delam {

namespace {

constexpr double kFullDebond = 1e-12;

}  // namespace

Eigen::VectorXd zeta_update(const Eigen::VectorXd& u, const Eigen::VectorXd& pi,
                            const Eigen::VectorXd& zeta_prev, const DiscreteOperators& ops,
                            const MaterialSpec& spec) {
  const Eigen::VectorXd gap = gap_energy_density(ops, spec, u, pi);
  Eigen::VectorXd zeta(zeta_prev.size());
  for (int e = 0; e < zeta.size(); ++e)
    zeta[e] = (gap[e] > spec.a_I) ? 0.0 : zeta_prev[e];  // tie keeps zeta
  return zeta;
}

State step(const State& state_prev, double tau, const DiscreteOperators& ops,
           const MaterialSpec& spec, std::optional<QpWarmStart>* warm, double tol_kkt) {
  const double t_k = state_prev.t + tau;
  const StepQp qp = build_step_qp(ops, spec, t_k, state_prev.zeta, state_prev.pi);

  const QpWarmStart* warm_ptr =
      (warm && warm->has_value()) ? &warm->value() : nullptr;
  const QpSolution sol = solve_qp(qp.problem, warm_ptr, tol_kkt);
  if (sol.status != QpStatus::Converged)
    throw std::runtime_error("step: QP did not converge at t = " + std::to_string(t_k) +
                             " (kkt residual " + std::to_string(sol.kkt_residual) + ")");

  State next;
  next.t = t_k;
  qp.decode(sol.x, &next.u, &next.pi);
  next.zeta = zeta_update(next.u, next.pi, state_prev.zeta, ops, spec);

  if (warm) {
    QpWarmStart refreshed;
    refreshed.x = sol.x;
    for (int i = 0; i < qp.n_iface; ++i) {
      refreshed.x[qp.p_plus_index(i)] = 0.0;
      refreshed.x[qp.p_minus_index(i)] = 0.0;
    }
    for (int idx : sol.active_set)
      if (idx < qp.n_u) refreshed.active_set.push_back(idx);
    for (int i = 0; i < qp.n_iface; ++i) {
      refreshed.active_set.push_back(qp.p_plus_index(i));
      refreshed.active_set.push_back(qp.p_minus_index(i));
    }
    *warm = std::move(refreshed);
  }
  return next;
}

State initial_state(const DiscreteOperators& ops, const MaterialSpec& spec, double tol_kkt) {
  State zero;
  zero.t = 0.0;
  zero.u = Eigen::VectorXd::Zero(ops.num_dofs());
  zero.zeta = Eigen::VectorXd::Ones(ops.num_interface_edges());
  zero.pi = Eigen::VectorXd::Zero(ops.num_interface_nodes());

  const StepQp qp = build_step_qp(ops, spec, 0.0, zero.zeta, zero.pi);
  const QpSolution sol = solve_qp(qp.problem, nullptr, tol_kkt);
  if (sol.status != QpStatus::Converged)
    throw std::runtime_error("initial_state: t=0 QP did not converge");
  qp.decode(sol.x, &zero.u, &zero.pi);
  return zero;
}

History run_on(const DiscreteOperators& ops, const MaterialSpec& spec, double tau, double T,
               int post_debond_steps, bool stop_on_full_debond, double tol_kkt) {
  if (!(tau > 0.0)) throw std::invalid_argument("run_on: tau must be positive");
  if (T < 0.0) throw std::invalid_argument("run_on: horizon must be non-negative");

  History history;
  history.states.push_back(initial_state(ops, spec, tol_kkt));

  const int n_steps = static_cast<int>(std::floor(T / tau + 1e-9));
  std::optional<QpWarmStart> warm;
  int extra_remaining = -1;
  for (int k = 1; k <= n_steps; ++k) {
    history.states.push_back(step(history.states.back(), tau, ops, spec, &warm, tol_kkt));
    if (stop_on_full_debond) {
      const auto& zeta = history.states.back().zeta;
      if (extra_remaining < 0) {
        if (zeta.size() == 0 || zeta.maxCoeff() < kFullDebond)
          extra_remaining = post_debond_steps;
      } else {
        --extra_remaining;
      }
      if (extra_remaining == 0) break;
    }
  }
  return history;
}

History run(const RunConfig& config) {
  config.check();
  const MaterialSpec material = config.material();
  const ValidationReport report = validate(material);
  if (!report.ok())
    throw std::invalid_argument("run: material parameters invalid:\n" + report.summary());

  const Mesh2D mesh = build_rectangle_mesh(config.length(), config.height(),
                                           config.glued_fraction, config.h_target());
  LoadProgram load;
  load.direction = config.unit_direction();
  load.velocity = config.velocity();
  const DiscreteOperators ops = assemble(mesh, material, load);
  return run_on(ops, material, config.tau(), config.horizon(), config.post_debond_steps,
                config.stop_on_full_debond, config.qp_tol);
}

}  // namespace delam
