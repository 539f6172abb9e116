#pragma once

#include <optional>

#include "delam/assembly.hpp"
#include "delam/qp.hpp"
#include "delam/state.hpp"

namespace delam {

struct RunConfig;  // config.hpp

/// Closed-form damage update: per element, zeta drops to 0 where the midpoint
/// gap-energy density exceeds a_I and keeps its previous value otherwise
/// (ties keep zeta). Irreversibility 0 <= zeta <= zeta_prev is built in.
Eigen::VectorXd zeta_update(const Eigen::VectorXd& u, const Eigen::VectorXd& pi,
                            const Eigen::VectorXd& zeta_prev, const DiscreteOperators& ops,
                            const MaterialSpec& spec);

/// One semi-implicit fractional step: solve the (u, pi) QP with zeta frozen
/// at the previous value, then update zeta in closed form. warm, when given,
/// is consumed and refreshed with this step's primal/active set.
State step(const State& state_prev, double tau, const DiscreteOperators& ops,
           const MaterialSpec& spec, std::optional<QpWarmStart>* warm = nullptr,
           double tol_kkt = 1e-9);

/// Equilibrium at t = 0 with zeta = 1, pi = 0 (solves the t=0 QP).
State initial_state(const DiscreteOperators& ops, const MaterialSpec& spec,
                    double tol_kkt = 1e-9);

/// Executes the full time loop prescribed by the config: from t=0 in steps of
/// tau until t reaches T, or until full delamination (max zeta < 1e-12) plus
/// the configured number of post-debond steps. step_reports is left empty;
/// diagnostics::energy_report fills it.
History run(const RunConfig& config);

/// run() on already-assembled operators (shared by run and the tests).
History run_on(const DiscreteOperators& ops, const MaterialSpec& spec, double tau,
               double T, int post_debond_steps = 3, bool stop_on_full_debond = true,
               double tol_kkt = 1e-9);

}  // namespace delam
