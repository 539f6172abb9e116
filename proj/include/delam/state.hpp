#pragma once

#include <Eigen/Core>

#include <vector>

namespace delam {

/// Discrete fields at one time level. u is the transformed displacement
/// (zero Dirichlet trace), zeta lives on interface elements, pi on interface
/// nodes (scalar tangential slip in 2-D).
struct State {
  double t = 0.0;        // s
  Eigen::VectorXd u;     // 2 * #vertices, meters
  Eigen::VectorXd zeta;  // #interface edges, in [0,1]
  Eigen::VectorXd pi;    // #interface nodes, meters
};

/// Per-step energy ledger, complementary work, and cumulative AMDP sums
/// (filled by diagnostics::energy_report).
struct StepReport {
  double t = 0.0;
  double bulk_energy = 0.0;        // 1/2 u.K u - t f1.u
  double interface_stored = 0.0;
  double dissipated_R0_cum = 0.0;  // a_I * total variation of zeta
  double dissipated_R1_cum = 0.0;  // sigma_yield * total variation of pi
  double total = 0.0;              // stored + dissipated
  double work_cum = 0.0;           // -sum_k <f1(t_k)-f1(t_{k-1}), u^{k-1}>
  double imbalance_gap = 0.0;      // work_cum - total
  Eigen::Vector2d reaction = Eigen::Vector2d::Zero();  // (N, N)
  double amdp_pi_lhs = 0.0;
  double amdp_pi_rhs = 0.0;
  double amdp_zeta_lhs = 0.0;
  double amdp_zeta_rhs = 0.0;
};

/// Time-ordered run record. step_reports is filled by diagnostics once the
/// run is complete.
struct History {
  std::vector<State> states;
  std::vector<StepReport> step_reports;
};

}  // namespace delam
