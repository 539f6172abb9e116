#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "delam/assembly.hpp"
#include "delam/state.hpp"

namespace delam {

/// One report per state in the history (index 0 is the initial state).
std::vector<StepReport> energy_report(const History& history, const DiscreteOperators& ops,
                                      const MaterialSpec& spec);

struct AmdpCurves {
  std::vector<double> t;
  std::vector<double> lhs_pi, rhs_pi;
  std::vector<double> lhs_zeta, rhs_zeta;
  // Final relative residuals (rhs - lhs)/rhs, 0 when rhs is 0.
  double residual_pi() const;
  double residual_zeta() const;
};

/// Cumulative driving-force work against dissipation in both channels. The
/// damage driving force is the smooth gap-energy part of -d_zeta E; the
/// zeta right-hand side uses the dissipation-positive sign a_I (zeta_0 - zeta_K).
AmdpCurves amdp_report(const History& history, const DiscreteOperators& ops,
                       const MaterialSpec& spec);

/// Per-interface-node cumulative dissipated energy density (J/m^2) split by
/// mechanism, plus the mode-mixity ratio density / a_I.
struct MixityMap {
  std::vector<double> arc_length;
  std::vector<double> damage_density;     // a_I share from adjacent elements
  std::vector<double> plastic_density;    // sigma_yield * sum |dpi|
  std::vector<double> hardening_density;  // kH/2 pi_final^2
  std::vector<double> ratio;              // total / a_I
};

MixityMap mixity_map(const History& history, const DiscreteOperators& ops,
                     const MaterialSpec& spec);

/// Worst (most negative) semistability margin over n_samples random
/// admissible competitors: zeta_tilde <= zeta element-wise with R0 cost,
/// pi_tilde arbitrary with R1 cost. Non-negative up to solver tolerance for
/// states produced by the stepper.
double semistability_audit(const State& state, const DiscreteOperators& ops,
                           const MaterialSpec& spec, int n_samples, std::uint64_t seed);

}  // namespace delam
