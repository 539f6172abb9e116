#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace delam {

/// Bulk elasticity and interface parameters, SI units throughout.
struct MaterialSpec {
  double young_modulus = 0.0;  // Pa
  double poisson_ratio = 0.0;
  double kappa_N = 0.0;        // Pa/m, adhesive normal stiffness
  double kappa_T = 0.0;        // Pa/m, adhesive tangential stiffness
  double kappa_H = 0.0;        // Pa/m, kinematic hardening slope
  double kappa_G = 0.0;        // Pa*m, slip-gradient coefficient
  double a_I = 0.0;            // J/m^2, Mode-I fracture toughness
  double sigma_yield = 0.0;    // Pa, interfacial yield stress
};

/// Isotropic fourth-order tensor acting on symmetric 2x2 strains,
/// C e = lambda tr(e) I + 2 mu e (plane strain).
struct ElasticityTensor {
  double lambda = 0.0;
  double mu = 0.0;

  Eigen::Matrix2d apply(const Eigen::Matrix2d& strain) const {
    return lambda * strain.trace() * Eigen::Matrix2d::Identity() + 2.0 * mu * strain;
  }
  // C e : f
  double contract(const Eigen::Matrix2d& e, const Eigen::Matrix2d& f) const {
    return apply(e).cwiseProduct(f).sum();
  }
};

ElasticityTensor elasticity_tensor(const MaterialSpec& spec);

/// Overall energy per unit area dissipated in pure Mode II,
/// a_II = a_I + (2 kappa_T a_I - sigma_yield^2) / (2 kappa_H).
double mode_II_toughness(const MaterialSpec& spec);

struct ValidationIssue {
  enum class Severity { Hard, Warning, Info };
  Severity severity = Severity::Hard;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  double yield_lower = 0.0;  // sqrt(kappa_T a_I / 2), Pa
  double yield_upper = 0.0;  // sqrt(2 kappa_T a_I), Pa

  bool ok() const;             // no hard violations
  bool has_warnings() const;
  std::string summary() const;
};

/// Pure report: hard violations of the parameter invariants, warnings for the
/// two-sided yield condition, informational note for kappa_N/kappa_T < 2.
ValidationReport validate(const MaterialSpec& spec);

}  // namespace delam
