#include "delam/material.hpp"

#include <cmath>
#include <sstream>

namespace delam {

ElasticityTensor elasticity_tensor(const MaterialSpec& spec) {
  const double E = spec.young_modulus;
  const double nu = spec.poisson_ratio;
  ElasticityTensor c;
  c.lambda = nu * E / ((1.0 + nu) * (1.0 - 2.0 * nu));
  c.mu = E / (2.0 * (1.0 + nu));
  return c;
}

double mode_II_toughness(const MaterialSpec& spec) {
  return spec.a_I + (2.0 * spec.kappa_T * spec.a_I - spec.sigma_yield * spec.sigma_yield) /
                        (2.0 * spec.kappa_H);
}

bool ValidationReport::ok() const {
  for (const auto& issue : issues)
    if (issue.severity == ValidationIssue::Severity::Hard) return false;
  return true;
}

bool ValidationReport::has_warnings() const {
  for (const auto& issue : issues)
    if (issue.severity == ValidationIssue::Severity::Warning) return true;
  return false;
}

std::string ValidationReport::summary() const {
  if (issues.empty()) return "all parameter conditions satisfied";
  std::ostringstream os;
  for (const auto& issue : issues) {
    switch (issue.severity) {
      case ValidationIssue::Severity::Hard: os << "[violation] "; break;
      case ValidationIssue::Severity::Warning: os << "[warning] "; break;
      case ValidationIssue::Severity::Info: os << "[info] "; break;
    }
    os << issue.message << "\n";
  }
  return os.str();
}

ValidationReport validate(const MaterialSpec& spec) {
  ValidationReport report;
  auto hard = [&](const std::string& msg) {
    report.issues.push_back({ValidationIssue::Severity::Hard, msg});
  };

  if (!(spec.young_modulus > 0.0)) hard("young_modulus must be positive");
  if (!(spec.poisson_ratio > 0.0 && spec.poisson_ratio < 0.5))
    hard("poisson_ratio must lie in (0, 0.5)");
  if (!(spec.kappa_H > 0.0)) hard("kappa_H must be positive");
  if (spec.kappa_G < 0.0) hard("kappa_G must be non-negative");
  if (spec.kappa_N < 0.0) hard("kappa_N must be non-negative");
  if (spec.kappa_T < 0.0) hard("kappa_T must be non-negative");
  if (!(spec.a_I > 0.0)) hard("a_I must be positive");
  if (!(spec.sigma_yield > 0.0)) hard("sigma_yield must be positive");

  if (spec.kappa_T > 0.0 && spec.a_I > 0.0) {
    report.yield_lower = std::sqrt(0.5 * spec.kappa_T * spec.a_I);
    report.yield_upper = std::sqrt(2.0 * spec.kappa_T * spec.a_I);
    const double s2 = spec.sigma_yield * spec.sigma_yield;
    std::ostringstream bounds;
    bounds << "(" << report.yield_lower * 1e-6 << " MPa, " << report.yield_upper * 1e-6
           << " MPa], sigma_yield = " << spec.sigma_yield * 1e-6 << " MPa";
    if (!(s2 > 0.5 * spec.kappa_T * spec.a_I))
      report.issues.push_back({ValidationIssue::Severity::Warning,
                               "sigma_yield below the two-sided lower bound " + bounds.str() +
                                   "; plastic slip may keep evolving after debonding"});
    if (s2 > 2.0 * spec.kappa_T * spec.a_I)
      report.issues.push_back({ValidationIssue::Severity::Warning,
                               "sigma_yield above the two-sided upper bound " + bounds.str() +
                                   "; slip cannot start before debonding"});
  }

  if (spec.kappa_T > 0.0 && spec.kappa_N / spec.kappa_T < 2.0)
    report.issues.push_back({ValidationIssue::Severity::Info,
                             "kappa_N / kappa_T < 2 (unusual for an isotropic adhesive)"});

  return report;
}

}  // namespace delam
