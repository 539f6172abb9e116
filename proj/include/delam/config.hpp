#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "delam/material.hpp"

namespace delam {

/// Full run description. The stored fields are the config-level values in
/// engineering units (GPa, GPa/m, MPa, mm, J/m^2) exactly as parsed, so that
/// parse(serialize(config)) round-trips bit-exactly; SI quantities are
/// derived through the accessors.
struct RunConfig {
  // geometry
  double L_mm = 0.0;
  double H_mm = 0.0;
  double glued_fraction = 1.0;

  // material (exact config key names)
  double E_GPa = 0.0;
  double nu = 0.0;
  double kappaN_GPa_per_m = 0.0;
  double kappaT_over_kappaN = 0.0;
  double kappaH_over_kappaT = 0.0;
  double kappaG = 0.0;  // Pa*m
  double aI_J_per_m2 = 0.0;
  bool sigma_yield_from_factor = false;
  double sigma_yield_MPa = 0.0;   // used unless sigma_yield_from_factor
  double sigma_yield_factor = 0.0;  // sigma = factor * sqrt(2 kappa_N a_I)

  // loading
  double direction_x = 0.0;
  double direction_y = 0.0;
  double velocity_mm_per_s = 0.0;

  // discretisation
  double tau_s = 0.0;
  double h_mm = 0.0;
  double T_s = 0.0;

  std::string out_dir;
  std::vector<int> snapshot_steps;
  std::uint64_t audit_seed = 1;
  int post_debond_steps = 3;
  bool stop_on_full_debond = true;
  double qp_tol = 1e-9;

  // derived SI quantities
  double length() const { return L_mm * 1e-3; }
  double height() const { return H_mm * 1e-3; }
  double tau() const { return tau_s; }
  double h_target() const { return h_mm * 1e-3; }
  double horizon() const { return T_s; }
  double velocity() const { return velocity_mm_per_s * 1e-3; }
  Eigen::Vector2d unit_direction() const;
  MaterialSpec material() const;

  void check() const;  // throws std::invalid_argument on bad values
};

/// Benchmark preset: 250 x 12.5 mm bar glued over 0.9 L, aluminum bulk,
/// loading direction (1, 0.6) at 1 mm/s, tau = 0.012 s, h = 4.6 mm.
RunConfig preset_paper_pull_push();

RunConfig parse_config(const std::string& json_text);
RunConfig load_config_file(const std::string& path);
std::string serialize_config(const RunConfig& config);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace delam
