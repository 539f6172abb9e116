#include "delam/config.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace delam {

Eigen::Vector2d RunConfig::unit_direction() const {
  Eigen::Vector2d d(direction_x, direction_y);
  const double norm = d.norm();
  if (norm == 0.0) throw std::invalid_argument("loading direction is zero");
  return d / norm;
}

MaterialSpec RunConfig::material() const {
  MaterialSpec spec;
  spec.young_modulus = E_GPa * 1e9;
  spec.poisson_ratio = nu;
  spec.kappa_N = kappaN_GPa_per_m * 1e9;
  spec.kappa_T = kappaT_over_kappaN * spec.kappa_N;
  spec.kappa_H = kappaH_over_kappaT * spec.kappa_T;
  spec.kappa_G = kappaG;
  spec.a_I = aI_J_per_m2;
  spec.sigma_yield = sigma_yield_from_factor
                         ? sigma_yield_factor * std::sqrt(2.0 * spec.kappa_N * spec.a_I)
                         : sigma_yield_MPa * 1e6;
  return spec;
}

void RunConfig::check() const {
  if (!(L_mm > 0.0) || !(H_mm > 0.0))
    throw std::invalid_argument("config: geometry dimensions must be positive");
  if (!(glued_fraction > 0.0) || glued_fraction > 1.0)
    throw std::invalid_argument("config: glued_fraction must be in (0, 1]");
  if (!(tau_s > 0.0)) throw std::invalid_argument("config: tau_s must be positive");
  if (!(h_mm > 0.0)) throw std::invalid_argument("config: h_mm must be positive");
  if (T_s < 0.0) throw std::invalid_argument("config: T_s must be non-negative");
  if (direction_x == 0.0 && direction_y == 0.0)
    throw std::invalid_argument("config: loading direction must be nonzero");
  if (post_debond_steps < 0)
    throw std::invalid_argument("config: post_debond_steps must be non-negative");
  if (!(qp_tol > 0.0)) throw std::invalid_argument("config: qp_tol must be positive");
}

RunConfig preset_paper_pull_push() {
  RunConfig c;
  c.L_mm = 250.0;
  c.H_mm = 12.5;
  c.glued_fraction = 0.9;
  c.E_GPa = 70.0;
  c.nu = 0.35;
  c.kappaN_GPa_per_m = 150.0;
  c.kappaT_over_kappaN = 0.5;
  c.kappaH_over_kappaT = 1.0 / 9.0;
  c.kappaG = 0.0;
  c.aI_J_per_m2 = 187.5;
  c.sigma_yield_from_factor = true;
  c.sigma_yield_factor = 0.56;
  c.direction_x = 1.0;
  c.direction_y = 0.6;
  c.velocity_mm_per_s = 1.0;
  c.tau_s = 0.012;
  c.h_mm = 4.6;
  c.T_s = 3.6;
  c.snapshot_steps = {60, 110, 170, 210, 225, 226, 227, 228};
  c.audit_seed = 1;
  return c;
}

namespace {

template <typename T>
T require(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key))
    throw std::invalid_argument("config: missing key '" + key + "'");
  return j.at(key).get<T>();
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& err) {
    throw std::invalid_argument(std::string("config: not valid JSON: ") + err.what());
  }

  RunConfig c;
  const auto& geo = j.at("geometry");
  c.L_mm = require<double>(geo, "L_mm");
  c.H_mm = require<double>(geo, "H_mm");
  c.glued_fraction = require<double>(geo, "glued_fraction");

  const auto& mat = j.at("material");
  c.E_GPa = require<double>(mat, "E_GPa");
  c.nu = require<double>(mat, "nu");
  c.kappaN_GPa_per_m = require<double>(mat, "kappaN_GPa_per_m");
  c.kappaT_over_kappaN = require<double>(mat, "kappaT_over_kappaN");
  c.kappaH_over_kappaT = require<double>(mat, "kappaH_over_kappaT");
  c.kappaG = mat.value("kappaG", 0.0);
  c.aI_J_per_m2 = require<double>(mat, "aI_J_per_m2");
  if (mat.contains("sigma_yield_factor")) {
    c.sigma_yield_from_factor = true;
    c.sigma_yield_factor = mat.at("sigma_yield_factor").get<double>();
  } else if (mat.contains("sigma_yield_MPa")) {
    c.sigma_yield_from_factor = false;
    c.sigma_yield_MPa = mat.at("sigma_yield_MPa").get<double>();
  } else {
    throw std::invalid_argument(
        "config: material needs sigma_yield_MPa or sigma_yield_factor");
  }

  const auto& load = j.at("loading");
  const auto dir = require<std::vector<double>>(load, "direction");
  if (dir.size() != 2) throw std::invalid_argument("config: direction must have 2 entries");
  c.direction_x = dir[0];
  c.direction_y = dir[1];
  c.velocity_mm_per_s = require<double>(load, "velocity_mm_per_s");

  const auto& disc = j.at("discretisation");
  c.tau_s = require<double>(disc, "tau_s");
  c.h_mm = require<double>(disc, "h_mm");
  c.T_s = require<double>(disc, "T_s");

  if (j.contains("output")) {
    const auto& out = j.at("output");
    c.out_dir = out.value("out_dir", std::string{});
    c.snapshot_steps = out.value("snapshot_steps", std::vector<int>{});
  }
  c.audit_seed = j.value("audit_seed", std::uint64_t{1});
  c.post_debond_steps = j.value("post_debond_steps", 3);
  c.stop_on_full_debond = j.value("stop_on_full_debond", true);
  c.qp_tol = j.value("qp_tol", 1e-9);

  c.check();
  return c;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const RunConfig& c) {
  nlohmann::json j;
  j["geometry"] = {{"L_mm", c.L_mm}, {"H_mm", c.H_mm}, {"glued_fraction", c.glued_fraction}};
  nlohmann::json mat = {{"E_GPa", c.E_GPa},
                        {"nu", c.nu},
                        {"kappaN_GPa_per_m", c.kappaN_GPa_per_m},
                        {"kappaT_over_kappaN", c.kappaT_over_kappaN},
                        {"kappaH_over_kappaT", c.kappaH_over_kappaT},
                        {"kappaG", c.kappaG},
                        {"aI_J_per_m2", c.aI_J_per_m2}};
  if (c.sigma_yield_from_factor)
    mat["sigma_yield_factor"] = c.sigma_yield_factor;
  else
    mat["sigma_yield_MPa"] = c.sigma_yield_MPa;
  j["material"] = mat;
  j["loading"] = {{"direction", {c.direction_x, c.direction_y}},
                  {"velocity_mm_per_s", c.velocity_mm_per_s}};
  j["discretisation"] = {{"tau_s", c.tau_s}, {"h_mm", c.h_mm}, {"T_s", c.T_s}};
  j["output"] = {{"out_dir", c.out_dir}, {"snapshot_steps", c.snapshot_steps}};
  j["audit_seed"] = c.audit_seed;
  j["post_debond_steps"] = c.post_debond_steps;
  j["stop_on_full_debond"] = c.stop_on_full_debond;
  j["qp_tol"] = c.qp_tol;
  return j.dump(2);
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.L_mm == b.L_mm && a.H_mm == b.H_mm && a.glued_fraction == b.glued_fraction &&
         a.E_GPa == b.E_GPa && a.nu == b.nu && a.kappaN_GPa_per_m == b.kappaN_GPa_per_m &&
         a.kappaT_over_kappaN == b.kappaT_over_kappaN &&
         a.kappaH_over_kappaT == b.kappaH_over_kappaT && a.kappaG == b.kappaG &&
         a.aI_J_per_m2 == b.aI_J_per_m2 &&
         a.sigma_yield_from_factor == b.sigma_yield_from_factor &&
         a.sigma_yield_MPa == b.sigma_yield_MPa &&
         a.sigma_yield_factor == b.sigma_yield_factor && a.direction_x == b.direction_x &&
         a.direction_y == b.direction_y && a.velocity_mm_per_s == b.velocity_mm_per_s &&
         a.tau_s == b.tau_s && a.h_mm == b.h_mm && a.T_s == b.T_s &&
         a.out_dir == b.out_dir && a.snapshot_steps == b.snapshot_steps &&
         a.audit_seed == b.audit_seed && a.post_debond_steps == b.post_debond_steps &&
         a.stop_on_full_debond == b.stop_on_full_debond && a.qp_tol == b.qp_tol;
}

}  // namespace delam
