#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "delam/config.hpp"
#include "delam/diagnostics.hpp"
#include "delam/material.hpp"
#include "delam/mesh.hpp"
#include "delam/qp.hpp"
#include "delam/runner.hpp"

namespace py = pybind11;
using namespace delam;

namespace {

Eigen::VectorXd column(const std::vector<StepReport>& reports,
                       double (*get)(const StepReport&)) {
  Eigen::VectorXd out(reports.size());
  for (std::size_t k = 0; k < reports.size(); ++k) out[k] = get(reports[k]);
  return out;
}

py::dict run_to_dict(const RunConfig& config) {
  const RunResult result = execute_run(config);
  const auto& reports = result.history.step_reports;

  py::dict d;
  d["t"] = column(reports, [](const StepReport& r) { return r.t; });
  d["bulk"] = column(reports, [](const StepReport& r) { return r.bulk_energy; });
  d["interface"] = column(reports, [](const StepReport& r) { return r.interface_stored; });
  d["diss_R0"] = column(reports, [](const StepReport& r) { return r.dissipated_R0_cum; });
  d["diss_R1"] = column(reports, [](const StepReport& r) { return r.dissipated_R1_cum; });
  d["total"] = column(reports, [](const StepReport& r) { return r.total; });
  d["work"] = column(reports, [](const StepReport& r) { return r.work_cum; });
  d["gap"] = column(reports, [](const StepReport& r) { return r.imbalance_gap; });
  d["Fx"] = column(reports, [](const StepReport& r) { return r.reaction.x(); });
  d["Fy"] = column(reports, [](const StepReport& r) { return r.reaction.y(); });
  d["amdp_pi_lhs"] = column(reports, [](const StepReport& r) { return r.amdp_pi_lhs; });
  d["amdp_pi_rhs"] = column(reports, [](const StepReport& r) { return r.amdp_pi_rhs; });
  d["amdp_zeta_lhs"] = column(reports, [](const StepReport& r) { return r.amdp_zeta_lhs; });
  d["amdp_zeta_rhs"] = column(reports, [](const StepReport& r) { return r.amdp_zeta_rhs; });
  d["zeta_final"] = result.history.states.back().zeta;
  d["pi_final"] = result.history.states.back().pi;
  d["debond_step"] = result.debond_step;

  const MixityMap mixity = (result.history.states.size() > 1)
                               ? mixity_map(result.history, result.ops, result.material)
                               : MixityMap{};
  d["mixity_ratio"] = mixity.ratio;
  d["mixity_arc_length"] = mixity.arc_length;
  return d;
}

Eigen::VectorXd solve_dense_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                               const std::vector<int>& nonneg_set, double tol_kkt) {
  QpProblem p;
  p.H = H.sparseView();
  p.g = g;
  p.nonneg_set = nonneg_set;
  return solve_qp(p, nullptr, tol_kkt).x;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "2-D quasistatic rate-independent mixed-mode delamination simulator";

  py::class_<MaterialSpec>(m, "MaterialSpec")
      .def(py::init<>())
      .def_readwrite("young_modulus", &MaterialSpec::young_modulus)
      .def_readwrite("poisson_ratio", &MaterialSpec::poisson_ratio)
      .def_readwrite("kappa_N", &MaterialSpec::kappa_N)
      .def_readwrite("kappa_T", &MaterialSpec::kappa_T)
      .def_readwrite("kappa_H", &MaterialSpec::kappa_H)
      .def_readwrite("kappa_G", &MaterialSpec::kappa_G)
      .def_readwrite("a_I", &MaterialSpec::a_I)
      .def_readwrite("sigma_yield", &MaterialSpec::sigma_yield);

  m.def("lame_parameters", [](const MaterialSpec& spec) {
    const ElasticityTensor c = elasticity_tensor(spec);
    return py::make_tuple(c.lambda, c.mu);
  });
  m.def("mode_II_toughness", &mode_II_toughness);
  m.def("validate_material", [](const MaterialSpec& spec) {
    const ValidationReport report = validate(spec);
    py::list issues;
    for (const auto& issue : report.issues) {
      py::dict entry;
      entry["severity"] = issue.severity == ValidationIssue::Severity::Hard ? "hard"
                          : issue.severity == ValidationIssue::Severity::Warning
                              ? "warning"
                              : "info";
      entry["message"] = issue.message;
      issues.append(entry);
    }
    py::dict d;
    d["ok"] = report.ok();
    d["issues"] = issues;
    d["yield_lower"] = report.yield_lower;
    d["yield_upper"] = report.yield_upper;
    return d;
  });

  py::class_<Mesh2D>(m, "Mesh2D")
      .def_property_readonly("num_vertices", &Mesh2D::num_vertices)
      .def_property_readonly("num_triangles", &Mesh2D::num_triangles)
      .def_property_readonly("num_interface_nodes", &Mesh2D::num_interface_nodes)
      .def_property_readonly("num_interface_edges", &Mesh2D::num_interface_edges)
      .def_readonly("h", &Mesh2D::h)
      .def("interface_length", &Mesh2D::interface_length)
      .def("to_json", &Mesh2D::to_json);
  m.def("build_rectangle_mesh", &build_rectangle_mesh, py::arg("length"), py::arg("height"),
        py::arg("glued_fraction"), py::arg("h_target"));

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("L_mm", &RunConfig::L_mm)
      .def_readwrite("H_mm", &RunConfig::H_mm)
      .def_readwrite("glued_fraction", &RunConfig::glued_fraction)
      .def_readwrite("E_GPa", &RunConfig::E_GPa)
      .def_readwrite("nu", &RunConfig::nu)
      .def_readwrite("kappaN_GPa_per_m", &RunConfig::kappaN_GPa_per_m)
      .def_readwrite("kappaT_over_kappaN", &RunConfig::kappaT_over_kappaN)
      .def_readwrite("kappaH_over_kappaT", &RunConfig::kappaH_over_kappaT)
      .def_readwrite("kappaG", &RunConfig::kappaG)
      .def_readwrite("aI_J_per_m2", &RunConfig::aI_J_per_m2)
      .def_readwrite("sigma_yield_from_factor", &RunConfig::sigma_yield_from_factor)
      .def_readwrite("sigma_yield_MPa", &RunConfig::sigma_yield_MPa)
      .def_readwrite("sigma_yield_factor", &RunConfig::sigma_yield_factor)
      .def_readwrite("direction_x", &RunConfig::direction_x)
      .def_readwrite("direction_y", &RunConfig::direction_y)
      .def_readwrite("velocity_mm_per_s", &RunConfig::velocity_mm_per_s)
      .def_readwrite("tau_s", &RunConfig::tau_s)
      .def_readwrite("h_mm", &RunConfig::h_mm)
      .def_readwrite("T_s", &RunConfig::T_s)
      .def_readwrite("snapshot_steps", &RunConfig::snapshot_steps)
      .def_readwrite("audit_seed", &RunConfig::audit_seed)
      .def_readwrite("post_debond_steps", &RunConfig::post_debond_steps)
      .def_readwrite("stop_on_full_debond", &RunConfig::stop_on_full_debond)
      .def_readwrite("qp_tol", &RunConfig::qp_tol)
      .def("material", &RunConfig::material)
      .def("to_json", &serialize_config);
  m.def("preset_paper_pull_push", &preset_paper_pull_push);
  m.def("config_from_json", &parse_config);

  m.def("run", &run_to_dict, py::arg("config"),
        "Execute the time loop and return the per-step diagnostics as arrays.");
  m.def("solve_qp", &solve_dense_qp, py::arg("H"), py::arg("g"), py::arg("nonneg_set"),
        py::arg("tol_kkt") = 1e-9,
        "Minimize 1/2 x.H x + g.x subject to x_i >= 0 on nonneg_set (dense helper).");
}
