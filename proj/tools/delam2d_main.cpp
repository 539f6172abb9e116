#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "delam/config.hpp"
#include "delam/runner.hpp"

namespace {

delam::RunConfig resolve_config(const std::string& config_path, const std::string& preset) {
  if (!preset.empty()) {
    if (preset != "paper_pull_push")
      throw std::invalid_argument("unknown preset '" + preset + "'");
    delam::RunConfig config = delam::preset_paper_pull_push();
    if (!config_path.empty()) config = delam::load_config_file(config_path);
    return config;
  }
  if (config_path.empty())
    throw std::invalid_argument("either --config or --preset is required");
  return delam::load_config_file(config_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2-D quasistatic mixed-mode delamination simulator"};
  app.require_subcommand(1);

  std::string config_path, preset, out_dir;
  int levels = 3;

  auto* run_cmd = app.add_subcommand("run", "run a simulation and write result files");
  run_cmd->add_option("--config", config_path, "JSON config file");
  run_cmd->add_option("--preset", preset, "built-in preset (paper_pull_push)");
  run_cmd->add_option("--out", out_dir, "output directory")->required();

  auto* conv_cmd = app.add_subcommand("converge", "run the (tau, h) refinement ladder");
  conv_cmd->add_option("--config", config_path, "JSON config file");
  conv_cmd->add_option("--preset", preset, "built-in preset (paper_pull_push)");
  conv_cmd->add_option("--levels", levels, "number of refinement levels")->required();
  conv_cmd->add_option("--out", out_dir, "output directory")->required();

  auto* validate_cmd = app.add_subcommand("validate", "check config and material parameters");
  validate_cmd->add_option("--config", config_path, "JSON config file");
  validate_cmd->add_option("--preset", preset, "built-in preset (paper_pull_push)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const delam::RunConfig config = resolve_config(config_path, preset);
      return delam::run_benchmark(config, out_dir);
    }
    if (conv_cmd->parsed()) {
      const delam::RunConfig config = resolve_config(config_path, preset);
      const delam::ConvergenceResult result = delam::convergence_study(config, levels);
      const int status = delam::write_convergence_artifacts(result, out_dir);
      for (std::size_t pair = 0; pair < result.sup_differences.size(); ++pair)
        std::cout << "levels " << pair << " vs " << pair + 1
                  << ": sup |total difference| = " << result.sup_differences[pair] << "\n";
      return status;
    }
    if (validate_cmd->parsed()) {
      const delam::RunConfig config = resolve_config(config_path, preset);
      config.check();
      const delam::MaterialSpec material = config.material();
      const delam::ValidationReport report = delam::validate(material);
      std::cout << report.summary();
      std::cout << "sigma_yield = " << material.sigma_yield * 1e-6 << " MPa, bounds ("
                << report.yield_lower * 1e-6 << ", " << report.yield_upper * 1e-6
                << "] MPa\n";
      std::cout << "a_II = " << delam::mode_II_toughness(material) << " J/m^2, a_II/a_I = "
                << delam::mode_II_toughness(material) / material.a_I << "\n";
      return report.ok() ? 0 : 1;
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
