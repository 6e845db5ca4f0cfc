// gml: solve two-point boundary value problems with the proximal relaxation
// scheme, run the shooting oracle, and compare trajectories.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gml/cli/commands.hpp"

namespace {

template <typename T>
std::optional<T> given(const CLI::Option* opt, const T& value) {
  return opt->count() ? std::optional<T>(value) : std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relaxation BVP solver with a shooting oracle"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::string report;

  auto* solve = app.add_subcommand("solve", "Run the relaxation solver on a config");
  solve->add_option("config", config, "JSON run config")->required();
  auto* solve_out = solve->add_option("--out", out, "Trajectory CSV path");
  auto* solve_report = solve->add_option("--report", report, "Report JSON path");

  std::string integrator;
  auto* oracle = app.add_subcommand("oracle", "Run the shooting oracle on a config");
  oracle->add_option("config", config, "JSON run config")->required();
  auto* oracle_integrator = oracle->add_option("--integrator", integrator, "euler or rk4");
  auto* oracle_out = oracle->add_option("--out", out, "Trajectory CSV path");
  auto* oracle_report = oracle->add_option("--report", report, "Report JSON path");

  gml::cli::CompareOptions compare_opts;
  auto* compare = app.add_subcommand("compare", "Compare two trajectory CSV files");
  compare->add_option("first", compare_opts.first, "First CSV")->required();
  compare->add_option("second", compare_opts.second, "Second CSV")->required();
  compare->add_option("--tol", compare_opts.tol, "Relative tolerance per column")
      ->capture_default_str();
  auto* compare_report = compare->add_option("--report", report, "Write the difference report here too");

  std::string preset_name;
  auto* preset = app.add_subcommand("preset", "Print the expanded config of a named preset");
  preset->add_option("name", preset_name, "a320-climb or harmonic-oscillator")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gml::cli::kExitInputError;
  }

  if (*solve) {
    return gml::cli::cmd_solve({config, given(solve_out, out), given(solve_report, report)}, std::cerr);
  }
  if (*oracle) {
    return gml::cli::cmd_oracle(
        {config, given(oracle_integrator, integrator), given(oracle_out, out), given(oracle_report, report)},
        std::cerr);
  }
  if (*compare) {
    compare_opts.report = given(compare_report, report);
    return gml::cli::cmd_compare(compare_opts, std::cout, std::cerr);
  }
  return gml::cli::cmd_preset(preset_name, std::cout, std::cerr);
}
