// config.hpp
//
// JSON run configuration for the gml command-line tool.
//
// A config either names a preset
//
//     { "problem": "a320-climb" }
//
// or spells the problem out, selecting the right-hand side from the compiled
// registry:
//
//     {
//       "problem": {
//         "system": "harmonic-oscillator",   // zero | scalar-linear |
//                                            // harmonic-oscillator | flight
//         "omega": 1.0,
//         "t_final": 1.5707963267948966,
//         "fixed_at_start": { "1": 0.0 },
//         "fixed_at_end":   { "1": 1.0 }
//       },
//       "n_nodes": 2000,
//       "relax_k": 500,
//       "outer_tol": 1e-8,
//       "max_outer_iter": 20000,
//       "newton_tol": 1e-10,
//       "newton_max_iter": 50,
//       "endpoint_error_term": "lagged",      // lagged | dropped
//       "free_start_defaults": { "2": 0.5 },
//       "oracle": { "integrator": "euler", "root_tol": 1e-10,
//                   "max_root_iter": 200, "guesses": [[0.5], [1.5]] },
//       "output": { "trajectory": "solution.csv", "report": "report.json",
//                   "oracle_trajectory": "oracle.csv",
//                   "oracle_report": "oracle_report.json" }
//     }
//
// Top-level keys next to a preset name override the preset's values.
// Component indices are 1-based. Unknown keys are rejected.

#ifndef GML_CLI_CONFIG_HPP
#define GML_CLI_CONFIG_HPP

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gml/flight.hpp"
#include "gml/relaxation.hpp"
#include "gml/shooting.hpp"
#include "gml/types.hpp"

namespace gml::cli {

class ConfigFileError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

enum class SystemKind { zero, scalar_linear, harmonic_oscillator, flight };

struct OracleSettings {
  Integrator integrator = Integrator::euler;
  double root_tol = 1e-10;
  int max_root_iter = 200;
  std::vector<std::vector<double>> guesses;
};

struct OutputPaths {
  std::string trajectory = "solution.csv";
  std::string report = "solution_report.json";
  std::string oracle_trajectory = "oracle.csv";
  std::string oracle_report = "oracle_report.json";
};

struct RunConfig {
  std::string name = "custom";  // preset name, or "custom"
  SystemKind system = SystemKind::zero;
  Index dimension = 1;
  double t_final = 1.0;
  double rate = 0.0;    // scalar-linear
  double offset = 0.0;  // scalar-linear
  double omega = 1.0;   // harmonic-oscillator
  flight::FlightParams<double> flight;
  std::map<Index, double> fixed_at_start;
  std::map<Index, double> fixed_at_end;

  Index n_nodes = 1000;
  RelaxationParamsD relaxation;
  std::map<Index, double> free_start_defaults;
  OracleSettings oracle;
  OutputPaths output;

  /// CSV header labels, starting with "t".
  std::vector<std::string> column_labels() const;
};

/// Names accepted as `"problem": "<name>"`.
std::vector<std::string> preset_names();

/// The fully expanded config for a preset, in the same schema parse_config
/// reads.
nlohmann::json preset_json(std::string_view name);

/// Throws InvalidInput on malformed or unknown keys and on values that do
/// not describe a valid problem.
RunConfig parse_config(const nlohmann::json& doc);

/// Reads and parses a config file. A missing or unreadable file throws
/// ConfigFileError; bad contents throw InvalidInput.
RunConfig load_config(const std::filesystem::path& path);

OdeSystemD build_system(const RunConfig& config);
BvpProblem<double> build_problem(const RunConfig& config);
ShootingConfig<double> build_shooting(const RunConfig& config);

Integrator parse_integrator(std::string_view name);

}  // namespace gml::cli

#endif  // GML_CLI_CONFIG_HPP
