// commands.hpp
//
// Subcommands of the gml tool. Each returns the process exit code:
//   0  success (converged / within tolerance)
//   1  input error (missing file, malformed config, bad arguments)
//   2  numerical outcome failure (no convergence, divergence, no root,
//      differences above tolerance)

#ifndef GML_CLI_COMMANDS_HPP
#define GML_CLI_COMMANDS_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gml/cli/csv.hpp"

namespace gml::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNotConverged = 2;

struct SolveOptions {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::string> report;
};

struct OracleOptions {
  std::string config;
  std::optional<std::string> integrator;
  std::optional<std::string> out;
  std::optional<std::string> report;
};

struct CompareOptions {
  std::string first;
  std::string second;
  double tol = 1e-6;
  std::optional<std::string> report;
};

int cmd_solve(const SolveOptions& options, std::ostream& log);
int cmd_oracle(const OracleOptions& options, std::ostream& log);
/// Writes the difference report (JSON) to `out` and, if requested, to a file.
int cmd_compare(const CompareOptions& options, std::ostream& out, std::ostream& log);
/// Prints the expanded preset config to `out`.
int cmd_preset(const std::string& name, std::ostream& out, std::ostream& log);

struct ColumnDiff {
  std::string label;
  double max_abs = 0.0;
  /// max_abs divided by the column's largest magnitude in either file
  double max_rel = 0.0;
};

/// Per-column differences between two trajectory tables on the same grid.
/// Throws InvalidInput when headers or time columns disagree.
std::vector<ColumnDiff> compare_tables(const CsvTable& a, const CsvTable& b);

}  // namespace gml::cli

#endif  // GML_CLI_COMMANDS_HPP
