// csv.hpp
//
// Trajectory CSV files: header row "t,<labels>", one row per node,
// comma separated, LF line endings, 17 significant digits.

#ifndef GML_CLI_CSV_HPP
#define GML_CLI_CSV_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gml/types.hpp"

namespace gml::cli {

struct CsvTable {
  std::vector<std::string> header;
  /// rows x columns, column 0 is time
  Eigen::MatrixXd data;
};

/// `labels` must start with "t" and have dimension + 1 entries.
void write_trajectory_csv(std::ostream& out, const TrajectoryD& trajectory,
                          const std::vector<std::string>& labels);
void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryD& trajectory,
                          const std::vector<std::string>& labels);

/// Throws InvalidInput on ragged rows, non-numeric fields or a missing file.
CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace gml::cli

#endif  // GML_CLI_CSV_HPP
