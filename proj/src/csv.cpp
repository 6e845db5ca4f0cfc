#include "gml/cli/csv.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace gml::cli {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& field, std::size_t line_no) {
  // strtod accepts everything we write (including exponents); reject
  // trailing garbage.
  const char* begin = field.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (field.empty() || end != begin + field.size()) {
    throw InvalidInput("csv: non-numeric field \"" + field + "\" on line " + std::to_string(line_no));
  }
  return value;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const TrajectoryD& trajectory,
                          const std::vector<std::string>& labels) {
  if (static_cast<Index>(labels.size()) != trajectory.dimension() + 1) {
    throw InvalidInput("csv: label count does not match the trajectory dimension");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) out << (i ? "," : "") << labels[i];
  out << '\n';
  out << std::setprecision(17);
  const auto& grid = trajectory.grid();
  for (Index k = 0; k < trajectory.node_count(); ++k) {
    out << grid.time(k);
    for (Index j = 0; j < trajectory.dimension(); ++j) out << ',' << trajectory.values()(k, j);
    out << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryD& trajectory,
                          const std::vector<std::string>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write \"" + path.string() + "\"");
  write_trajectory_csv(out, trajectory, labels);
  if (!out) throw InvalidInput("error writing \"" + path.string() + "\"");
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("csv: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split(line);
  if (table.header.empty()) throw InvalidInput("csv: empty header");

  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != table.header.size()) {
      throw InvalidInput("csv: line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                         " fields, header has " + std::to_string(table.header.size()));
    }
    for (const auto& f : fields) values.push_back(parse_number(f, line_no));
    ++rows;
  }
  const auto cols = static_cast<Index>(table.header.size());
  table.data = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Index>(rows), cols);
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open \"" + path.string() + "\"");
  return read_csv(in);
}

}  // namespace gml::cli
