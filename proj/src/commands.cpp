#include "gml/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "gml/cli/config.hpp"
#include "gml/relaxation.hpp"
#include "gml/shooting.hpp"

namespace gml::cli {

using nlohmann::json;

namespace {

void write_json(const std::string& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write \"" + path + "\"");
  out << doc.dump(2) << '\n';
}

json free_start_json(const RunConfig& cfg, const TrajectoryD& u) {
  json out = json::object();
  for (Index j = 1; j <= cfg.dimension; ++j) {
    if (!cfg.fixed_at_start.count(j)) out[std::to_string(j)] = u(0, j);
  }
  return out;
}

json base_report(const std::string& command, const RunConfig& cfg) {
  return {{"command", command},
          {"problem", cfg.name},
          {"n_nodes", cfg.n_nodes},
          {"t_final", cfg.t_final},
          {"columns", cfg.column_labels()}};
}

/// Runs `body` and maps library exceptions onto exit codes.
template <typename Body>
int guarded(std::ostream& log, Body&& body) {
  try {
    return body();
  } catch (const ConfigFileError& e) {
    log << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const InvalidInput& e) {
    log << "error: invalid input: " << e.what() << '\n';
    return kExitInputError;
  } catch (const Divergence& e) {
    log << "error: solver diverged: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const ConvergenceFailure& e) {
    log << "error: no convergence: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const SingularMatrix& e) {
    log << "error: numerical failure: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const RhsError& e) {
    log << "error: right-hand side failed: " << e.what() << '\n';
    return kExitNotConverged;
  }
}

}  // namespace

int cmd_solve(const SolveOptions& options, std::ostream& log) {
  return guarded(log, [&] {
    const RunConfig cfg = load_config(options.config);
    const auto problem = build_problem(cfg);
    const std::string out_path = options.out.value_or(cfg.output.trajectory);
    const std::string report_path = options.report.value_or(cfg.output.report);

    json report = base_report("solve", cfg);
    report["relax_k"] = cfg.relaxation.relax_k;
    report["outer_tol"] = cfg.relaxation.outer_tol;
    report["endpoint_error_term"] =
        cfg.relaxation.endpoint_error_term == EndpointErrorTerm::lagged ? "lagged" : "dropped";

    Solution<double> solution{initial_guess(problem, cfg.free_start_defaults), {}};
    try {
      solution = solve(problem, cfg.relaxation, cfg.free_start_defaults);
    } catch (const Divergence& e) {
      report["status"] = "diverged";
      report["converged"] = false;
      report["failure"] = e.what();
      write_json(report_path, report);
      throw;
    }

    const auto& r = solution.report;
    report["status"] = r.converged ? "converged" : "not_converged";
    report["converged"] = r.converged;
    report["outer_iterations"] = r.outer_iterations;
    report["residual_history"] = r.residual_history;
    report["endpoint_discrepancy_history"] = r.discrepancy_history;
    report["endpoint_discrepancy"] = r.discrepancy_history.empty() ? 0.0 : r.discrepancy_history.back();
    report["newton_failures"] = r.newton_failures;
    report["final_euler_residual"] = r.final_euler_residual;
    report["free_start_values"] = free_start_json(cfg, solution.trajectory);
    if (!r.failure.empty()) report["failure"] = r.failure;

    write_trajectory_csv(out_path, solution.trajectory, cfg.column_labels());
    write_json(report_path, report);

    log << (r.converged ? "converged" : "not converged") << " after " << r.outer_iterations
        << " outer iterations; euler residual " << r.final_euler_residual << '\n';
    if (!r.failure.empty()) log << "stopped: " << r.failure << '\n';
    return r.converged ? kExitOk : kExitNotConverged;
  });
}

int cmd_oracle(const OracleOptions& options, std::ostream& log) {
  return guarded(log, [&] {
    RunConfig cfg = load_config(options.config);
    if (options.integrator) cfg.oracle.integrator = parse_integrator(*options.integrator);
    const auto problem = build_problem(cfg);
    const auto shooting = build_shooting(cfg);
    const std::string out_path = options.out.value_or(cfg.output.oracle_trajectory);
    const std::string report_path = options.report.value_or(cfg.output.oracle_report);

    json report = base_report("oracle", cfg);
    report["integrator"] = to_string(shooting.integrator);
    report["root_tol"] = shooting.root_tol;

    ShootingResult<double> result{TrajectoryD(problem.grid(), problem.dimension()), {}, 0, 0.0, false, ""};
    try {
      result = solve_shooting(problem, shooting);
    } catch (const ConvergenceFailure& e) {
      report["status"] = "no_root";
      report["converged"] = false;
      report["failure"] = e.what();
      write_json(report_path, report);
      throw;
    }

    report["status"] = result.converged ? "converged" : "not_converged";
    report["converged"] = result.converged;
    report["method"] = result.method;
    report["iterations"] = result.iterations;
    report["mismatch_norm"] = result.mismatch_norm;
    report["free_start_values"] = free_start_json(cfg, result.trajectory);

    write_trajectory_csv(out_path, result.trajectory, cfg.column_labels());
    write_json(report_path, report);

    log << (result.converged ? "converged" : "not converged") << " (" << result.method << ", "
        << result.iterations << " iterations); terminal mismatch " << result.mismatch_norm << '\n';
    return result.converged ? kExitOk : kExitNotConverged;
  });
}

std::vector<ColumnDiff> compare_tables(const CsvTable& a, const CsvTable& b) {
  if (a.header != b.header) throw InvalidInput("compare: column headers differ");
  if (a.header.empty() || a.header.front() != "t") throw InvalidInput("compare: first column must be \"t\"");
  if (a.data.rows() != b.data.rows()) {
    throw InvalidInput("compare: grids differ (" + std::to_string(a.data.rows()) + " vs " +
                       std::to_string(b.data.rows()) + " rows)");
  }
  if (a.data.rows() == 0) throw InvalidInput("compare: no data rows");
  const double t_scale = std::max(1.0, a.data.col(0).cwiseAbs().maxCoeff());
  if ((a.data.col(0) - b.data.col(0)).cwiseAbs().maxCoeff() > 1e-12 * t_scale) {
    throw InvalidInput("compare: time columns differ");
  }

  std::vector<ColumnDiff> out;
  for (Index c = 1; c < a.data.cols(); ++c) {
    ColumnDiff diff;
    diff.label = a.header[static_cast<std::size_t>(c)];
    diff.max_abs = (a.data.col(c) - b.data.col(c)).cwiseAbs().maxCoeff();
    const double scale = std::max(a.data.col(c).cwiseAbs().maxCoeff(), b.data.col(c).cwiseAbs().maxCoeff());
    diff.max_rel = scale > 0.0 ? diff.max_abs / scale : diff.max_abs;
    out.push_back(diff);
  }
  return out;
}

int cmd_compare(const CompareOptions& options, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    if (!(options.tol >= 0.0)) throw InvalidInput("--tol must be non-negative");
    const auto diffs = compare_tables(read_csv(options.first), read_csv(options.second));
    json report = {{"command", "compare"}, {"first", options.first}, {"second", options.second},
                   {"tol", options.tol}};
    json columns = json::array();
    bool within = true;
    for (const auto& d : diffs) {
      const bool ok = d.max_rel <= options.tol;
      within = within && ok;
      columns.push_back({{"column", d.label}, {"max_abs", d.max_abs}, {"max_rel", d.max_rel}, {"within_tol", ok}});
    }
    report["columns"] = columns;
    report["within_tol"] = within;
    out << report.dump(2) << '\n';
    if (options.report) write_json(*options.report, report);
    return within ? kExitOk : kExitNotConverged;
  });
}

int cmd_preset(const std::string& name, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    out << preset_json(name).dump(2) << '\n';
    return kExitOk;
  });
}

}  // namespace gml::cli
