#include "gml/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "gml/systems.hpp"

namespace gml::cli {

using nlohmann::json;

namespace {

constexpr std::string_view kClimbPreset = "a320-climb";
constexpr std::string_view kOscillatorPreset = "harmonic-oscillator";

[[noreturn]] void fail(const std::string& what) { throw InvalidInput("config: " + what); }

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) fail("unknown key \"" + key + "\" in " + where);
  }
}

const json& require_object(const json& v, const std::string& where) {
  if (!v.is_object()) fail(where + " must be an object");
  return v;
}

double number(const json& v, const std::string& key) {
  if (!v.is_number()) fail("\"" + key + "\" must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail("\"" + key + "\" must be finite");
  return x;
}

long long integer(const json& v, const std::string& key) {
  if (!v.is_number_integer()) fail("\"" + key + "\" must be an integer");
  return v.get<long long>();
}

std::string text(const json& v, const std::string& key) {
  if (!v.is_string()) fail("\"" + key + "\" must be a string");
  return v.get<std::string>();
}

std::map<Index, double> index_map(const json& v, const std::string& key) {
  require_object(v, "\"" + key + "\"");
  std::map<Index, double> out;
  for (const auto& [k, value] : v.items()) {
    std::size_t used = 0;
    long long idx = 0;
    try {
      idx = std::stoll(k, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != k.size() || k.empty()) fail("component key \"" + k + "\" in \"" + key + "\" is not an integer");
    out[static_cast<Index>(idx)] = number(value, key + "." + k);
  }
  return out;
}

json index_map_json(const std::map<Index, double>& m) {
  json out = json::object();
  for (const auto& [k, v] : m) out[std::to_string(k)] = v;
  return out;
}

SystemKind parse_system(const std::string& name) {
  if (name == "zero") return SystemKind::zero;
  if (name == "scalar-linear") return SystemKind::scalar_linear;
  if (name == "harmonic-oscillator") return SystemKind::harmonic_oscillator;
  if (name == "flight") return SystemKind::flight;
  fail("unknown system \"" + name + "\" (expected zero, scalar-linear, harmonic-oscillator or flight)");
}

EndpointErrorTerm parse_error_term(const std::string& name) {
  if (name == "lagged") return EndpointErrorTerm::lagged;
  if (name == "dropped") return EndpointErrorTerm::dropped;
  fail("endpoint_error_term must be \"lagged\" or \"dropped\"");
}

void parse_flight_params(const json& v, flight::FlightParams<double>& p) {
  require_object(v, "\"flight_params\"");
  reject_unknown(v,
                 {"mass", "wing_area", "angle_of_attack", "thrust_offset", "gravity", "cd0", "k1", "k2",
                  "cl_alpha", "thrust"},
                 "\"flight_params\"");
  const auto set = [&](const char* key, double& field) {
    if (v.contains(key)) field = number(v.at(key), key);
  };
  set("mass", p.mass);
  set("wing_area", p.wing_area);
  set("angle_of_attack", p.angle_of_attack);
  set("thrust_offset", p.thrust_offset);
  set("gravity", p.gravity);
  set("cd0", p.cd0);
  set("k1", p.k1);
  set("k2", p.k2);
  set("cl_alpha", p.cl_alpha);
  set("thrust", p.thrust);
  p.validate();
}

json flight_params_json(const flight::FlightParams<double>& p) {
  return {{"mass", p.mass},         {"wing_area", p.wing_area}, {"angle_of_attack", p.angle_of_attack},
          {"thrust_offset", p.thrust_offset}, {"gravity", p.gravity},     {"cd0", p.cd0},
          {"k1", p.k1},             {"k2", p.k2},               {"cl_alpha", p.cl_alpha},
          {"thrust", p.thrust}};
}

void parse_problem_object(const json& v, RunConfig& cfg) {
  require_object(v, "\"problem\"");
  reject_unknown(v,
                 {"system", "dimension", "rate", "offset", "omega", "flight_params", "t_final",
                  "fixed_at_start", "fixed_at_end"},
                 "\"problem\"");
  if (!v.contains("system")) fail("\"problem\" needs a \"system\"");
  cfg.system = parse_system(text(v.at("system"), "system"));
  switch (cfg.system) {
    case SystemKind::zero:
      cfg.dimension = v.contains("dimension") ? static_cast<Index>(integer(v.at("dimension"), "dimension")) : 1;
      break;
    case SystemKind::scalar_linear:
      cfg.dimension = 1;
      break;
    case SystemKind::harmonic_oscillator:
      cfg.dimension = 2;
      break;
    case SystemKind::flight:
      cfg.dimension = 4;
      break;
  }
  if (v.contains("dimension") && cfg.system != SystemKind::zero &&
      integer(v.at("dimension"), "dimension") != cfg.dimension) {
    fail("\"dimension\" does not match the selected system");
  }
  const auto only_for = [&](const char* key, SystemKind kind) {
    if (v.contains(key) && cfg.system != kind) fail(std::string("\"") + key + "\" does not apply to this system");
  };
  only_for("rate", SystemKind::scalar_linear);
  only_for("offset", SystemKind::scalar_linear);
  only_for("omega", SystemKind::harmonic_oscillator);
  only_for("flight_params", SystemKind::flight);
  if (v.contains("rate")) cfg.rate = number(v.at("rate"), "rate");
  if (v.contains("offset")) cfg.offset = number(v.at("offset"), "offset");
  if (v.contains("omega")) cfg.omega = number(v.at("omega"), "omega");
  if (v.contains("flight_params")) parse_flight_params(v.at("flight_params"), cfg.flight);

  if (!v.contains("t_final")) fail("\"problem\" needs \"t_final\"");
  cfg.t_final = number(v.at("t_final"), "t_final");
  cfg.fixed_at_start = v.contains("fixed_at_start") ? index_map(v.at("fixed_at_start"), "fixed_at_start")
                                                    : std::map<Index, double>{};
  cfg.fixed_at_end = v.contains("fixed_at_end") ? index_map(v.at("fixed_at_end"), "fixed_at_end")
                                                : std::map<Index, double>{};
}

void parse_oracle(const json& v, OracleSettings& o) {
  require_object(v, "\"oracle\"");
  reject_unknown(v, {"integrator", "root_tol", "max_root_iter", "guesses"}, "\"oracle\"");
  if (v.contains("integrator")) o.integrator = parse_integrator(text(v.at("integrator"), "integrator"));
  if (v.contains("root_tol")) o.root_tol = number(v.at("root_tol"), "root_tol");
  if (v.contains("max_root_iter")) o.max_root_iter = static_cast<int>(integer(v.at("max_root_iter"), "max_root_iter"));
  if (v.contains("guesses")) {
    const auto& g = v.at("guesses");
    if (!g.is_array()) fail("\"guesses\" must be an array of arrays");
    o.guesses.clear();
    for (const auto& row : g) {
      if (!row.is_array()) fail("\"guesses\" must be an array of arrays");
      std::vector<double> values;
      for (const auto& x : row) values.push_back(number(x, "guesses"));
      o.guesses.push_back(std::move(values));
    }
  }
}

void parse_output(const json& v, OutputPaths& out) {
  require_object(v, "\"output\"");
  reject_unknown(v, {"trajectory", "report", "oracle_trajectory", "oracle_report"}, "\"output\"");
  if (v.contains("trajectory")) out.trajectory = text(v.at("trajectory"), "trajectory");
  if (v.contains("report")) out.report = text(v.at("report"), "report");
  if (v.contains("oracle_trajectory")) out.oracle_trajectory = text(v.at("oracle_trajectory"), "oracle_trajectory");
  if (v.contains("oracle_report")) out.oracle_report = text(v.at("oracle_report"), "oracle_report");
}

}  // namespace

Integrator parse_integrator(std::string_view name) {
  if (name == "euler") return Integrator::euler;
  if (name == "rk4") return Integrator::rk4;
  throw InvalidInput("unknown integrator \"" + std::string(name) + "\" (expected euler or rk4)");
}

std::vector<std::string> RunConfig::column_labels() const {
  if (system == SystemKind::flight) return {"t", "h", "gamma", "V", "x"};
  std::vector<std::string> out{"t"};
  for (Index j = 1; j <= dimension; ++j) out.push_back("u" + std::to_string(j));
  return out;
}

std::vector<std::string> preset_names() {
  return {std::string(kClimbPreset), std::string(kOscillatorPreset)};
}

json preset_json(std::string_view name) {
  if (name == kClimbPreset) {
    const flight::FlightParams<double> params;
    const RelaxationParamsD relax;
    const auto bc = flight::climb_boundary_conditions<double>();
    return {
        {"problem",
         {{"system", "flight"},
          {"flight_params", flight_params_json(params)},
          {"t_final", flight::kClimbTime},
          {"fixed_at_start", index_map_json(bc.fixed_at_start)},
          {"fixed_at_end", index_map_json(bc.fixed_at_end)}}},
        {"n_nodes", flight::kClimbNodes},
        {"relax_k", relax.relax_k},
        {"outer_tol", relax.outer_tol},
        {"max_outer_iter", relax.max_outer_iter},
        {"newton_tol", relax.newton_tol},
        {"newton_max_iter", relax.newton_max_iter},
        {"endpoint_error_term", "lagged"},
        {"free_start_defaults", {{"2", flight::kDefaultPathAngle}}},
        {"oracle",
         {{"integrator", "euler"}, {"root_tol", 1e-10}, {"max_root_iter", 200}, {"guesses", {{0.0}, {0.1}}}}},
    };
  }
  if (name == kOscillatorPreset) {
    return {
        {"problem",
         {{"system", "harmonic-oscillator"},
          {"omega", 1.0},
          {"t_final", std::numbers::pi / 2},
          {"fixed_at_start", {{"1", 0.0}}},
          {"fixed_at_end", {{"1", 1.0}}}}},
        {"n_nodes", 2000},
        {"relax_k", 500.0},
        {"outer_tol", 1e-8},
        {"max_outer_iter", 20000},
        {"newton_tol", 1e-10},
        {"newton_max_iter", 50},
        {"endpoint_error_term", "lagged"},
        {"free_start_defaults", json::object()},
        {"oracle",
         {{"integrator", "euler"}, {"root_tol", 1e-12}, {"max_root_iter", 200}, {"guesses", {{0.5}, {1.5}}}}},
    };
  }
  throw InvalidInput("config: unknown preset \"" + std::string(name) + "\"");
}

RunConfig parse_config(const json& input) {
  require_object(input, "config");
  reject_unknown(input,
                 {"problem", "n_nodes", "relax_k", "outer_tol", "max_outer_iter", "newton_tol",
                  "newton_max_iter", "endpoint_error_term", "free_start_defaults", "oracle", "output"},
                 "config");
  if (!input.contains("problem")) fail("missing \"problem\"");

  // Expand a preset name, then let explicit top-level keys override it.
  json doc = input;
  RunConfig cfg;
  if (input.at("problem").is_string()) {
    const std::string name = input.at("problem").get<std::string>();
    json expanded = preset_json(name);
    for (const auto& [key, value] : input.items()) {
      if (key != "problem") expanded[key] = value;
    }
    doc = std::move(expanded);
    cfg.name = name;
  }

  parse_problem_object(doc.at("problem"), cfg);

  if (doc.contains("n_nodes")) cfg.n_nodes = static_cast<Index>(integer(doc.at("n_nodes"), "n_nodes"));
  auto& r = cfg.relaxation;
  if (doc.contains("relax_k")) r.relax_k = number(doc.at("relax_k"), "relax_k");
  if (doc.contains("outer_tol")) r.outer_tol = number(doc.at("outer_tol"), "outer_tol");
  if (doc.contains("max_outer_iter")) r.max_outer_iter = static_cast<int>(integer(doc.at("max_outer_iter"), "max_outer_iter"));
  if (doc.contains("newton_tol")) r.newton_tol = number(doc.at("newton_tol"), "newton_tol");
  if (doc.contains("newton_max_iter")) r.newton_max_iter = static_cast<int>(integer(doc.at("newton_max_iter"), "newton_max_iter"));
  if (doc.contains("endpoint_error_term")) {
    r.endpoint_error_term = parse_error_term(text(doc.at("endpoint_error_term"), "endpoint_error_term"));
  }
  if (doc.contains("free_start_defaults")) {
    cfg.free_start_defaults = index_map(doc.at("free_start_defaults"), "free_start_defaults");
  }
  if (doc.contains("oracle")) parse_oracle(doc.at("oracle"), cfg.oracle);
  if (doc.contains("output")) parse_output(doc.at("output"), cfg.output);

  r.validate();
  // Builds the grid and checks the boundary conditions against the system.
  (void)build_problem(cfg);
  for (const auto& [j, value] : cfg.free_start_defaults) {
    if (j < 1 || j > cfg.dimension || cfg.fixed_at_start.count(j)) {
      fail("free_start_defaults key " + std::to_string(j) + " is not a free-at-start component");
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigFileError("cannot open config file \"" + path.string() + "\"");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput("config: malformed JSON in \"" + path.string() + "\": " + e.what());
  }
  return parse_config(doc);
}

OdeSystemD build_system(const RunConfig& config) {
  switch (config.system) {
    case SystemKind::zero:
      return systems::zero<double>(config.dimension);
    case SystemKind::scalar_linear:
      return systems::scalar_linear<double>(config.rate, config.offset);
    case SystemKind::harmonic_oscillator:
      return systems::harmonic_oscillator<double>(config.omega);
    case SystemKind::flight:
      return flight::flight_system<double>(config.flight);
  }
  throw InvalidInput("config: unknown system");
}

BvpProblem<double> build_problem(const RunConfig& config) {
  BoundaryConditionsD bc;
  bc.dimension = config.dimension;
  bc.fixed_at_start = config.fixed_at_start;
  bc.fixed_at_end = config.fixed_at_end;
  return BvpProblem<double>(build_system(config), std::move(bc), make_grid(config.n_nodes, config.t_final));
}

ShootingConfig<double> build_shooting(const RunConfig& config) {
  ShootingConfig<double> out;
  out.integrator = config.oracle.integrator;
  out.root_tol = config.oracle.root_tol;
  out.max_root_iter = config.oracle.max_root_iter;
  for (const auto& g : config.oracle.guesses) {
    out.guesses.push_back(Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Index>(g.size())));
  }
  if (out.guesses.empty()) {
    // Start Newton from the solver's free-start defaults.
    Vector<double> start(static_cast<Index>(config.dimension - config.fixed_at_start.size()));
    Index i = 0;
    for (Index j = 1; j <= config.dimension; ++j) {
      if (config.fixed_at_start.count(j)) continue;
      const auto it = config.free_start_defaults.find(j);
      start[i++] = it == config.free_start_defaults.end() ? 0.0 : it->second;
    }
    out.guesses.push_back(start);
  }
  out.validate();
  return out;
}

}  // namespace gml::cli
