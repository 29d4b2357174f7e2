#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "dcprox/bppa.hpp"
#include "dcprox/errors.hpp"
#include "dcprox/inertial.hpp"
#include "dcprox/problems.hpp"

namespace dcprox {

using nlohmann::json;

namespace detail {

inline void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
}

inline void reject_unknown_keys(const json& j, const std::string& where,
                                const std::set<std::string>& allowed) {
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

inline double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + " must be a number");
  return j.get<double>();
}

inline int as_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + " must be an integer");
  return j.get<int>();
}

inline bool as_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) throw ConfigError(where + " must be a boolean");
  return j.get<bool>();
}

inline std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + " must be a string");
  return j.get<std::string>();
}

inline Vector as_vector(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be an array of numbers");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = as_number(j[i], where + " entry");
  }
  return v;
}

inline Matrix as_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(where + " must be a nonempty array of rows");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw ConfigError(where + " rows must be nonempty arrays");
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw ConfigError(where + " rows must all have equal length");
    }
    for (std::size_t k = 0; k < cols; ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          as_number(j[i][k], where + " entry");
    }
  }
  return m;
}

}  // namespace detail

struct ProblemConfig {
  std::string name;
  json parameters = json::object();
  std::uint64_t seed = 0;
};

struct OutputConfig {
  std::optional<std::string> trace_path;
  std::optional<std::string> report_path;
  bool record_wall_time = false;
};

struct SolverConfig {
  SolverKind kind = SolverKind::bppa;
  std::optional<Vector> x0;
  std::optional<Vector> y0;  // inertial only
  BppaConfig bppa;
  InertialParams inertial_params;
  InertialOptions inertial_opts;
};

struct RunConfig {
  ProblemConfig problem;
  std::vector<SolverConfig> solvers;
  OutputConfig output;
  json echo;  // the parsed config, for report embedding and snapshots
};

namespace detail {

inline SolverConfig parse_solver_block(const json& j) {
  require_object(j, "solver");
  if (!j.contains("kind")) throw ConfigError("solver.kind is required");
  const std::string kind = as_string(j["kind"], "solver.kind");
  SolverConfig sc;
  if (kind == "bppa" || kind == "ppa") {
    sc.kind = kind == "bppa" ? SolverKind::bppa : SolverKind::ppa;
    reject_unknown_keys(j, "solver",
                        {"kind", "x0", "eta", "alpha", "lambda_hat",
                         "lambda_bar", "lambda_rule", "tol_d", "max_iter",
                         "max_armijo", "allow_m0", "f_floor"});
    BppaConfig& c = sc.bppa;
    if (j.contains("eta")) c.eta = as_number(j["eta"], "solver.eta");
    if (j.contains("alpha")) c.alpha = as_number(j["alpha"], "solver.alpha");
    if (j.contains("lambda_hat")) {
      c.lambda_hat = as_number(j["lambda_hat"], "solver.lambda_hat");
    }
    if (j.contains("lambda_bar")) {
      c.lambda_bar = as_number(j["lambda_bar"], "solver.lambda_bar");
    }
    if (j.contains("lambda_rule")) {
      const json& lr = j["lambda_rule"];
      require_object(lr, "solver.lambda_rule");
      reject_unknown_keys(lr, "solver.lambda_rule", {"kind", "value"});
      const std::string rk = as_string(lr.value("kind", json("constant")),
                                       "solver.lambda_rule.kind");
      if (rk == "constant") {
        c.lambda_rule.kind = LambdaRule::Kind::constant;
        if (lr.contains("value")) {
          c.lambda_rule.value = as_number(lr["value"], "solver.lambda_rule.value");
        }
      } else if (rk == "adaptive") {
        c.lambda_rule.kind = LambdaRule::Kind::adaptive;
        if (lr.contains("value")) {
          throw ConfigError("solver.lambda_rule: adaptive rule takes no value");
        }
      } else {
        throw ConfigError("solver.lambda_rule.kind must be constant or adaptive");
      }
    }
    if (j.contains("tol_d")) c.tol_d = as_number(j["tol_d"], "solver.tol_d");
    if (j.contains("max_iter")) c.max_iter = as_int(j["max_iter"], "solver.max_iter");
    if (j.contains("max_armijo")) {
      c.max_armijo = as_int(j["max_armijo"], "solver.max_armijo");
    }
    if (j.contains("allow_m0")) c.allow_m0 = as_bool(j["allow_m0"], "solver.allow_m0");
    if (j.contains("f_floor")) c.f_floor = as_number(j["f_floor"], "solver.f_floor");
  } else if (kind == "inertial") {
    sc.kind = SolverKind::inertial;
    reject_unknown_keys(j, "solver",
                        {"kind", "x0", "y0", "lambda", "mu", "alpha", "beta",
                         "gamma", "tau", "tol", "max_iter", "literal_quadratic",
                         "prefer_smooth_h", "delta_grid_points", "delta_grid",
                         "norm_ceiling"});
    InertialParams& p = sc.inertial_params;
    if (j.contains("lambda")) p.lambda = as_number(j["lambda"], "solver.lambda");
    if (j.contains("mu")) p.mu = as_number(j["mu"], "solver.mu");
    if (j.contains("alpha")) p.alpha = as_number(j["alpha"], "solver.alpha");
    if (j.contains("beta")) p.beta = as_number(j["beta"], "solver.beta");
    if (j.contains("gamma")) p.gamma = as_number(j["gamma"], "solver.gamma");
    if (j.contains("tau")) p.tau = as_number(j["tau"], "solver.tau");
    InertialOptions& o = sc.inertial_opts;
    if (j.contains("tol")) o.tol = as_number(j["tol"], "solver.tol");
    if (j.contains("max_iter")) o.max_iter = as_int(j["max_iter"], "solver.max_iter");
    if (j.contains("literal_quadratic")) {
      o.literal_quadratic = as_bool(j["literal_quadratic"], "solver.literal_quadratic");
    }
    if (j.contains("prefer_smooth_h")) {
      o.prefer_smooth_h = as_bool(j["prefer_smooth_h"], "solver.prefer_smooth_h");
    }
    if (j.contains("delta_grid_points")) {
      o.delta_grid_points = as_int(j["delta_grid_points"], "solver.delta_grid_points");
    }
    if (j.contains("delta_grid")) {
      const Vector dg = as_vector(j["delta_grid"], "solver.delta_grid");
      o.delta_grid = std::vector<double>(dg.begin(), dg.end());
    }
    if (j.contains("norm_ceiling")) {
      o.norm_ceiling = as_number(j["norm_ceiling"], "solver.norm_ceiling");
    }
    if (j.contains("y0")) sc.y0 = as_vector(j["y0"], "solver.y0");
  } else {
    throw ConfigError("solver.kind must be one of bppa, ppa, inertial");
  }
  if (j.contains("x0")) sc.x0 = as_vector(j["x0"], "solver.x0");
  return sc;
}

inline void apply_checks_block(const json& j, std::vector<SolverConfig>& solvers) {
  require_object(j, "checks");
  reject_unknown_keys(j, "checks", {"enabled", "slack"});
  if (j.contains("enabled")) {
    if (!j["enabled"].is_array()) {
      throw ConfigError("checks.enabled must be an array of check names");
    }
    std::set<std::string> enabled;
    for (const auto& e : j["enabled"]) {
      enabled.insert(as_string(e, "checks.enabled entry"));
    }
    const std::set<std::string> known = {"prox_descent", "step_descent",
                                         "energy_monotone", "lyapunov_descent"};
    for (const auto& name : enabled) {
      if (!known.count(name)) throw ConfigError("unknown check name '" + name + "'");
    }
    for (auto& sc : solvers) {
      sc.bppa.check_prox_descent = enabled.count("prox_descent") > 0;
      sc.bppa.check_step_descent = enabled.count("step_descent") > 0;
      sc.inertial_opts.check_energy = enabled.count("energy_monotone") > 0;
      sc.inertial_opts.check_lyapunov = enabled.count("lyapunov_descent") > 0;
    }
  }
  if (j.contains("slack")) {
    require_object(j["slack"], "checks.slack");
    for (const auto& item : j["slack"].items()) {
      const double s = as_number(item.value(), "checks.slack." + item.key());
      if (!(s >= 0.0)) throw ConfigError("checks.slack values must be >= 0");
      for (auto& sc : solvers) {
        if (item.key() == "prox_descent") {
          sc.bppa.slack_prox_descent = s;
        } else if (item.key() == "step_descent") {
          sc.bppa.slack_step_descent = s;
        } else if (item.key() == "energy_monotone") {
          sc.inertial_opts.slack_energy = s;
        } else if (item.key() == "lyapunov_descent") {
          sc.inertial_opts.slack_lyapunov = s;
        } else {
          throw ConfigError("unknown check name '" + item.key() + "' in checks.slack");
        }
      }
    }
  }
}

}  // namespace detail

/// Parse and validate a schema v1 run/compare config. Any malformation is a
/// ConfigError with a single-line cause.
inline RunConfig parse_run_config(const json& j) {
  detail::require_object(j, "config");
  detail::reject_unknown_keys(
      j, "config", {"version", "problem", "solver", "solvers", "output", "checks"});
  if (!j.contains("version") || !j["version"].is_number_integer() ||
      j["version"].get<int>() != 1) {
    throw ConfigError("config.version must be the integer 1");
  }
  if (!j.contains("problem")) throw ConfigError("config.problem is required");

  RunConfig rc;
  rc.echo = j;

  const json& pj = j["problem"];
  detail::require_object(pj, "problem");
  detail::reject_unknown_keys(pj, "problem", {"name", "parameters", "seed"});
  if (!pj.contains("name")) throw ConfigError("problem.name is required");
  rc.problem.name = detail::as_string(pj["name"], "problem.name");
  if (pj.contains("parameters")) {
    detail::require_object(pj["parameters"], "problem.parameters");
    rc.problem.parameters = pj["parameters"];
  }
  if (pj.contains("seed")) {
    if (!pj["seed"].is_number_unsigned() &&
        !(pj["seed"].is_number_integer() && pj["seed"].get<std::int64_t>() >= 0)) {
      throw ConfigError("problem.seed must be a nonnegative integer");
    }
    rc.problem.seed = pj["seed"].get<std::uint64_t>();
  }

  const bool has_single = j.contains("solver");
  const bool has_list = j.contains("solvers");
  if (has_single == has_list) {
    throw ConfigError("config must contain exactly one of solver or solvers");
  }
  if (has_single) {
    rc.solvers.push_back(detail::parse_solver_block(j["solver"]));
  } else {
    if (!j["solvers"].is_array() || j["solvers"].empty()) {
      throw ConfigError("config.solvers must be a nonempty array");
    }
    for (const auto& sj : j["solvers"]) {
      rc.solvers.push_back(detail::parse_solver_block(sj));
    }
  }

  if (j.contains("output")) {
    const json& oj = j["output"];
    detail::require_object(oj, "output");
    detail::reject_unknown_keys(oj, "output",
                                {"trace_path", "report_path", "record_wall_time"});
    if (oj.contains("trace_path")) {
      rc.output.trace_path = detail::as_string(oj["trace_path"], "output.trace_path");
    }
    if (oj.contains("report_path")) {
      rc.output.report_path =
          detail::as_string(oj["report_path"], "output.report_path");
    }
    if (oj.contains("record_wall_time")) {
      rc.output.record_wall_time =
          detail::as_bool(oj["record_wall_time"], "output.record_wall_time");
    }
  }
  if (j.contains("checks")) detail::apply_checks_block(j["checks"], rc.solvers);
  return rc;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config JSON parse error: ") + e.what());
  }
  return parse_run_config(j);
}

/// Problem registry addressed by name + parameters (+ seed for random
/// instances), mirroring the factory functions.
inline DcProblem build_problem(const ProblemConfig& pc) {
  const json& params = pc.parameters;
  const auto param_int = [&](const char* key, std::optional<int> dflt =
                                                  std::nullopt) -> int {
    if (!params.contains(key)) {
      if (dflt) return *dflt;
      throw ConfigError(std::string("problem.parameters.") + key + " is required");
    }
    return detail::as_int(params[key], std::string("problem.parameters.") + key);
  };
  const auto param_num = [&](const char* key,
                             std::optional<double> dflt = std::nullopt) -> double {
    if (!params.contains(key)) {
      if (dflt) return *dflt;
      throw ConfigError(std::string("problem.parameters.") + key + " is required");
    }
    return detail::as_number(params[key], std::string("problem.parameters.") + key);
  };

  if (pc.name == "quartic_well") {
    detail::reject_unknown_keys(params, "problem.parameters", {"n"});
    return make_quartic_well(param_int("n", 1));
  }
  if (pc.name == "degenerate_quartic") {
    detail::reject_unknown_keys(params, "problem.parameters", {"n"});
    return make_degenerate_quartic(param_int("n", 1));
  }
  if (pc.name == "l1_minus_l2") {
    if (params.contains("A") || params.contains("b")) {
      detail::reject_unknown_keys(params, "problem.parameters", {"A", "b", "rho"});
      if (!params.contains("A") || !params.contains("b")) {
        throw ConfigError("problem.parameters: explicit instances need both A and b");
      }
      return make_l1_minus_l2(
          detail::as_matrix(params["A"], "problem.parameters.A"),
          detail::as_vector(params["b"], "problem.parameters.b"),
          param_num("rho"));
    }
    detail::reject_unknown_keys(params, "problem.parameters",
                                {"n", "rho", "spectral_norm"});
    return make_l1_minus_l2_random(param_int("n"), param_num("rho"), pc.seed,
                                   param_num("spectral_norm", 0.9));
  }
  if (pc.name == "boxed_indefinite_quadratic") {
    detail::reject_unknown_keys(params, "problem.parameters",
                                {"Q", "c", "lo", "hi"});
    if (!params.contains("Q")) {
      throw ConfigError("problem.parameters.Q is required");
    }
    const Matrix Q = detail::as_matrix(params["Q"], "problem.parameters.Q");
    const int n = static_cast<int>(Q.rows());
    const auto vec_or_fill = [&](const char* key) {
      if (!params.contains(key)) {
        throw ConfigError(std::string("problem.parameters.") + key + " is required");
      }
      const json& v = params[key];
      if (v.is_number()) return Vector::Constant(n, v.get<double>()).eval();
      return detail::as_vector(v, std::string("problem.parameters.") + key);
    };
    const Vector c = params.contains("c") ? vec_or_fill("c")
                                          : Vector::Zero(n).eval();
    return make_boxed_indefinite_quadratic(Q, c, vec_or_fill("lo"),
                                           vec_or_fill("hi"));
  }
  throw ConfigError("unknown problem name '" + pc.name + "'");
}

}  // namespace dcprox
