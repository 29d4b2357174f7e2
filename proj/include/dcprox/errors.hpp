#pragma once

#include <stdexcept>
#include <string>

namespace dcprox {

/// A required oracle feature (prox, gradient, subgradient, ...) is missing,
/// or a problem/solver pairing is not supported.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid configuration or parameter set, rejected before any iteration runs.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A per-iteration inequality that the convergence theory guarantees failed
/// beyond the configured slack. `check` names the violated inequality.
class HypothesisViolation : public std::runtime_error {
 public:
  HypothesisViolation(std::string check_name, const std::string& what)
      : std::runtime_error(what), check(std::move(check_name)) {}
  std::string check;
};

/// Inner prox solver exceeded its iteration cap.
class ProxFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The backtracking linesearch exhausted its trial budget. This signals that
/// lambda_k <= L1 or that the declared L1 understates the true constant.
class ArmijoFailure : public std::runtime_error {
 public:
  ArmijoFailure(int tried, const std::string& what)
      : std::runtime_error(what), m_tried(tried) {}
  int m_tried;
  // filled by the step driver so a partial trace row can still be recorded
  double d_norm = 0.0;
  double f_y = 0.0;
};

/// Not enough (or degenerate) data to fit a rate or exponent.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class InertialViolation {
  beta_nonpositive,
  alpha_beta_sum,
  tau_too_small,
  gamma_below_half,
  lambda_nonpositive,
  mu_nonpositive,
  step_condition,
};

inline const char* to_string(InertialViolation v) {
  switch (v) {
    case InertialViolation::beta_nonpositive: return "beta_nonpositive";
    case InertialViolation::alpha_beta_sum: return "alpha_beta_sum";
    case InertialViolation::tau_too_small: return "tau_too_small";
    case InertialViolation::gamma_below_half: return "gamma_below_half";
    case InertialViolation::lambda_nonpositive: return "lambda_nonpositive";
    case InertialViolation::mu_nonpositive: return "mu_nonpositive";
    case InertialViolation::step_condition: return "step_condition";
  }
  return "?";
}

/// Inertial parameter set rejected; `violation` names the failed hypothesis.
class InertialParamError : public ConfigError {
 public:
  InertialParamError(InertialViolation v, const std::string& what)
      : ConfigError(what), violation(v) {}
  InertialViolation violation;
};

}  // namespace dcprox
