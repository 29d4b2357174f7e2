#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "dcprox/dc_problem.hpp"
#include "dcprox/errors.hpp"
#include "dcprox/trace.hpp"

namespace dcprox {

struct LambdaRule {
  enum class Kind { constant, adaptive } kind = Kind::constant;
  std::optional<double> value;  // constant rule; defaults to L1 + 2*lambda_hat
};

struct BppaConfig {
  double eta = 0.5;         // linesearch shrink factor, in (0,1)
  double alpha = 0.1;       // sufficient-decrease constant, > 0
  double lambda_hat = 0.5;  // margin above L1: lambda_k >= L1 + 2*lambda_hat
  double lambda_bar = 1e6;  // upper cap on lambda_k
  LambdaRule lambda_rule{};
  std::optional<double> tol_d;  // absolute stop on |d^k|; default 1e-10*(1+|x^k|)
  int max_iter = 1000;
  int max_armijo = 60;   // eta=0.5 reaches step ~1e-18, below double resolution
  bool allow_m0 = false;  // admit the unit step y + d (default excludes it)
  double f_floor = -1e12;  // divergence guard for noncoercive instances

  bool check_prox_descent = true;  // f(y) <= f(x) - ((lambda-L1)/2)|d|^2
  bool check_step_descent = true;  // f(x+) <= f(x) - ((lambda-L1)/2+alpha*eta_k)|d|^2
  double slack_prox_descent = 1e-10;  // relative
  double slack_step_descent = 1e-10;
};

inline void validate(const BppaConfig& cfg, double L1) {
  if (!(cfg.eta > 0.0 && cfg.eta < 1.0)) {
    throw ConfigError("bppa: eta must lie in (0,1)");
  }
  if (!(cfg.alpha > 0.0)) throw ConfigError("bppa: alpha must be > 0");
  if (!(cfg.lambda_hat > 0.0)) throw ConfigError("bppa: lambda_hat must be > 0");
  if (cfg.max_iter < 0) throw ConfigError("bppa: max_iter must be >= 0");
  if (cfg.max_armijo < 1) throw ConfigError("bppa: max_armijo must be >= 1");
  const double lambda_min = L1 + 2.0 * cfg.lambda_hat;
  if (cfg.lambda_rule.kind == LambdaRule::Kind::constant) {
    const double lam = cfg.lambda_rule.value.value_or(lambda_min);
    if (!(lam >= lambda_min)) {
      throw ConfigError("bppa: constant lambda must be >= L1 + 2*lambda_hat");
    }
    if (!(lam <= cfg.lambda_bar)) {
      throw ConfigError("bppa: constant lambda exceeds lambda_bar");
    }
  } else if (!(cfg.lambda_bar >= lambda_min)) {
    throw ConfigError("bppa: lambda_bar must admit lambda >= L1 + 2*lambda_hat");
  }
  if (cfg.tol_d && !(*cfg.tol_d >= 0.0)) {
    throw ConfigError("bppa: tol_d must be >= 0");
  }
}

struct ArmijoResult {
  int m_k;
  double eta_k;  // eta^{m_k}
};

/// Smallest integer m >= 1 (or 0 when allow_m0) with
/// f(y + eta^m d) <= f_y - alpha * eta^m * |d|^2; the comparison is inclusive.
/// Throws ArmijoFailure past max_m trials.
inline ArmijoResult armijo_search(const std::function<double(const Vector&)>& f,
                                  const Vector& y, const Vector& d, double f_y,
                                  double eta, double alpha, int max_m,
                                  bool allow_m0 = false) {
  if (!(d.norm() > 0.0)) {
    throw std::invalid_argument("armijo_search: zero direction");
  }
  if (!std::isfinite(f_y)) {
    throw std::invalid_argument("armijo_search: f(y) must be finite");
  }
  const double d_sq = d.squaredNorm();
  double eta_m = allow_m0 ? 1.0 : eta;
  for (int m = allow_m0 ? 0 : 1; m <= max_m; ++m) {
    if (f(y + eta_m * d) <= f_y - alpha * eta_m * d_sq) return {m, eta_m};
    eta_m *= eta;
  }
  std::ostringstream msg;
  msg << "armijo_search: no acceptable step within " << max_m
      << " trials; lambda_k <= L1 or the declared L1 understates the true constant";
  throw ArmijoFailure(max_m, msg.str());
}

struct StepOutcome {
  Vector y;  // subproblem solution
  Vector d;  // y - x
  double d_norm = 0.0;
  double f_x = 0.0;
  double f_y = 0.0;
  bool terminated = false;  // |d| <= tol, no step taken
  std::optional<int> m_k;
  std::optional<double> eta_k;
  Vector x_next;
  double f_next = 0.0;
  double decrease_bound = 0.0;  // ((lambda-L1)/2 + alpha*eta_k)|d|^2
  double subproblem_residual = 0.0;
};

/// One iteration: subproblem at x with lambda_k, then (boosted mode) the
/// backtracking linesearch along d = y - x starting from y. The proximal
/// decrease f(y) <= f(x) - ((lambda_k - L1)/2)|d|^2 is asserted; a violation
/// beyond slack aborts with a diagnostic naming the check.
inline StepOutcome bppa_step(const DcProblem& p, const Vector& x,
                             double lambda_k, const BppaConfig& cfg,
                             bool do_linesearch = true) {
  const double L1 = detail::require_l1(p);
  StepOutcome out;
  out.f_x = dc_value(p, x);
  if (!std::isfinite(out.f_x)) {
    throw std::domain_error("bppa_step: f(x) is not finite");
  }
  const ProxResult sub = subproblem_solve(p, x, lambda_k);
  out.y = sub.y;
  out.d = sub.y - x;
  out.d_norm = out.d.norm();
  out.subproblem_residual = sub.residual;
  out.f_y = dc_value(p, out.y);

  const double tol = cfg.tol_d ? *cfg.tol_d : 1e-10 * (1.0 + x.norm());
  if (out.d_norm <= tol) {
    out.terminated = true;
    out.x_next = x;
    out.f_next = out.f_x;
    return out;
  }

  const double bound_prox = 0.5 * (lambda_k - L1) * out.d_norm * out.d_norm;
  if (cfg.check_prox_descent &&
      out.f_y > out.f_x - bound_prox +
                    cfg.slack_prox_descent * (1.0 + std::abs(out.f_x))) {
    std::ostringstream msg;
    msg << "prox_descent violated at lambda_k=" << lambda_k << ": f(y)=" << out.f_y
        << " > f(x) - ((lambda-L1)/2)|d|^2 = " << out.f_x - bound_prox;
    throw HypothesisViolation("prox_descent", msg.str());
  }

  if (!do_linesearch) {  // plain proximal point: x^{k+1} = y^k
    out.x_next = out.y;
    out.f_next = out.f_y;
    out.decrease_bound = bound_prox;
    return out;
  }

  ArmijoResult ar;
  try {
    ar = armijo_search([&](const Vector& z) { return dc_value(p, z); }, out.y,
                       out.d, out.f_y, cfg.eta, cfg.alpha, cfg.max_armijo,
                       cfg.allow_m0);
  } catch (ArmijoFailure& af) {
    af.d_norm = out.d_norm;
    af.f_y = out.f_y;
    throw;
  }
  out.m_k = ar.m_k;
  out.eta_k = ar.eta_k;
  out.x_next = out.y + ar.eta_k * out.d;
  out.f_next = dc_value(p, out.x_next);
  out.decrease_bound =
      (0.5 * (lambda_k - L1) + cfg.alpha * ar.eta_k) * out.d_norm * out.d_norm;
  if (cfg.check_step_descent &&
      out.f_next > out.f_x - out.decrease_bound +
                       cfg.slack_step_descent * (1.0 + std::abs(out.f_x))) {
    std::ostringstream msg;
    msg << "step_descent violated: f(x+)=" << out.f_next
        << " > f(x) - ((lambda-L1)/2 + alpha*eta_k)|d|^2 = "
        << out.f_x - out.decrease_bound;
    throw HypothesisViolation("step_descent", msg.str());
  }
  return out;
}

namespace detail {

inline std::optional<double> stationarity_residual(const DcProblem& p,
                                                   const Vector& x,
                                                   double lambda_k,
                                                   double d_norm) {
  if (p.g.smooth && p.h.smooth) return dc_gradient(p, x).norm();
  // fall back to the bound |grad f(x)| <= (L2 + lambda_k)|d| when the local
  // constant L2 for grad g is declared
  if (p.g.smooth) {
    if (auto L2 = p.g.smooth->lipschitz_on_radius(p.test_box_radius)) {
      return (*L2 + lambda_k) * d_norm;
    }
  }
  return std::nullopt;
}

inline Trace run_proximal(const DcProblem& p, const Vector& x0,
                          const BppaConfig& cfg, bool boosted) {
  const double L1 = require_l1(p);
  validate(cfg, L1);
  const SolverKind kind = boosted ? SolverKind::bppa : SolverKind::ppa;
  if (!p.compat.empty() && !p.supports(kind)) {
    throw CapabilityError(std::string("problem '") + p.label +
                          "' does not support solver " + to_string(kind));
  }
  if (boosted && !p.bppa_compatible()) {
    throw CapabilityError(
        "bppa requires differentiable g and h (f must be differentiable)");
  }
  if (!boosted && !p.ppa_compatible()) {
    throw CapabilityError("ppa requires a solvable subproblem for g and a "
                          "subgradient selection for h");
  }
  if (x0.size() != p.dim) throw DimensionError("x0 dimension mismatch");

  Trace tr;
  tr.problem_label = p.label;
  tr.solver = kind;

  const double lambda_min = L1 + 2.0 * cfg.lambda_hat;
  double lambda =
      cfg.lambda_rule.kind == LambdaRule::Kind::constant
          ? cfg.lambda_rule.value.value_or(lambda_min)
          : lambda_min;

  Vector x = x0;
  double f_x = dc_value(p, x);
  if (!std::isfinite(f_x)) {
    throw ConfigError("x0 lies outside the domain of f (f(x0) not finite)");
  }

  const auto t_start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t_start)
        .count();
  };

  double sum_d_sq = 0.0;
  for (int k = 0;; ++k) {
    IterateRecord rec;
    rec.k = k;
    rec.x = x;
    rec.f_x = f_x;

    if (f_x < cfg.f_floor) {
      rec.sum_d_sq = sum_d_sq;
      rec.wall_time_s = elapsed();
      tr.lambda_used.push_back(lambda);
      tr.f_y.push_back(f_x);
      tr.records.push_back(std::move(rec));
      tr.termination = Termination::diverged;
      tr.diagnostic = "f fell below the configured floor (noncoercive instance?)";
      break;
    }

    StepOutcome so;
    try {
      for (;;) {
        try {
          so = bppa_step(p, x, lambda, cfg, boosted);
          break;
        } catch (const HypothesisViolation& hv) {
          // adaptive rule: a failed proximal decrease means the local L1 was
          // understated; double lambda and redo the step, capped at lambda_bar
          if (cfg.lambda_rule.kind == LambdaRule::Kind::adaptive &&
              hv.check == "prox_descent" && 2.0 * lambda <= cfg.lambda_bar) {
            lambda *= 2.0;
            continue;
          }
          throw;
        }
      }
    } catch (const ArmijoFailure& af) {
      rec.d_norm = af.d_norm;
      sum_d_sq += af.d_norm * af.d_norm;
      rec.sum_d_sq = sum_d_sq;
      rec.grad_residual = stationarity_residual(p, x, lambda, af.d_norm);
      rec.wall_time_s = elapsed();
      tr.lambda_used.push_back(lambda);
      tr.f_y.push_back(af.f_y);
      tr.records.push_back(std::move(rec));
      tr.termination = Termination::armijo_fail;
      tr.diagnostic = af.what();
      break;
    }

    rec.d_norm = so.d_norm;
    sum_d_sq += so.d_norm * so.d_norm;
    rec.sum_d_sq = sum_d_sq;
    rec.grad_residual = stationarity_residual(p, x, lambda, so.d_norm);
    rec.wall_time_s = elapsed();
    tr.lambda_used.push_back(lambda);
    tr.f_y.push_back(so.f_y);

    if (so.terminated) {
      tr.records.push_back(std::move(rec));
      tr.termination = Termination::converged;
      break;
    }
    if (k >= cfg.max_iter) {
      tr.records.push_back(std::move(rec));
      tr.termination = Termination::max_iter;
      break;
    }

    rec.m_k = so.m_k;
    rec.eta_k = so.eta_k;
    tr.records.push_back(std::move(rec));
    x = so.x_next;
    f_x = so.f_next;
  }
  return tr;
}

}  // namespace detail

/// Full run of the boosted method: subproblem, then linesearch along d.
inline Trace solve_bppa(const DcProblem& p, const Vector& x0,
                        const BppaConfig& cfg) {
  return detail::run_proximal(p, x0, cfg, /*boosted=*/true);
}

/// Plain proximal point baseline: identical to the boosted method with
/// x^{k+1} = y^k and no linesearch.
inline Trace solve_ppa(const DcProblem& p, const Vector& x0,
                       const BppaConfig& cfg) {
  return detail::run_proximal(p, x0, cfg, /*boosted=*/false);
}

}  // namespace dcprox
