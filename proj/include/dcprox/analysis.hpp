#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dcprox/dc_problem.hpp"
#include "dcprox/errors.hpp"
#include "dcprox/rng.hpp"
#include "dcprox/trace.hpp"

namespace dcprox {

namespace detail {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_abs_residual = 0.0;
};

inline LineFit fit_line(const std::vector<double>& xs,
                        const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n < 2) throw FitError("fit_line: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double det = n * sxx - sx * sx;
  if (det == 0.0) throw FitError("fit_line: degenerate abscissae");
  LineFit fit;
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / n;
  for (std::size_t i = 0; i < n; ++i) {
    fit.max_abs_residual = std::max(
        fit.max_abs_residual, std::abs(ys[i] - fit.slope * xs[i] - fit.intercept));
  }
  return fit;
}

}  // namespace detail

struct RateBoundCheck {
  std::vector<bool> holds;  // per index k, for the pair (t_k, t_{k+1})
  std::optional<int> first_violation;
};

/// Per-index truth of t_k^mu <= nu (t_k - t_{k+1}), absolute slack 1e-12.
/// std::pow(0,0) = 1, matching the 0^0 = 1 convention.
inline RateBoundCheck rate_bound_check(const std::vector<double>& t, double mu,
                                       double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("rate_bound_check: nu must be > 0");
  for (double v : t) {
    if (!(v >= 0.0)) {
      throw std::invalid_argument("rate_bound_check: sequence must be nonnegative");
    }
  }
  RateBoundCheck out;
  if (t.size() < 2) return out;
  out.holds.resize(t.size() - 1);
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    out.holds[k] = std::pow(t[k], mu) <= nu * (t[k] - t[k + 1]) + 1e-12;
    if (!out.holds[k] && !out.first_violation) {
      out.first_violation = static_cast<int>(k);
    }
  }
  return out;
}

/// Upper bound on t_k for a sequence satisfying t^mu <= nu (t - t_next):
///   mu = 0:       max(t0 - k/nu, 0)            (zero from k = ceil(nu t0) on)
///   mu in (0,1]:  t0 (1 - 1/nu)^k              (valid once t < 1; needs nu > 1)
///   mu > 1:       (t0^{1-mu} + ((mu-1)/nu) k)^{1/(1-mu)}
inline double rate_predict(double mu, double nu, double t0, int k) {
  if (!(nu > 0.0) || !(t0 >= 0.0) || k < 0 || !(mu >= 0.0)) {
    throw std::invalid_argument("rate_predict: invalid parameters");
  }
  if (mu == 0.0) return std::max(t0 - static_cast<double>(k) / nu, 0.0);
  if (mu <= 1.0) {
    if (!(nu > 1.0)) {
      throw std::invalid_argument(
          "rate_predict: mu in (0,1] needs nu > 1 for a rate in (0,1)");
    }
    return t0 * std::pow(1.0 - 1.0 / nu, static_cast<double>(k));
  }
  if (t0 == 0.0) return 0.0;
  if (k == 0) return t0;  // the closed form double-rounds at k = 0
  return std::pow(std::pow(t0, 1.0 - mu) + (mu - 1.0) / nu * k, 1.0 / (1.0 - mu));
}

enum class RateClass { finite, linear, sublinear };

inline const char* to_string(RateClass c) {
  switch (c) {
    case RateClass::finite: return "finite";
    case RateClass::linear: return "linear";
    case RateClass::sublinear: return "sublinear";
  }
  return "?";
}

/// Empirical classification of t_k = f_k - fstar decay. fit_constants carries
/// both candidate fits; fit_residual is the winner's max log-deviation.
struct RateReport {
  RateClass classification = RateClass::linear;
  std::optional<int> finite_step;
  std::optional<double> linear_rate;         // in (0,1)
  std::optional<double> sublinear_exponent;  // < 0
  std::map<std::string, double> fit_constants;
  double fit_residual = 0.0;
  std::pair<int, int> window{0, 0};
};

/// Tail-window fit (last 50% of the records, at least 20 points) of
/// log t vs k (geometric decay) against log t vs log k (power decay);
/// the smaller max log-deviation wins. Sequences reaching
/// t <= 1e-14 (1+|fstar|) classify as finite at that index.
inline RateReport classify_rate(const Trace& trace, double fstar) {
  const auto& recs = trace.records;
  if (recs.empty()) throw FitError("classify_rate: empty trace");
  const double threshold = 1e-14 * (1.0 + std::abs(fstar));
  for (const auto& r : recs) {
    if (r.f_x - fstar < -threshold) {
      throw std::invalid_argument("classify_rate: fstar exceeds a recorded f");
    }
  }
  RateReport report;
  for (const auto& r : recs) {
    if (r.f_x - fstar <= threshold) {
      report.classification = RateClass::finite;
      report.finite_step = r.k;
      report.window = {0, r.k};
      return report;
    }
  }
  const std::size_t n = recs.size();
  const std::size_t start = n / 2;
  if (n - start < 20) {
    throw FitError("classify_rate: too few tail points (need >= 20)");
  }
  std::vector<double> ks, log_ks, log_ts;
  ks.reserve(n - start);
  for (std::size_t i = start; i < n; ++i) {
    const double t = recs[i].f_x - fstar;
    ks.push_back(static_cast<double>(recs[i].k));
    log_ks.push_back(std::log(static_cast<double>(recs[i].k)));
    log_ts.push_back(std::log(t));
  }
  const auto lin = detail::fit_line(ks, log_ts);
  const auto sub = detail::fit_line(log_ks, log_ts);
  const double rate = std::exp(lin.slope);
  const double exponent = sub.slope;

  report.fit_constants["linear_rate"] = rate;
  if (rate < 1.0) report.fit_constants["nu"] = 1.0 / (1.0 - rate);
  report.fit_constants["linear_log_residual"] = lin.max_abs_residual;
  report.fit_constants["sublinear_exponent"] = exponent;
  report.fit_constants["gamma"] = std::exp(sub.intercept);
  report.fit_constants["sublinear_log_residual"] = sub.max_abs_residual;
  report.window = {recs[start].k, recs[n - 1].k};

  const bool linear_valid = rate > 0.0 && rate < 1.0;
  const bool sublinear_valid = exponent < 0.0;
  bool pick_linear;
  if (linear_valid && sublinear_valid) {
    pick_linear = lin.max_abs_residual <= sub.max_abs_residual;
  } else if (linear_valid || sublinear_valid) {
    pick_linear = linear_valid;
  } else {
    throw FitError("classify_rate: the tail window does not decay");
  }
  if (pick_linear) {
    report.classification = RateClass::linear;
    report.linear_rate = rate;
    report.fit_residual = lin.max_abs_residual;
  } else {
    report.classification = RateClass::sublinear;
    report.sublinear_exponent = exponent;
    report.fit_residual = sub.max_abs_residual;
  }
  return report;
}

struct KlEstimate {
  double kappa_hat = 0.0;
  double M_hat = 0.0;
  double raw_slope = 0.0;  // before clamping to [0,1)
  double fit_residual = 0.0;
  std::pair<int, int> window{0, 0};
  bool clamped = false;
};

/// Least-squares fit of log|grad f(x^k)| = kappa log(f_k - fstar) - log M on
/// the tail window. Requires recorded gradient residuals; kappa is clamped
/// to [0,1).
inline KlEstimate estimate_kl_exponent(const Trace& trace, double fstar) {
  std::vector<const IterateRecord*> with_grad;
  for (const auto& r : trace.records) {
    if (r.grad_residual) with_grad.push_back(&r);
  }
  if (with_grad.empty()) {
    throw CapabilityError("estimate_kl_exponent: trace has no gradient residuals");
  }
  const double threshold = 1e-14 * (1.0 + std::abs(fstar));
  const std::size_t start = with_grad.size() / 2;
  std::vector<double> log_ts, log_gs;
  int k_lo = 0, k_hi = 0;
  for (std::size_t i = start; i < with_grad.size(); ++i) {
    const double t = with_grad[i]->f_x - fstar;
    const double gn = *with_grad[i]->grad_residual;
    if (t <= threshold || gn <= 0.0) continue;
    if (log_ts.empty()) k_lo = with_grad[i]->k;
    k_hi = with_grad[i]->k;
    log_ts.push_back(std::log(t));
    log_gs.push_back(std::log(gn));
  }
  if (log_ts.empty()) {
    throw FitError("estimate_kl_exponent: degenerate window (all f - fstar at "
                   "or below the resolution guard)");
  }
  if (log_ts.size() < 20) {
    throw FitError("estimate_kl_exponent: too few tail points (need >= 20)");
  }
  const auto fit = detail::fit_line(log_ts, log_gs);
  KlEstimate est;
  est.raw_slope = fit.slope;
  est.kappa_hat = std::clamp(fit.slope, 0.0, 1.0 - 1e-12);
  est.clamped = est.kappa_hat != fit.slope;
  est.M_hat = std::exp(-fit.intercept);
  est.fit_residual = fit.max_abs_residual;
  est.window = {k_lo, k_hi};
  return est;
}

struct LojasiewiczCheck {
  bool holds = true;
  double worst_ratio = 0.0;
  std::optional<Vector> witness;
};

/// Sampling check of |f(x) - f(xstar)|^kappa <= M |grad f(x)| over n_samples
/// uniform points of B(xstar, eps). Evidence, not proof. worst_ratio is the
/// largest lhs/rhs seen (infinity when grad f = 0 with lhs > 0). A relative
/// tolerance of 1e-12 keeps exactly-tight constants (equality cases) passing.
inline LojasiewiczCheck lojasiewicz_check(const DcProblem& p,
                                          const Vector& xstar, double kappa,
                                          double M, double eps, int n_samples,
                                          std::uint64_t seed) {
  if (!(kappa >= 0.0 && kappa < 1.0)) {
    throw std::invalid_argument("lojasiewicz_check: kappa must lie in [0,1)");
  }
  if (!(M > 0.0) || !(eps > 0.0) || n_samples < 1) {
    throw std::invalid_argument("lojasiewicz_check: invalid M, eps or n_samples");
  }
  const double fstar = dc_value(p, xstar);
  Rng rng(seed);
  LojasiewiczCheck out;
  Vector worst_x;
  for (int i = 0; i < n_samples; ++i) {
    const Vector x = xstar + rng.uniform_ball(p.dim, eps);
    const double t = std::abs(dc_value(p, x) - fstar);
    const double lhs = std::pow(t, kappa);  // pow(0,0) = 1 by convention
    const double rhs = M * dc_gradient(p, x).norm();
    double ratio;
    if (rhs > 0.0) {
      ratio = lhs / rhs;
    } else {
      ratio = lhs > 0.0 ? kInf : 0.0;
    }
    if (lhs > rhs * (1.0 + 1e-12)) out.holds = false;
    if (ratio > out.worst_ratio) {
      out.worst_ratio = ratio;
      worst_x = x;
    }
  }
  if (!out.holds) out.witness = worst_x;
  return out;
}

}  // namespace dcprox
