#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>

#include "dcprox/dc_problem.hpp"
#include "dcprox/errors.hpp"
#include "dcprox/trace.hpp"

namespace dcprox {

struct InertialParams {
  double lambda = 0.5;
  double mu = 0.2;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 0.5;
  double tau = 0.0;
};

/// Constants derived from a validated parameter set. delta_lo/delta_hi bound
/// the interval of delta values whose energy is guaranteed nonincreasing;
/// abar drives the Lyapunov decrease check. delta1_beta_variant records the
/// alternate constant (a2+b2)*beta alongside the (a2+b2)*lambda/(rho*mu)
/// value actually used.
struct DerivedConstants {
  double rho = 0.0;
  double a = 0.0;
  double b = 0.0;
  double a2 = 0.0;
  double b2 = 0.0;
  double delta_lo = 0.0;
  double delta_hi = 0.0;
  double delta1 = 0.0;
  double abar = 0.0;
  double delta1_beta_variant = 0.0;
};

/// Checks every standing hypothesis of the inertial scheme and returns the
/// derived constants. Each violated hypothesis raises a distinct named error.
inline DerivedConstants validate_inertial_params(const InertialParams& p,
                                                 double L1) {
  const auto fail = [](InertialViolation v, const std::string& detail) {
    throw InertialParamError(
        v, std::string("inertial params rejected (") + to_string(v) + "): " + detail);
  };
  if (!(p.beta > 0.0)) fail(InertialViolation::beta_nonpositive, "beta must be > 0");
  if (!(p.alpha + p.beta > 0.0)) {
    fail(InertialViolation::alpha_beta_sum, "alpha + beta must be > 0");
  }
  if (!(p.tau > -(2.0 + p.alpha) / (2.0 * p.beta))) {
    fail(InertialViolation::tau_too_small, "tau must exceed -(2+alpha)/(2 beta)");
  }
  if (!(p.gamma >= 0.5)) {
    fail(InertialViolation::gamma_below_half, "gamma must be >= 1/2");
  }
  if (!(p.lambda > 0.0)) {
    fail(InertialViolation::lambda_nonpositive, "lambda must be > 0");
  }
  if (!(p.mu > 0.0)) fail(InertialViolation::mu_nonpositive, "mu must be > 0");

  DerivedConstants dc;
  dc.rho = 1.0 + p.tau * p.beta + 0.5 * (p.alpha + p.beta);
  const double denom = 2.0 + p.alpha + p.beta;  // > 2 given alpha+beta > 0
  dc.a = 2.0 * p.alpha / denom;
  dc.b = 2.0 * p.beta / denom;
  dc.a2 = dc.a * (1.0 + 2.0 * dc.b * (p.gamma - 0.5));
  dc.b2 = dc.b * (1.0 + dc.b * (p.tau - 0.5));

  const double step_lhs = p.lambda * L1 + p.mu * (p.gamma * p.alpha + dc.rho);
  if (!(step_lhs <= 1.0)) {
    std::ostringstream msg;
    msg << "lambda*L1 + mu*(gamma*alpha + rho) = " << step_lhs << " > 1";
    fail(InertialViolation::step_condition, msg.str());
  }

  if (dc.a2 + dc.b2 < 0.0) {
    throw ConfigError("inertial params: a2 + b2 < 0, the admissible delta "
                      "interval is empty");
  }
  const double scale = p.lambda / (dc.rho * p.mu);
  const double sb2 = std::sqrt(dc.b2);
  const double sab = std::sqrt(dc.a2 + dc.b2);
  dc.delta_lo = scale * (sb2 - sab) * (sb2 - sab);
  dc.delta_hi = scale * (sb2 + sab) * (sb2 + sab);
  dc.delta1 = (dc.a2 + dc.b2) * scale;
  dc.delta1_beta_variant = (dc.a2 + dc.b2) * p.beta;
  dc.abar = 0.5 * std::min(2.0 * dc.a2 + dc.b2, dc.b2);
  return dc;
}

/// Joint state z^k = (x^k, y^k).
struct InertialState {
  Vector x, y;
};

/// Coupling start y0 = -(alpha/beta) x0 makes |alpha x + beta y| = 0 at k=0.
inline Vector default_inertial_y0(const InertialParams& p, const Vector& x0) {
  return (-p.alpha / p.beta) * x0;
}

/// One inertial iteration:
///   q in dh(x),  x+ = prox_{g,lambda}( x - lambda(grad phi(x) - q)
///                                        - mu(alpha x + beta y) ),
///   y+ = y - (1/rho)[alpha x + beta y + gamma*alpha (x+ - x)].
/// With literal_quadratic the subproblem's quadratic coefficient is 1/lambda
/// rather than 1/(2 lambda), i.e. an effective prox step of lambda/2.
inline InertialState inertial_step(const DcProblem& p, const InertialState& s,
                                   const InertialParams& ip,
                                   const DerivedConstants& dc,
                                   bool use_smooth_h = false,
                                   bool literal_quadratic = false) {
  if (!p.g.prox) {
    throw CapabilityError("inertial_step: g must declare a prox capability");
  }
  Vector q;
  if (use_smooth_h) {
    if (!p.h.smooth) {
      throw CapabilityError("inertial_step: smooth-h mode needs a smooth view of h");
    }
    q = p.h.smooth->gradient(s.x);
  } else {
    q = p.h.subgradient_at(s.x);
  }
  const Vector coupling = ip.alpha * s.x + ip.beta * s.y;
  const Vector w = q - p.phi.gradient(s.x) - (ip.mu / ip.lambda) * coupling;
  const double t = literal_quadratic ? 0.5 * ip.lambda : ip.lambda;
  Vector x_next = prox(*p.g.prox, t, s.x + t * w).y;
  Vector y_next =
      s.y - (coupling + ip.gamma * ip.alpha * (x_next - s.x)) / dc.rho;
  return {std::move(x_next), std::move(y_next)};
}

/// Smooth-h specialization: q = grad h(x). Bit-identical to inertial_step
/// with the gradient as the subgradient selection in default mode.
inline InertialState inertial_step_smooth(const DcProblem& p,
                                          const InertialState& s,
                                          const InertialParams& ip,
                                          const DerivedConstants& dc,
                                          bool literal_quadratic = false) {
  return inertial_step(p, s, ip, dc, /*use_smooth_h=*/true, literal_quadratic);
}

/// E(delta) = delta f(x) + 0.5 |a x + b y|^2. Monotone along iterations for
/// delta inside [delta_lo, delta_hi]; computable (without guarantee) outside.
inline double energy(const DerivedConstants& dc, double delta, const Vector& x,
                     const Vector& y, double f_x) {
  return delta * f_x + 0.5 * (dc.a * x + dc.b * y).squaredNorm();
}

/// The joint-state Lyapunov value: energy at delta1.
inline double lyapunov(const DerivedConstants& dc, const Vector& x,
                       const Vector& y, double f_x) {
  return energy(dc, dc.delta1, x, y, f_x);
}

struct InertialOptions {
  std::optional<double> tol;  // absolute stop on |z^{k+1}-z^k|; default 1e-10*(1+|z^k|)
  int max_iter = 100000;
  bool prefer_smooth_h = true;      // use grad h when a smooth view exists
  bool literal_quadratic = false;   // see inertial_step
  int delta_grid_points = 5;        // evenly spaced in [delta_lo, delta_hi]
  // explicit monitoring deltas; values outside [delta_lo, delta_hi] are
  // computed but carry no monotonicity guarantee and are not asserted
  std::optional<std::vector<double>> delta_grid;
  double norm_ceiling = 1e8;        // boundedness watchdog (monitored only)
  bool check_energy = true;
  bool check_lyapunov = true;
  double slack_energy = 1e-10;    // relative
  double slack_lyapunov = 1e-10;  // relative
};

inline Trace solve_inertial(const DcProblem& p, const Vector& x0,
                            const Vector& y0, const InertialParams& ip,
                            const InertialOptions& opts = {}) {
  const double L1 = detail::require_l1(p);
  const DerivedConstants dc = validate_inertial_params(ip, L1);
  if (!p.compat.empty() && !p.supports(SolverKind::inertial)) {
    throw CapabilityError(std::string("problem '") + p.label +
                          "' does not support solver inertial");
  }
  if (!p.inertial_compatible()) {
    throw CapabilityError(
        "inertial requires a prox for g and a subgradient selection for h");
  }
  if (x0.size() != p.dim || y0.size() != p.dim) {
    throw DimensionError("inertial: x0/y0 dimension mismatch");
  }
  if (opts.delta_grid_points < 2) {
    throw ConfigError("inertial: delta_grid_points must be >= 2");
  }
  const bool use_smooth_h = opts.prefer_smooth_h && p.h.smooth.has_value();
  if (opts.literal_quadratic && !use_smooth_h) {
    throw ConfigError(
        "inertial: the literal quadratic mode is defined for smooth h");
  }

  Trace tr;
  tr.problem_label = p.label;
  tr.solver = SolverKind::inertial;
  if (opts.delta_grid) {
    if (opts.delta_grid->empty()) {
      throw ConfigError("inertial: explicit delta_grid must be nonempty");
    }
    tr.delta_grid = *opts.delta_grid;
  } else {
    tr.delta_grid.resize(opts.delta_grid_points);
    for (int j = 0; j < opts.delta_grid_points; ++j) {
      tr.delta_grid[j] = dc.delta_lo + (dc.delta_hi - dc.delta_lo) * j /
                                           (opts.delta_grid_points - 1);
    }
  }
  const int npts = static_cast<int>(tr.delta_grid.size());

  InertialState z{x0, y0};
  double f_x = dc_value(p, z.x);
  if (!std::isfinite(f_x)) {
    throw ConfigError("x0 lies outside the domain of f (f(x0) not finite)");
  }

  const auto t_start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t_start)
        .count();
  };

  const auto energies_at = [&](const InertialState& s, double f) {
    std::vector<double> es(npts);
    for (int j = 0; j < npts; ++j) {
      es[j] = energy(dc, tr.delta_grid[j], s.x, s.y, f);
    }
    return es;
  };
  const auto make_record = [&](int k, const InertialState& s, double f,
                               const std::vector<double>& es) {
    IterateRecord rec;
    rec.k = k;
    rec.x = s.x;
    rec.f_x = f;
    rec.energy_lo = es.front();
    rec.energy_hi = es.back();
    rec.lyapunov = lyapunov(dc, s.x, s.y, f);
    rec.coupling_norm = (ip.alpha * s.x + ip.beta * s.y).norm();
    return rec;
  };
  const auto step = [&](const InertialState& s) {
    return inertial_step(p, s, ip, dc, use_smooth_h, opts.literal_quadratic);
  };

  double sum_d_sq = 0.0;
  for (int k = 0;; ++k) {
    std::vector<double> es = energies_at(z, f_x);
    IterateRecord rec = make_record(k, z, f_x, es);

    if (z.x.lpNorm<Eigen::Infinity>() > opts.norm_ceiling ||
        z.y.lpNorm<Eigen::Infinity>() > opts.norm_ceiling) {
      rec.sum_d_sq = sum_d_sq;
      rec.wall_time_s = elapsed();
      tr.energy_grid.push_back(std::move(es));
      tr.dx_norm.push_back(0.0);
      tr.dy_norm.push_back(0.0);
      tr.y_state.push_back(z.y);
      tr.records.push_back(std::move(rec));
      tr.termination = Termination::diverged;
      tr.diagnostic = "iterate norm exceeded the watchdog ceiling";
      break;
    }

    const InertialState z_next = step(z);
    const double dx = (z_next.x - z.x).norm();
    const double dy = (z_next.y - z.y).norm();
    const double dz = std::sqrt(dx * dx + dy * dy);
    rec.d_norm = dz;
    sum_d_sq += dz * dz;
    rec.sum_d_sq = sum_d_sq;
    rec.wall_time_s = elapsed();
    tr.energy_grid.push_back(es);
    tr.dx_norm.push_back(dx);
    tr.dy_norm.push_back(dy);
    tr.y_state.push_back(z.y);
    tr.records.push_back(std::move(rec));

    const double f_next = dc_value(p, z_next.x);
    if (!std::isfinite(f_next)) {
      throw std::domain_error("inertial: f became non-finite during the run");
    }
    const std::vector<double> es_next = energies_at(z_next, f_next);
    if (opts.check_energy) {
      for (int j = 0; j < npts; ++j) {
        // deltas outside the admissible interval carry no guarantee
        const double span = 1e-12 * (1.0 + std::abs(dc.delta_hi));
        if (tr.delta_grid[j] < dc.delta_lo - span ||
            tr.delta_grid[j] > dc.delta_hi + span) {
          continue;
        }
        if (es_next[j] > es[j] + opts.slack_energy * (1.0 + std::abs(es[j]))) {
          std::ostringstream msg;
          msg << "energy increase at k=" << k << ", delta=" << tr.delta_grid[j]
              << ": " << es[j] << " -> " << es_next[j];
          throw HypothesisViolation("energy_monotone", msg.str());
        }
      }
    }
    if (opts.check_lyapunov && dc.abar > 0.0) {
      const double phi_k = lyapunov(dc, z.x, z.y, f_x);
      const double phi_next = lyapunov(dc, z_next.x, z_next.y, f_next);
      if (phi_next > phi_k - dc.abar * dz * dz +
                         opts.slack_lyapunov * (1.0 + std::abs(phi_k))) {
        std::ostringstream msg;
        msg << "Lyapunov increase at k=" << k << ": " << phi_k << " -> "
            << phi_next << " with abar*|dz|^2 = " << dc.abar * dz * dz;
        throw HypothesisViolation("lyapunov_descent", msg.str());
      }
    }

    const double tol =
        opts.tol ? *opts.tol
                 : 1e-10 * (1.0 + std::sqrt(z.x.squaredNorm() + z.y.squaredNorm()));
    z = z_next;
    f_x = f_next;

    const bool converged = dz <= tol;
    if (converged || k + 1 >= opts.max_iter) {
      // terminal row: d_norm reports the displacement one further (untaken) step
      // would make, i.e. the residual at the final state
      std::vector<double> es_final = energies_at(z, f_x);
      IterateRecord fin = make_record(k + 1, z, f_x, es_final);
      const InertialState z_probe = step(z);
      const double dxf = (z_probe.x - z.x).norm();
      const double dyf = (z_probe.y - z.y).norm();
      fin.d_norm = std::sqrt(dxf * dxf + dyf * dyf);
      sum_d_sq += fin.d_norm * fin.d_norm;
      fin.sum_d_sq = sum_d_sq;
      fin.wall_time_s = elapsed();
      tr.energy_grid.push_back(std::move(es_final));
      tr.dx_norm.push_back(dxf);
      tr.dy_norm.push_back(dyf);
      tr.y_state.push_back(z.y);
      tr.records.push_back(std::move(fin));
      tr.termination = converged ? Termination::converged : Termination::max_iter;
      break;
    }
  }
  return tr;
}

}  // namespace dcprox
