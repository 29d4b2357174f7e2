#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dcprox/errors.hpp"
#include "dcprox/prox.hpp"
#include "dcprox/smooth.hpp"
#include "dcprox/types.hpp"

namespace dcprox {

/// Oracle for a convex proper lower semicontinuous function: extended-real
/// value (+inf allowed for indicators), an optional deterministic subgradient
/// selection, an optional prox capability, and an optional smooth view when
/// the function is differentiable.
struct ConvexOracle {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> subgradient;
  std::optional<ProxSpec> prox;
  std::optional<SmoothOracle> smooth;

  bool has_subgradient() const {
    return static_cast<bool>(subgradient) || smooth.has_value();
  }

  /// One element of the subdifferential; the gradient when smooth.
  Vector subgradient_at(const Vector& x) const {
    if (smooth) return smooth->gradient(x);
    if (subgradient) return subgradient(x);
    throw CapabilityError("ConvexOracle: no subgradient selection available");
  }
};

/// Oracle bundle for min f(x) = phi(x) + g(x) - h(x) with phi smooth and
/// g, h convex. Analytic facts (fstar, minimizers, Lojasiewicz data) are
/// declared by the factory that built the instance; `compat` lists the
/// solvers the instance is intended for.
struct DcProblem {
  std::string label;
  int dim = 0;
  SmoothOracle phi;
  ConvexOracle g;
  ConvexOracle h;

  std::optional<double> known_fstar;
  std::vector<Vector> known_minimizers;
  std::optional<double> known_kl_exponent;  // kappa in [0,1)
  std::optional<double> known_kl_constant;  // M in |f-f*|^kappa <= M|grad f|
  std::optional<double> known_kl_radius;    // ball radius for the declared fact
  double test_box_radius = 2.0;
  std::set<SolverKind> compat;

  /// f must be differentiable for the boosted method's linesearch.
  bool bppa_compatible() const {
    return g.smooth.has_value() && h.smooth.has_value() &&
           (g.prox.has_value() || g.smooth.has_value());
  }
  bool ppa_compatible() const {
    return (g.prox.has_value() || g.smooth.has_value()) && h.has_subgradient();
  }
  bool inertial_compatible() const {
    return g.prox.has_value() && h.has_subgradient();
  }

  bool supports(SolverKind k) const { return compat.count(k) > 0; }
};

namespace detail {
inline double require_l1(const DcProblem& p) {
  if (!p.phi.lipschitz_grad) {
    throw CapabilityError(
        "the problem must declare a gradient Lipschitz constant for phi");
  }
  return *p.phi.lipschitz_grad;
}
}  // namespace detail

/// f(x) = phi(x) + g(x) - h(x); +inf from g propagates, non-finite phi or h
/// signals an invalid problem state.
inline double dc_value(const DcProblem& p, const Vector& x) {
  if (x.size() != p.dim) {
    throw DimensionError("dc_value: x has dimension " +
                         std::to_string(x.size()) + ", expected " +
                         std::to_string(p.dim));
  }
  const double gv = p.g.value(x);
  if (std::isnan(gv)) throw std::domain_error("dc_value: g returned NaN");
  if (gv == kInf) return kInf;
  const double pv = p.phi.value(x);
  const double hv = p.h.value(x);
  if (!std::isfinite(pv) || !std::isfinite(hv)) {
    throw std::domain_error("dc_value: non-finite phi or h value");
  }
  return pv + gv - hv;
}

/// grad f = grad phi + grad g - grad h; requires smooth views of g and h.
inline Vector dc_gradient(const DcProblem& p, const Vector& x) {
  if (x.size() != p.dim) {
    throw DimensionError("dc_gradient: dimension mismatch");
  }
  if (!p.g.smooth || !p.h.smooth) {
    throw CapabilityError("dc_gradient: g and h must expose smooth views");
  }
  return p.phi.gradient(x) + p.g.smooth->gradient(x) - p.h.smooth->gradient(x);
}

/// Solve min_y g(y) - <q - grad phi(x), y - x> + (lambda/2)|y - x|^2 with
/// q in the subdifferential of h at x. Completing the square reduces this
/// exactly to prox_{g, 1/lambda} at x + (q - grad phi(x))/lambda.
inline ProxResult subproblem_solve(const DcProblem& p, const Vector& x,
                                   double lambda_k) {
  if (!(lambda_k > 0.0)) {
    throw std::invalid_argument("subproblem_solve: lambda_k must be > 0");
  }
  if (x.size() != p.dim) {
    throw DimensionError("subproblem_solve: dimension mismatch");
  }
  const Vector w = p.h.subgradient_at(x) - p.phi.gradient(x);
  const double t = 1.0 / lambda_k;
  const Vector center = x + t * w;
  if (p.g.prox) return prox(*p.g.prox, t, center);
  if (p.g.smooth) return numeric_prox(*p.g.smooth, t, center);
  throw CapabilityError("subproblem_solve: g has neither prox nor smooth view");
}

}  // namespace dcprox
