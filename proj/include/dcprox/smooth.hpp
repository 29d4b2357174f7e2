#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dcprox/errors.hpp"
#include "dcprox/types.hpp"

namespace dcprox {

/// Oracle for a continuously differentiable function. Lipschitz metadata is
/// declared by the problem author, never estimated from the oracle:
/// `lipschitz_grad` is a global constant for the gradient;
/// `lipschitz_grad_local` holds (radius, constant) pairs valid on the
/// origin-centered ball of that radius.
struct SmoothOracle {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::optional<double> lipschitz_grad;
  std::vector<std::pair<double, double>> lipschitz_grad_local;

  /// Tightest declared gradient-Lipschitz constant valid on B(0, radius).
  std::optional<double> lipschitz_on_radius(double radius) const {
    std::optional<double> best = lipschitz_grad;
    for (const auto& [r, L] : lipschitz_grad_local) {
      if (r >= radius && (!best || L < *best)) best = L;
    }
    return best;
  }
};

/// Step balancing truncation against rounding for central differences.
inline double default_fd_step(const Vector& x) {
  return 1e-5 * (1.0 + x.lpNorm<Eigen::Infinity>());
}

/// Central finite differences, one +/- probe pair per coordinate.
inline Vector finite_diff_gradient(const SmoothOracle& oracle, const Vector& x,
                                   double step) {
  if (!(step > 0.0)) {
    throw std::invalid_argument("finite_diff_gradient: step must be > 0");
  }
  Vector grad(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double fp = oracle.value(probe);
    probe[i] = x[i] - step;
    const double fm = oracle.value(probe);
    probe[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw std::domain_error("finite_diff_gradient: non-finite value at probe point");
    }
    grad[i] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

/// True iff f(y) <= f(x) + <grad f(x), y-x> + (L/2)|y-x|^2, the quadratic
/// upper bound available when the gradient is L-Lipschitz. Additive slack
/// 1e-12*(1+|f(x)|) absorbs rounding in the equality case.
inline bool descent_lemma_check(const SmoothOracle& oracle, double L,
                                const Vector& x, const Vector& y) {
  const double fx = oracle.value(x);
  const double lhs = oracle.value(y);
  const double rhs =
      fx + oracle.gradient(x).dot(y - x) + 0.5 * L * (y - x).squaredNorm();
  return lhs <= rhs + 1e-12 * (1.0 + std::abs(fx));
}

}  // namespace dcprox
