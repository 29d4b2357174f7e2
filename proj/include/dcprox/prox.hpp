#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <variant>

#include "dcprox/errors.hpp"
#include "dcprox/smooth.hpp"
#include "dcprox/types.hpp"

namespace dcprox {

/// prox_{t g}(v) = argmin_x g(x) + (1/(2t))|x - v|^2. `residual` measures the
/// first-order condition |s + (y - v)/t| for a representable s in the
/// subdifferential of g at y; it is 0 up to rounding for closed-form kinds.
struct ProxResult {
  Vector y;
  double residual = 0.0;
  int inner_iterations = 0;
};

struct NumericProxOptions {
  double tol_scale = 1e-10;  // stop at gradient norm <= tol_scale*(1+|v|)
  int max_inner = 10000;
};

// ---- catalog kinds ---------------------------------------------------------

struct ZeroProx {};

/// g(x) = weight * |x|_1
struct L1Prox {
  double weight = 1.0;
};

/// g(x) = weight * |x|^2
struct L2SquaredProx {
  double weight = 0.5;
};

/// Indicator of the box [lo, hi] (componentwise).
struct BoxIndicatorProx {
  Vector lo, hi;
};

/// Indicator of the Euclidean ball B(0, radius).
struct BallIndicatorProx {
  double radius = 1.0;
};

/// g(x) = 0.5 x'Qx + c'x with Q symmetric positive semidefinite.
struct QuadraticProx {
  Matrix Q;
  Vector c;
};

/// A convex scalar function applied coordinatewise: g(x) = sum_i fn(x_i).
/// deriv2 may be empty; the scalar solver then falls back to pure bisection.
struct ScalarFunction {
  std::function<double(double)> value;
  std::function<double(double)> deriv;
  std::function<double(double)> deriv2;
  std::string name;
};

struct SeparableScalarProx {
  ScalarFunction fn;
};

/// Smooth convex g without a closed form; prox computed by an inner solver.
struct NumericProxKind {
  SmoothOracle smooth;
  NumericProxOptions opts;
};

namespace detail {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace detail

/// A convex function with a declared prox capability. Construction validates
/// kind-specific requirements (Q PSD, lo <= hi, radius > 0, ...).
class ProxSpec {
 public:
  using Kind = std::variant<ZeroProx, L1Prox, L2SquaredProx, BoxIndicatorProx,
                            BallIndicatorProx, QuadraticProx,
                            SeparableScalarProx, NumericProxKind>;

  static ProxSpec zero() { return ProxSpec(ZeroProx{}); }

  static ProxSpec l1(double weight) {
    if (!(weight >= 0.0)) throw ConfigError("l1 prox: weight must be >= 0");
    return ProxSpec(L1Prox{weight});
  }

  static ProxSpec l2_squared(double weight) {
    if (!(weight >= 0.0)) throw ConfigError("l2_squared prox: weight must be >= 0");
    return ProxSpec(L2SquaredProx{weight});
  }

  static ProxSpec box_indicator(Vector lo, Vector hi) {
    if (lo.size() != hi.size()) {
      throw DimensionError("box prox: lo and hi must have equal dimension");
    }
    if ((lo.array() > hi.array()).any()) {
      throw ConfigError("box prox: empty feasible set (lo > hi somewhere)");
    }
    return ProxSpec(BoxIndicatorProx{std::move(lo), std::move(hi)});
  }

  static ProxSpec ball_indicator(double radius) {
    if (!(radius >= 0.0)) throw ConfigError("ball prox: radius must be >= 0");
    return ProxSpec(BallIndicatorProx{radius});
  }

  static ProxSpec quadratic(Matrix Q, Vector c) {
    if (Q.rows() != Q.cols() || Q.rows() != c.size()) {
      throw DimensionError("quadratic prox: Q must be square and match c");
    }
    const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw ConfigError("quadratic prox: Q must be symmetric");
    }
    // PSD check: pivoted LDL' must produce no significantly negative pivot
    Eigen::LDLT<Matrix> ldlt(Q);
    if (ldlt.info() != Eigen::Success ||
        ldlt.vectorD().minCoeff() < -1e-10 * scale) {
      throw ConfigError("quadratic prox: Q must be positive semidefinite");
    }
    return ProxSpec(QuadraticProx{std::move(Q), std::move(c)});
  }

  static ProxSpec separable_scalar(ScalarFunction fn) {
    if (!fn.value || !fn.deriv) {
      throw ConfigError("separable prox: scalar value and deriv are required");
    }
    return ProxSpec(SeparableScalarProx{std::move(fn)});
  }

  static ProxSpec numeric(SmoothOracle smooth, NumericProxOptions opts = {}) {
    if (!smooth.value || !smooth.gradient) {
      throw ConfigError("numeric prox: smooth value and gradient are required");
    }
    return ProxSpec(NumericProxKind{std::move(smooth), opts});
  }

  const Kind& kind() const { return kind_; }

  /// Extended-real value of the underlying convex function.
  double value(const Vector& x) const {
    return std::visit(
        detail::overloaded{
            [](const ZeroProx&) { return 0.0; },
            [&](const L1Prox& k) { return k.weight * x.lpNorm<1>(); },
            [&](const L2SquaredProx& k) { return k.weight * x.squaredNorm(); },
            [&](const BoxIndicatorProx& k) {
              const bool in = (x.array() >= k.lo.array()).all() &&
                              (x.array() <= k.hi.array()).all();
              return in ? 0.0 : kInf;
            },
            [&](const BallIndicatorProx& k) {
              // relative slack keeps the projection's own output feasible
              return x.norm() <= k.radius * (1.0 + 1e-12) ? 0.0 : kInf;
            },
            [&](const QuadraticProx& k) {
              return 0.5 * x.dot(k.Q * x) + k.c.dot(x);
            },
            [&](const SeparableScalarProx& k) {
              double s = 0.0;
              for (Eigen::Index i = 0; i < x.size(); ++i) s += k.fn.value(x[i]);
              return s;
            },
            [&](const NumericProxKind& k) { return k.smooth.value(x); },
        },
        kind_);
  }

 private:
  explicit ProxSpec(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

namespace detail {

/// Root of psi(y) = t*fn'(y) + y - v (strictly increasing for convex fn).
/// Safeguarded Newton inside a sign-changing bracket; falls back to bisection
/// whenever the Newton step leaves the bracket or curvature is unavailable.
struct ScalarProxSolve {
  double y;
  double residual;  // |fn'(y) + (y - v)/t|
  int iterations;
};

inline ScalarProxSolve scalar_prox_solve(const ScalarFunction& fn, double t,
                                         double v) {
  const auto psi = [&](double y) { return t * fn.deriv(y) + y - v; };
  double lo = std::min(0.0, v), hi = std::max(0.0, v);
  double plo = psi(lo), phi_hi = psi(hi);
  // the default bracket covers scalar functions minimized at 0; expand otherwise
  double width = std::max(1.0, hi - lo);
  for (int i = 0; i < 200 && plo > 0.0; ++i) {
    lo -= width;
    width *= 2.0;
    plo = psi(lo);
  }
  for (int i = 0; i < 200 && phi_hi < 0.0; ++i) {
    hi += width;
    width *= 2.0;
    phi_hi = psi(hi);
  }
  if (plo > 0.0 || phi_hi < 0.0) {
    throw ProxFailure("separable prox: could not bracket the scalar root");
  }
  const double ytol = 1e-16 * (1.0 + std::abs(v));
  const double ptol = 1e-15 * (1.0 + std::abs(v));
  double y = 0.5 * (lo + hi);
  int it = 0;
  for (; it < 200; ++it) {
    const double p = psi(y);
    if (std::abs(p) <= ptol) break;
    if (p > 0.0) {
      hi = y;
    } else {
      lo = y;
    }
    if (hi - lo <= ytol) break;
    double ynext = 0.0;
    bool newton_ok = false;
    if (fn.deriv2) {
      const double slope = t * fn.deriv2(y) + 1.0;
      if (slope > 0.0 && std::isfinite(slope)) {
        ynext = y - p / slope;
        newton_ok = ynext > lo && ynext < hi;
      }
    }
    y = newton_ok ? ynext : 0.5 * (lo + hi);
  }
  return {y, std::abs(psi(y)) / t, it};
}

}  // namespace detail

/// Inner solver for prox of a smooth convex g: fixed-step gradient descent on
/// the (1/t)-strongly convex objective g(x) + (1/(2t))|x - v|^2, with step
/// 1/(L_g + 1/t). Requires a declared gradient Lipschitz constant.
inline ProxResult numeric_prox(const SmoothOracle& smooth, double t,
                               const Vector& v,
                               const NumericProxOptions& opts = {}) {
  if (!(t > 0.0)) throw std::invalid_argument("numeric_prox: t must be > 0");
  if (!smooth.lipschitz_grad) {
    throw CapabilityError(
        "numeric_prox: a declared global gradient Lipschitz constant is required");
  }
  const double step = 1.0 / (*smooth.lipschitz_grad + 1.0 / t);
  const double tol = opts.tol_scale * (1.0 + v.norm());
  Vector y = v;
  for (int it = 0; it < opts.max_inner; ++it) {
    const Vector grad = smooth.gradient(y) + (y - v) / t;
    const double gn = grad.norm();
    if (gn <= tol) return {y, gn, it};
    y -= step * grad;
  }
  throw ProxFailure("numeric_prox: inner iteration cap exceeded");
}

/// Evaluate prox_{t g}(v) for the catalog kind held by `spec`.
inline ProxResult prox(const ProxSpec& spec, double t, const Vector& v) {
  if (!(t > 0.0)) throw std::invalid_argument("prox: t must be > 0");
  return std::visit(
      detail::overloaded{
          [&](const ZeroProx&) -> ProxResult { return {v, 0.0, 0}; },
          [&](const L1Prox& k) -> ProxResult {
            const double thr = k.weight * t;
            Vector y(v.size());
            for (Eigen::Index i = 0; i < v.size(); ++i) {
              const double a = std::abs(v[i]) - thr;
              y[i] = a > 0.0 ? (v[i] > 0.0 ? a : -a) : 0.0;
            }
            return {std::move(y), 0.0, 0};
          },
          [&](const L2SquaredProx& k) -> ProxResult {
            // 2wy + (y - v)/t = 0  =>  y = v/(1 + 2wt)
            return {v / (1.0 + 2.0 * k.weight * t), 0.0, 0};
          },
          [&](const BoxIndicatorProx& k) -> ProxResult {
            return {v.cwiseMax(k.lo).cwiseMin(k.hi), 0.0, 0};
          },
          [&](const BallIndicatorProx& k) -> ProxResult {
            const double n = v.norm();
            if (n <= k.radius) return {v, 0.0, 0};
            return {v * (k.radius / n), 0.0, 0};
          },
          [&](const QuadraticProx& k) -> ProxResult {
            // (Q + I/t) y = v/t - c, positive definite for t > 0
            Matrix M = k.Q;
            M.diagonal().array() += 1.0 / t;
            Vector y = Eigen::LLT<Matrix>(M).solve(v / t - k.c);
            const double res = (k.Q * y + k.c + (y - v) / t).norm();
            return {std::move(y), res, 0};
          },
          [&](const SeparableScalarProx& k) -> ProxResult {
            Vector y(v.size());
            double res_sq = 0.0;
            int iters = 0;
            for (Eigen::Index i = 0; i < v.size(); ++i) {
              const auto s = detail::scalar_prox_solve(k.fn, t, v[i]);
              y[i] = s.y;
              res_sq += s.residual * s.residual;
              iters = std::max(iters, s.iterations);
            }
            return {std::move(y), std::sqrt(res_sq), iters};
          },
          [&](const NumericProxKind& k) -> ProxResult {
            return numeric_prox(k.smooth, t, v, k.opts);
          },
      },
      spec.kind());
}

/// |s + (y - v)/t| minimized over the representable subgradient choices s of
/// the spec's function at y. Zero certifies y = prox_{t g}(v).
inline double prox_optimality_residual(const ProxSpec& spec, double t,
                                       const Vector& v, const Vector& y) {
  if (!(t > 0.0)) {
    throw std::invalid_argument("prox_optimality_residual: t must be > 0");
  }
  const Vector w = (v - y) / t;  // the subgradient certificate to match
  return std::visit(
      detail::overloaded{
          [&](const ZeroProx&) { return w.norm(); },
          [&](const L1Prox& k) {
            double sq = 0.0;
            for (Eigen::Index i = 0; i < y.size(); ++i) {
              // y != 0 forces s = weight*sign(y); at 0 project w onto [-weight, weight]
              double s;
              if (y[i] > 0.0) {
                s = k.weight;
              } else if (y[i] < 0.0) {
                s = -k.weight;
              } else {
                s = std::clamp(w[i], -k.weight, k.weight);
              }
              const double r = s - w[i];
              sq += r * r;
            }
            return std::sqrt(sq);
          },
          [&](const L2SquaredProx& k) {
            return (2.0 * k.weight * y - w).norm();
          },
          [&](const BoxIndicatorProx& k) {
            // distance of w from the normal cone of [lo, hi] at y
            double sq = 0.0;
            for (Eigen::Index i = 0; i < y.size(); ++i) {
              const bool at_lo = y[i] <= k.lo[i];
              const bool at_hi = y[i] >= k.hi[i];
              double s = 0.0;
              if (at_lo && at_hi) {
                s = w[i];
              } else if (at_lo) {
                s = std::min(w[i], 0.0);
              } else if (at_hi) {
                s = std::max(w[i], 0.0);
              }
              const double r = s - w[i];
              sq += r * r;
            }
            return std::sqrt(sq);
          },
          [&](const BallIndicatorProx& k) {
            const double n = y.norm();
            if (n < k.radius * (1.0 - 1e-12) || n == 0.0) return w.norm();
            const Vector yhat = y / n;
            const double c = std::max(0.0, w.dot(yhat));
            return (c * yhat - w).norm();
          },
          [&](const QuadraticProx& k) { return (k.Q * y + k.c - w).norm(); },
          [&](const SeparableScalarProx& k) {
            double sq = 0.0;
            for (Eigen::Index i = 0; i < y.size(); ++i) {
              const double r = k.fn.deriv(y[i]) - w[i];
              sq += r * r;
            }
            return std::sqrt(sq);
          },
          [&](const NumericProxKind& k) {
            return (k.smooth.gradient(y) - w).norm();
          },
      },
      spec.kind());
}

}  // namespace dcprox
