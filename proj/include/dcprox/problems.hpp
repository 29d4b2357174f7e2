#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "dcprox/dc_problem.hpp"
#include "dcprox/rng.hpp"

namespace dcprox {

/// Largest eigenvalue of M'M (the squared spectral norm of M) by power
/// iteration on the PSD operator v -> M'(M v).
inline double largest_eigenvalue_mtm(const Matrix& M, double tol = 1e-10,
                                     int max_iter = 100000) {
  const Eigen::Index n = M.cols();
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.01 * static_cast<double>(i);
  v.normalize();
  double est = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = M.transpose() * (M * v);
    const double next = v.dot(w);
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;  // v in the kernel; M'M v = 0
    v = w / wn;
    if (it > 0 && std::abs(next - est) <= tol * std::max(1.0, std::abs(next))) {
      return next;
    }
    est = next;
  }
  return est;
}

inline double spectral_norm(const Matrix& M) {
  return std::sqrt(largest_eigenvalue_mtm(M));
}

namespace detail {

inline SmoothOracle zero_smooth(int dim) {
  SmoothOracle o;
  o.value = [](const Vector&) { return 0.0; };
  o.gradient = [dim](const Vector&) { return Vector::Zero(dim).eval(); };
  o.lipschitz_grad = 0.0;
  return o;
}

inline ConvexOracle zero_convex(int dim) {
  ConvexOracle o;
  o.value = [](const Vector&) { return 0.0; };
  o.subgradient = [dim](const Vector&) { return Vector::Zero(dim).eval(); };
  o.prox = ProxSpec::zero();
  o.smooth = zero_smooth(dim);
  return o;
}

inline ScalarFunction pow4_scalar() {
  ScalarFunction fn;
  fn.value = [](double u) { return u * u * u * u; };
  fn.deriv = [](double u) { return 4.0 * u * u * u; };
  fn.deriv2 = [](double u) { return 12.0 * u * u; };
  fn.name = "pow4";
  return fn;
}

/// g(x) = sum_i x_i^4 with smooth view, separable prox, and the local
/// gradient-Lipschitz constant 12 R^2 on the ball of radius R.
inline ConvexOracle quartic_convex(double box_radius) {
  ConvexOracle g;
  g.value = [](const Vector& x) { return x.array().pow(4).sum(); };
  SmoothOracle sm;
  sm.value = g.value;
  sm.gradient = [](const Vector& x) {
    return (4.0 * x.array().cube()).matrix().eval();
  };
  sm.lipschitz_grad_local = {{box_radius, 12.0 * box_radius * box_radius}};
  g.smooth = sm;
  g.subgradient = sm.gradient;
  g.prox = ProxSpec::separable_scalar(pow4_scalar());
  return g;
}

/// h(x) = |x|^2 with gradient 2x (globally 2-Lipschitz).
inline ConvexOracle squared_norm_convex() {
  ConvexOracle h;
  h.value = [](const Vector& x) { return x.squaredNorm(); };
  SmoothOracle sm;
  sm.value = h.value;
  sm.gradient = [](const Vector& x) { return (2.0 * x).eval(); };
  sm.lipschitz_grad = 2.0;
  h.smooth = sm;
  h.subgradient = sm.gradient;
  h.prox = ProxSpec::l2_squared(1.0);
  return h;
}

inline std::vector<Vector> sign_patterns(int n, double magnitude) {
  std::vector<Vector> out;
  if (n > 10) {  // cap the enumeration; keep the two uniform-sign points
    out.push_back(Vector::Constant(n, magnitude));
    out.push_back(Vector::Constant(n, -magnitude));
    return out;
  }
  const int count = 1 << n;
  out.reserve(count);
  for (int mask = 0; mask < count; ++mask) {
    Vector v(n);
    for (int i = 0; i < n; ++i) {
      v[i] = (mask >> i) & 1 ? -magnitude : magnitude;
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace detail

/// f(x) = sum_i (x_i^4 - x_i^2): phi = 0, g = sum x^4, h = |x|^2.
/// Minimizers are all sign patterns of 1/sqrt(2), fstar = -n/4; the minima
/// are nondegenerate (Lojasiewicz exponent 1/2).
inline DcProblem make_quartic_well(int n) {
  if (n < 1) throw ConfigError("quartic_well: n must be >= 1");
  DcProblem p;
  p.label = "quartic_well(n=" + std::to_string(n) + ")";
  p.dim = n;
  p.test_box_radius = 2.0;
  p.phi = detail::zero_smooth(n);
  p.g = detail::quartic_convex(p.test_box_radius);
  p.h = detail::squared_norm_convex();
  p.known_fstar = -0.25 * n;
  p.known_minimizers = detail::sign_patterns(n, 1.0 / std::sqrt(2.0));
  p.known_kl_exponent = 0.5;
  p.known_kl_constant = 0.5;   // verified by dense sampling in the test suite
  p.known_kl_radius = 0.15;
  p.compat = {SolverKind::bppa, SolverKind::ppa, SolverKind::inertial};
  return p;
}

/// f(x) = sum_i x_i^4: g = sum x^4, h = 0, phi = 0. The minimum at 0 is
/// degenerate with Lojasiewicz exponent 3/4; in 1-D |f|^{3/4} = |grad f|/4
/// exactly, and M = n^{1/4}/4 covers general n.
inline DcProblem make_degenerate_quartic(int n) {
  if (n < 1) throw ConfigError("degenerate_quartic: n must be >= 1");
  DcProblem p;
  p.label = "degenerate_quartic(n=" + std::to_string(n) + ")";
  p.dim = n;
  p.test_box_radius = 2.0;
  p.phi = detail::zero_smooth(n);
  p.g = detail::quartic_convex(p.test_box_radius);
  p.h = detail::zero_convex(n);
  p.known_fstar = 0.0;
  p.known_minimizers = {Vector::Zero(n)};
  p.known_kl_exponent = 0.75;
  p.known_kl_constant = std::pow(static_cast<double>(n), 0.25) / 4.0;
  p.known_kl_radius = 1.0;
  p.compat = {SolverKind::bppa, SolverKind::ppa, SolverKind::inertial};
  return p;
}

/// phi = 0.5 |Ax - b|^2, g = rho |x|_1, h = rho |x|_2. Nonsmooth at kinks,
/// so only the inertial scheme applies. Subgradient selections are the
/// minimal-norm elements: sign(x) with 0 at zeros, x/|x| with 0 at the origin.
inline DcProblem make_l1_minus_l2(const Matrix& A, const Vector& b,
                                  double rho) {
  if (!(rho > 0.0)) throw ConfigError("l1_minus_l2: rho must be > 0");
  if (A.rows() != b.size()) throw DimensionError("l1_minus_l2: A rows != b size");
  if (A.cwiseAbs().maxCoeff() == 0.0) {
    throw ConfigError("l1_minus_l2: A must be nonzero");
  }
  DcProblem p;
  const int n = static_cast<int>(A.cols());
  p.label = "l1_minus_l2(n=" + std::to_string(n) + ")";
  p.dim = n;
  p.test_box_radius = 2.0;

  p.phi.value = [A, b](const Vector& x) { return 0.5 * (A * x - b).squaredNorm(); };
  p.phi.gradient = [A, b](const Vector& x) {
    return (A.transpose() * (A * x - b)).eval();
  };
  p.phi.lipschitz_grad = largest_eigenvalue_mtm(A);

  p.g.value = [rho](const Vector& x) { return rho * x.lpNorm<1>(); };
  p.g.subgradient = [rho](const Vector& x) {
    Vector s(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      s[i] = x[i] > 0.0 ? rho : (x[i] < 0.0 ? -rho : 0.0);
    }
    return s;
  };
  p.g.prox = ProxSpec::l1(rho);

  p.h.value = [rho](const Vector& x) { return rho * x.norm(); };
  p.h.subgradient = [rho](const Vector& x) {
    const double nx = x.norm();
    return nx == 0.0 ? Vector::Zero(x.size()).eval() : (rho / nx * x).eval();
  };

  if (b.cwiseAbs().maxCoeff() == 0.0) {
    // f = 0.5|Ax|^2 + rho(|x|_1 - |x|_2) >= 0 with equality at the origin
    p.known_fstar = 0.0;
    p.known_minimizers = {Vector::Zero(n)};
  }
  p.compat = {SolverKind::inertial};
  return p;
}

/// Seeded instance: A (n x n) and b with uniform[-1,1] entries, A scaled so
/// its spectral norm equals `spectral_norm_target` (hence L1 for phi equals
/// its square, comfortably below 1 at the default 0.9).
inline DcProblem make_l1_minus_l2_random(int n, double rho, std::uint64_t seed,
                                         double spectral_norm_target = 0.9) {
  if (n < 1) throw ConfigError("l1_minus_l2: n must be >= 1");
  if (!(spectral_norm_target > 0.0)) {
    throw ConfigError("l1_minus_l2: spectral_norm target must be > 0");
  }
  Rng rng(seed);
  Matrix A(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = rng.uniform(-1.0, 1.0);
  }
  Vector b(n);
  for (int i = 0; i < n; ++i) b[i] = rng.uniform(-1.0, 1.0);
  const double sn = spectral_norm(A);
  if (sn == 0.0) throw ConfigError("l1_minus_l2: degenerate random draw");
  A *= spectral_norm_target / sn;
  DcProblem p = make_l1_minus_l2(A, b, rho);
  p.label = "l1_minus_l2(n=" + std::to_string(n) +
            ",seed=" + std::to_string(seed) + ")";
  return p;
}

/// phi = 0.5 x'Qx + c'x with symmetric (possibly indefinite) Q, g the box
/// indicator of [lo, hi], h = 0. f is extended-valued, so the boosted method
/// is excluded; the plain proximal point and inertial schemes apply.
inline DcProblem make_boxed_indefinite_quadratic(const Matrix& Q,
                                                 const Vector& c,
                                                 const Vector& lo,
                                                 const Vector& hi) {
  const int n = static_cast<int>(Q.rows());
  if (Q.cols() != n || c.size() != n || lo.size() != n || hi.size() != n) {
    throw DimensionError("boxed_quadratic: inconsistent dimensions");
  }
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ConfigError("boxed_quadratic: Q must be symmetric");
  }
  if ((lo.array() > hi.array()).any()) {
    throw ConfigError("boxed_quadratic: lo must be <= hi componentwise");
  }
  DcProblem p;
  p.label = "boxed_indefinite_quadratic(n=" + std::to_string(n) + ")";
  p.dim = n;
  p.test_box_radius = std::max(lo.cwiseAbs().maxCoeff(), hi.cwiseAbs().maxCoeff());

  p.phi.value = [Q, c](const Vector& x) { return 0.5 * x.dot(Q * x) + c.dot(x); };
  p.phi.gradient = [Q, c](const Vector& x) { return (Q * x + c).eval(); };
  p.phi.lipschitz_grad = spectral_norm(Q);

  ProxSpec box = ProxSpec::box_indicator(lo, hi);
  p.g.value = [box](const Vector& x) { return box.value(x); };
  p.g.subgradient = [n](const Vector&) { return Vector::Zero(n).eval(); };
  p.g.prox = box;
  p.h = detail::zero_convex(n);

  // diagonal Q: fstar separates per coordinate with closed-form minima
  if (Q.isDiagonal(1e-14)) {
    double fstar = 0.0;
    for (int i = 0; i < n; ++i) {
      const double q = Q(i, i), ci = c[i];
      const auto val = [&](double t) { return 0.5 * q * t * t + ci * t; };
      double best = std::min(val(lo[i]), val(hi[i]));
      if (q > 0.0) {
        const double t = -ci / q;
        if (t > lo[i] && t < hi[i]) best = std::min(best, val(t));
      }
      fstar += best;
    }
    p.known_fstar = fstar;
  }
  p.compat = {SolverKind::ppa, SolverKind::inertial};
  return p;
}

}  // namespace dcprox
