#include "test_support.hpp"

using namespace dcprox;
using Catch::Approx;

namespace {

Vector vec1(double v) {
  Vector x(1);
  x << v;
  return x;
}

ScalarFunction pow4() {
  ScalarFunction fn;
  fn.value = [](double u) { return u * u * u * u; };
  fn.deriv = [](double u) { return 4.0 * u * u * u; };
  fn.deriv2 = [](double u) { return 12.0 * u * u; };
  fn.name = "pow4";
  return fn;
}

/// Grid oracle for the 1-D prox objective g(x) + (1/(2t))(x - v)^2.
template <class G>
double grid_prox_1d(G&& g, double t, double v, double lo = -10.0,
                    double hi = 10.0, double step = 1e-4) {
  auto obj = [&](double x) { return g(x) + (x - v) * (x - v) / (2.0 * t); };
  return testsup::grid_min_1d(obj, lo, hi, step).first;
}

}  // namespace

TEST_CASE("l1 prox soft-thresholds") {
  const ProxSpec s = ProxSpec::l1(1.0);
  CHECK(prox(s, 1.0, vec1(3.0)).y[0] == Approx(2.0).margin(1e-12));
  CHECK(prox(s, 1.0, vec1(0.5)).y[0] == 0.0);
  // grid oracle over |x| + (x-v)^2/2
  const double oracle = grid_prox_1d([](double x) { return std::abs(x); }, 1.0, 3.0);
  CHECK(prox(s, 1.0, vec1(3.0)).y[0] == Approx(oracle).margin(2e-4));
}

TEST_CASE("zero prox is the identity") {
  const ProxSpec s = ProxSpec::zero();
  const Vector v = vec1(-4.2);
  CHECK(prox(s, 0.7, v).y == v);
}

TEST_CASE("l2_squared prox shrinks toward the origin") {
  // g = 0.5|x|^2, t = 1: optimality y + (y - v) = 0 gives y = v/2
  const ProxSpec s = ProxSpec::l2_squared(0.5);
  CHECK(prox(s, 1.0, vec1(2.0)).y[0] == Approx(1.0).margin(1e-14));
}

TEST_CASE("box prox clips and rejects empty boxes") {
  const ProxSpec s = ProxSpec::box_indicator(vec1(-1.0), vec1(1.0));
  CHECK(prox(s, 1.0, vec1(2.0)).y[0] == 1.0);
  CHECK(prox(s, 1.0, vec1(0.3)).y[0] == Approx(0.3));
  CHECK_THROWS_AS(ProxSpec::box_indicator(vec1(1.0), vec1(-1.0)), ConfigError);
}

TEST_CASE("ball prox projects radially") {
  const ProxSpec s = ProxSpec::ball_indicator(1.0);
  Vector v(2);
  v << 3.0, 4.0;
  const Vector y = prox(s, 2.0, v).y;
  CHECK(y.norm() == Approx(1.0));
  CHECK(y[0] == Approx(0.6));
  CHECK(y[1] == Approx(0.8));
}

TEST_CASE("quadratic prox solves the shifted normal equations") {
  Matrix Q(2, 2);
  Q << 2.0, 0.5, 0.5, 1.0;
  Vector c(2);
  c << -1.0, 0.3;
  const ProxSpec s = ProxSpec::quadratic(Q, c);
  Vector v(2);
  v << 0.7, -0.2;
  const double t = 0.8;
  const auto r = prox(s, t, v);
  CHECK((Q * r.y + c + (r.y - v) / t).norm() <= 1e-12);
  CHECK(prox_optimality_residual(s, t, v, r.y) <= 1e-12);

  Matrix neg = -Matrix::Identity(2, 2);
  CHECK_THROWS_AS(ProxSpec::quadratic(neg, c), ConfigError);
  Matrix asym(2, 2);
  asym << 1.0, 0.4, -0.4, 1.0;
  CHECK_THROWS_AS(ProxSpec::quadratic(asym, c), ConfigError);
}

TEST_CASE("separable quartic prox matches the cubic root") {
  // minimize y^4 + (3/2)(y - 5/3)^2: stationarity 4y^3 + 3y - 5 = 0
  const ProxSpec s = ProxSpec::separable_scalar(pow4());
  const double root = testsup::bisect_root(
      [](double y) { return 4.0 * y * y * y + 3.0 * y - 5.0; }, 0.0, 2.0);
  const auto r = prox(s, 1.0 / 3.0, vec1(5.0 / 3.0));
  CHECK(r.y[0] == Approx(root).margin(1e-10));
  CHECK(r.y[0] == Approx(0.8494).margin(1e-4));
  CHECK(std::abs(4.0 * std::pow(r.y[0], 3) + 3.0 * r.y[0] - 5.0) <= 1e-10);
}

TEST_CASE("numeric prox on a smooth quadratic") {
  SmoothOracle half_sq;
  half_sq.value = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  half_sq.gradient = [](const Vector& x) { return x; };
  half_sq.lipschitz_grad = 1.0;
  // closed form v/(1+t)
  const auto r = numeric_prox(half_sq, 1.0, vec1(2.0));
  CHECK(r.y[0] == Approx(1.0).margin(1e-10));
  CHECK(r.residual <= 1e-10 * 3.0);

  // fixed point: grad g(v) = 0 keeps y = v
  const auto fp = numeric_prox(half_sq, 5.0, vec1(0.0));
  CHECK(fp.y[0] == 0.0);
  CHECK(fp.inner_iterations == 0);

  NumericProxOptions tight;
  tight.max_inner = 1;
  tight.tol_scale = 1e-16;
  CHECK_THROWS_AS(numeric_prox(half_sq, 1.0, vec1(100.0), tight), ProxFailure);

  SmoothOracle no_constant = half_sq;
  no_constant.lipschitz_grad.reset();
  CHECK_THROWS_AS(numeric_prox(no_constant, 1.0, vec1(1.0)), CapabilityError);
}

TEST_CASE("prox_optimality_residual certificates") {
  const ProxSpec l1 = ProxSpec::l1(1.0);
  // s = 1 satisfies 1 + (2-3)/1 = 0
  CHECK(prox_optimality_residual(l1, 1.0, vec1(3.0), vec1(2.0)) ==
        Approx(0.0).margin(1e-15));
  CHECK(prox_optimality_residual(ProxSpec::zero(), 1.0, vec1(5.0), vec1(5.0)) ==
        0.0);
  // y > 0 forces s = 1: |1 + (2.5-3)| = 0.5
  CHECK(prox_optimality_residual(l1, 1.0, vec1(3.0), vec1(2.5)) ==
        Approx(0.5).margin(1e-15));
}

TEST_CASE("catalog proxes satisfy the first-order condition at random inputs") {
  Rng rng(42);
  Matrix Q(3, 3);
  Q << 2.0, 0.3, 0.0, 0.3, 1.5, -0.2, 0.0, -0.2, 1.0;
  SmoothOracle smooth_sq;
  smooth_sq.value = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  smooth_sq.gradient = [](const Vector& x) { return x; };
  smooth_sq.lipschitz_grad = 1.0;
  const std::vector<ProxSpec> specs = {
      ProxSpec::zero(),
      ProxSpec::l1(0.7),
      ProxSpec::l2_squared(0.4),
      ProxSpec::box_indicator(Vector::Constant(3, -0.8), Vector::Constant(3, 1.2)),
      ProxSpec::ball_indicator(1.1),
      ProxSpec::quadratic(Q, Vector::Zero(3)),
      ProxSpec::separable_scalar(pow4()),
      ProxSpec::numeric(smooth_sq)};
  for (const auto& spec : specs) {
    for (int i = 0; i < 1000; ++i) {
      const double t = rng.uniform(0.05, 5.0);
      const Vector v = rng.uniform_box(3, -5.0, 5.0);
      const auto r = prox(spec, t, v);
      CHECK(prox_optimality_residual(spec, t, v, r.y) <= 1e-8);
    }
  }
}

TEST_CASE("prox is nonexpansive") {
  Rng rng(43);
  const std::vector<ProxSpec> specs = {
      ProxSpec::l1(0.7), ProxSpec::l2_squared(0.4),
      ProxSpec::box_indicator(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0)),
      ProxSpec::ball_indicator(0.9), ProxSpec::separable_scalar(pow4())};
  for (const auto& spec : specs) {
    for (int i = 0; i < 300; ++i) {
      const double t = rng.uniform(0.05, 5.0);
      const Vector v1 = rng.uniform_box(2, -5.0, 5.0);
      const Vector v2 = rng.uniform_box(2, -5.0, 5.0);
      const Vector y1 = prox(spec, t, v1).y;
      const Vector y2 = prox(spec, t, v2).y;
      CHECK((y1 - y2).norm() <= (v1 - v2).norm() * (1.0 + 1e-12) + 1e-12);
    }
  }
}

TEST_CASE("scalar kinds match 1-D grid minimization") {
  Rng rng(44);
  for (int i = 0; i < 100; ++i) {
    const double t = rng.uniform(0.1, 4.0);
    const double v = rng.uniform(-5.0, 5.0);
    CHECK(prox(ProxSpec::l1(0.7), t, vec1(v)).y[0] ==
          Approx(grid_prox_1d([](double x) { return 0.7 * std::abs(x); }, t, v))
              .margin(2e-4));
    CHECK(prox(ProxSpec::separable_scalar(pow4()), t, vec1(v)).y[0] ==
          Approx(grid_prox_1d([](double x) { return std::pow(x, 4); }, t, v))
              .margin(2e-4));
  }
}

TEST_CASE("subproblem_solve reduces to a shifted prox") {
  SECTION("quartic well at x=1, lambda=3 solves 4y^3 + 3y - 5 = 0") {
    const DcProblem p = make_quartic_well(1);
    const auto r = subproblem_solve(p, vec1(1.0), 3.0);
    const double root = testsup::bisect_root(
        [](double y) { return 4.0 * y * y * y + 3.0 * y - 5.0; }, 0.0, 2.0);
    CHECK(r.y[0] == Approx(root).margin(1e-9));
  }
  SECTION("stationary gradient keeps y = x") {
    DcProblem p;
    p.label = "flat";
    p.dim = 1;
    p.phi.value = [](const Vector& x) { return std::cos(x[0]); };
    p.phi.gradient = [](const Vector& x) {
      return vec1(-std::sin(x[0]));
    };
    p.phi.lipschitz_grad = 1.0;
    p.g.value = [](const Vector&) { return 0.0; };
    p.g.prox = ProxSpec::zero();
    p.h.value = [](const Vector&) { return 0.0; };
    p.h.subgradient = [](const Vector&) { return vec1(0.0); };
    const Vector x = vec1(0.0);  // sin(0) = 0
    CHECK(subproblem_solve(p, x, 2.0).y[0] == 0.0);
  }
  SECTION("box-constrained gradient step clips") {
    // g = indicator([-1,1]), h = 0, phi = x^2/2: center v = 2 - 2 = 0
    const Matrix Q = Matrix::Identity(1, 1);
    const DcProblem p = make_boxed_indefinite_quadratic(
        Q, Vector::Zero(1), vec1(-1.0), vec1(1.0));
    CHECK(subproblem_solve(p, vec1(2.0), 1.0).y[0] == 0.0);
  }
}

TEST_CASE("subproblem objective is minimal at the returned point") {
  const DcProblem p = make_quartic_well(2);
  Rng rng(45);
  Vector x(2);
  x << 1.0, -0.4;
  const double lambda = 2.5;
  const auto r = subproblem_solve(p, x, lambda);
  const auto objective = [&](const Vector& z) {
    const Vector w = p.h.subgradient_at(x) - p.phi.gradient(x);
    return p.g.value(z) - w.dot(z - x) + 0.5 * lambda * (z - x).squaredNorm();
  };
  const double at_y = objective(r.y);
  for (int i = 0; i < 100; ++i) {
    const Vector z = r.y + rng.uniform_ball(2, 0.1);
    CHECK(at_y <= objective(z) + 1e-12);
  }
}
