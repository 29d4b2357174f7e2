#include "test_support.hpp"

using namespace dcprox;
using Catch::Approx;

namespace {

Vector vec1(double v) {
  Vector x(1);
  x << v;
  return x;
}

}  // namespace

TEST_CASE("quartic well analytic facts replay against grid search") {
  const DcProblem p1 = make_quartic_well(1);
  CHECK(p1.known_fstar.value() == Approx(-0.25));
  const auto [gx, gf] = testsup::grid_min_1d(
      [&](double x) { return dc_value(p1, vec1(x)); }, -2.0, 2.0, 1e-5);
  CHECK(std::abs(gf - *p1.known_fstar) <= 1e-6);
  CHECK(std::abs(std::abs(gx) - 1.0 / std::sqrt(2.0)) <= 1e-4);

  const DcProblem p2 = make_quartic_well(2);
  const auto [gx2, gf2] = testsup::grid_min_2d(
      [&](const Vector& x) { return dc_value(p2, x); }, -2.0, 2.0, 1e-3);
  CHECK(std::abs(gf2 - *p2.known_fstar) <= 1e-6);

  const DcProblem p3 = make_quartic_well(3);
  CHECK(p3.known_fstar.value() == Approx(-0.75));  // separability: 3 * (-1/4)
  CHECK(p3.known_minimizers.size() == 8);          // all sign patterns
  for (const auto& m : p3.known_minimizers) {
    CHECK(dc_value(p3, m) == Approx(*p3.known_fstar).margin(1e-12));
    CHECK(dc_gradient(p3, m).norm() <= 1e-12);
  }
}

TEST_CASE("the origin is a stationary non-minimum of the quartic well") {
  const DcProblem p = make_quartic_well(1);
  CHECK(dc_value(p, vec1(0.0)) == 0.0);
  CHECK(dc_gradient(p, vec1(0.0)).norm() == 0.0);
}

TEST_CASE("degenerate quartic KL identity in 1-D") {
  const DcProblem p = make_degenerate_quartic(1);
  CHECK(p.known_fstar.value() == 0.0);
  CHECK(dc_value(p, vec1(0.0)) == 0.0);
  // |f|^{3/4} = |x|^3 = |grad f|/4 exactly
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-2.0, 2.0);
    const double lhs = std::pow(std::abs(dc_value(p, vec1(x))), 0.75);
    const double rhs = 0.25 * dc_gradient(p, vec1(x)).norm();
    CHECK(lhs == Approx(rhs).margin(1e-10));
  }
}

TEST_CASE("declared Lojasiewicz data passes the sampling check") {
  for (int n : {1, 2}) {
    const DcProblem q = make_quartic_well(n);
    const auto rq = lojasiewicz_check(q, q.known_minimizers.front(),
                                      *q.known_kl_exponent, *q.known_kl_constant,
                                      *q.known_kl_radius, 10000, 21);
    INFO("quartic_well n=" << n << " worst ratio " << rq.worst_ratio);
    CHECK(rq.holds);

    const DcProblem d = make_degenerate_quartic(n);
    const auto rd = lojasiewicz_check(d, d.known_minimizers.front(),
                                      *d.known_kl_exponent, *d.known_kl_constant,
                                      *d.known_kl_radius, 10000, 22);
    INFO("degenerate n=" << n << " worst ratio " << rd.worst_ratio);
    CHECK(rd.holds);
  }
}

TEST_CASE("l1_minus_l2 collapses to a quadratic in 1-D with A = I, b = 0") {
  const Matrix A = Matrix::Identity(1, 1);
  const DcProblem p = make_l1_minus_l2(A, Vector::Zero(1), 1.0);
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    const double x = rng.uniform(-3.0, 3.0);
    CHECK(dc_value(p, vec1(x)) == Approx(0.5 * x * x).margin(1e-12));
  }
  CHECK(p.known_fstar.value() == 0.0);
}

TEST_CASE("l1_minus_l2 value at the origin is half the data norm") {
  const DcProblem p = make_l1_minus_l2_random(4, 0.2, 31);
  // f(0) = 0.5 |b|^2 since |0|_1 = |0|_2 = 0; recover b through phi
  const double f0 = dc_value(p, Vector::Zero(4));
  CHECK(f0 == Approx(p.phi.value(Vector::Zero(4))));
}

TEST_CASE("l1_minus_l2 2-D reference minimum by grid search") {
  const Matrix A = Matrix::Identity(2, 2);
  Vector b(2);
  b << 1.0, 0.0;
  const DcProblem p = make_l1_minus_l2(A, b, 0.1);
  const auto [gx, gf] = testsup::grid_min_2d(
      [&](const Vector& x) { return dc_value(p, x); }, -2.0, 2.0, 1e-3);

  InertialParams ip;
  ip.lambda = 0.4;  // margin below the step condition at L1 = 1
  InertialOptions opts;
  const Vector x0 = Vector::Ones(2);
  const Trace tr = solve_inertial(p, x0, default_inertial_y0(ip, x0), ip, opts);
  REQUIRE(tr.termination == Termination::converged);
  CHECK(tr.records.back().f_x <= gf + 1e-3);
  CHECK(std::abs(tr.records.back().f_x - gf) <= 1e-3);
}

TEST_CASE("declared L1 equals the largest eigenvalue of A'A") {
  const DcProblem p = make_l1_minus_l2_random(5, 0.1, 7);
  // independent oracle: dense symmetric eigensolver
  // (recover A'A from the gradient: grad phi(x) - grad phi(0) = A'A x)
  Matrix ata(5, 5);
  const Vector g0 = p.phi.gradient(Vector::Zero(5));
  for (int j = 0; j < 5; ++j) {
    ata.col(j) = p.phi.gradient(Vector::Unit(5, j)) - g0;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(ata);
  CHECK(p.phi.lipschitz_grad.value() ==
        Approx(eig.eigenvalues().maxCoeff()).margin(1e-8));
}

TEST_CASE("boxed indefinite quadratic facts") {
  SECTION("concave 1-D attains the minimum at the box ends") {
    const Matrix Q = -Matrix::Identity(1, 1);
    const DcProblem p = make_boxed_indefinite_quadratic(
        Q, Vector::Zero(1), vec1(-1.0), vec1(1.0));
    CHECK(p.known_fstar.value() == Approx(-0.5));
    CHECK(dc_value(p, vec1(1.0)) == Approx(-0.5));
    CHECK(dc_value(p, vec1(-1.0)) == Approx(-0.5));
    const auto [gx, gf] = testsup::grid_min_1d(
        [&](double x) { return std::abs(x) <= 1.0 ? dc_value(p, vec1(x)) : 1e9; },
        -1.0, 1.0, 1e-5);
    CHECK(std::abs(gf - *p.known_fstar) <= 1e-6);
  }
  SECTION("saddle 2-D") {
    Matrix Q(2, 2);
    Q << 1.0, 0.0, 0.0, -1.0;
    const DcProblem p = make_boxed_indefinite_quadratic(
        Q, Vector::Zero(2), Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
    CHECK(p.known_fstar.value() == Approx(-0.5));
    Vector m(2);
    m << 0.0, 1.0;
    CHECK(dc_value(p, m) == Approx(-0.5));
    const auto [gx, gf] = testsup::grid_min_2d(
        [&](const Vector& x) {
          return x.cwiseAbs().maxCoeff() <= 1.0 ? dc_value(p, x) : 1e9;
        },
        -1.0, 1.0, 1e-3);
    CHECK(std::abs(gf - *p.known_fstar) <= 1e-6);
  }
  SECTION("asymmetric Q is rejected") {
    Matrix bad(2, 2);
    bad << 1.0, 0.3, -0.3, 1.0;
    CHECK_THROWS_AS(
        make_boxed_indefinite_quadratic(bad, Vector::Zero(2),
                                        Vector::Constant(2, -1.0),
                                        Vector::Constant(2, 1.0)),
        ConfigError);
  }
  SECTION("an interior stationary point is a fixed point of the plain method") {
    const Matrix Q = Matrix::Identity(1, 1);
    const DcProblem p = make_boxed_indefinite_quadratic(
        Q, Vector::Zero(1), vec1(-1.0), vec1(1.0));
    BppaConfig cfg;
    const Trace tr = solve_ppa(p, vec1(0.0), cfg);
    CHECK(tr.termination == Termination::converged);
    CHECK(tr.records.size() == 1);
  }
}

TEST_CASE("compatibility flags gate the solvers up front") {
  const DcProblem l1l2 = make_l1_minus_l2_random(3, 0.1, 5);
  CHECK(l1l2.supports(SolverKind::inertial));
  CHECK_FALSE(l1l2.supports(SolverKind::bppa));
  CHECK_FALSE(l1l2.supports(SolverKind::ppa));
  BppaConfig cfg;
  CHECK_THROWS_AS(solve_bppa(l1l2, Vector::Ones(3), cfg), CapabilityError);
  CHECK_THROWS_AS(solve_ppa(l1l2, Vector::Ones(3), cfg), CapabilityError);

  const DcProblem quartic = make_quartic_well(2);
  CHECK(quartic.bppa_compatible());
  CHECK(quartic.ppa_compatible());
  CHECK(quartic.inertial_compatible());
  for (SolverKind k :
       {SolverKind::bppa, SolverKind::ppa, SolverKind::inertial}) {
    CHECK(quartic.supports(k));
  }

  // structural capability is necessary for every declared flag
  for (const DcProblem& p :
       {make_quartic_well(1), make_degenerate_quartic(1), l1l2}) {
    if (p.supports(SolverKind::bppa)) CHECK(p.bppa_compatible());
    if (p.supports(SolverKind::ppa)) CHECK(p.ppa_compatible());
    if (p.supports(SolverKind::inertial)) CHECK(p.inertial_compatible());
  }
}

TEST_CASE("factory rejections") {
  CHECK_THROWS_AS(make_quartic_well(0), ConfigError);
  CHECK_THROWS_AS(make_l1_minus_l2(Matrix::Zero(2, 2), Vector::Zero(2), 0.1),
                  ConfigError);
  CHECK_THROWS_AS(make_l1_minus_l2(Matrix::Identity(2, 2), Vector::Zero(2), 0.0),
                  ConfigError);
}
