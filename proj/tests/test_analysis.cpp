#include "test_support.hpp"

using namespace dcprox;
using Catch::Approx;

namespace {

/// Synthetic trace with records (k, f_k) and optional gradient norms.
Trace synthetic_trace(const std::vector<double>& fs,
                      const std::vector<double>& grads = {}) {
  Trace tr;
  for (std::size_t k = 0; k < fs.size(); ++k) {
    IterateRecord rec;
    rec.k = static_cast<int>(k);
    rec.f_x = fs[k];
    if (!grads.empty()) rec.grad_residual = grads[k];
    tr.records.push_back(rec);
  }
  return tr;
}

/// Random sequence satisfying t^mu <= nu (t - t_next), i.e.
/// t_next <= t - t^mu/nu, with a uniform shrink of the allowed decrement.
/// The shrink stays below 1 - 1e-9 so generator rounding cannot push a term
/// past the real-arithmetic bound.
std::vector<double> admissible_sequence(Rng& rng, double mu, double nu,
                                        double t0, int len) {
  std::vector<double> t{t0};
  for (int k = 1; k < len; ++k) {
    const double prev = t.back();
    const double cap = prev - std::pow(prev, mu) / nu;
    const double next = cap <= 0.0 ? 0.0 : cap * rng.uniform(0.0, 1.0 - 1e-9);
    t.push_back(std::max(0.0, next));
  }
  return t;
}

}  // namespace

TEST_CASE("rate_bound_check on the geometric equality case") {
  // t_k = (1-1/nu)^k t0 with mu = 1: t_k - t_{k+1} = t_k/nu exactly
  const double nu = 2.0;
  std::vector<double> t;
  for (int k = 0; k < 30; ++k) t.push_back(std::pow(1.0 - 1.0 / nu, k));
  const auto chk = rate_bound_check(t, 1.0, nu);
  CHECK_FALSE(chk.first_violation.has_value());
  for (bool h : chk.holds) CHECK(h);
}

TEST_CASE("rate_bound_check on the finite-regime ramp") {
  const double nu = 2.0;
  std::vector<double> t;
  for (int k = 0; k < 10; ++k) t.push_back(std::max(1.0 - k / nu, 0.0));
  const auto chk = rate_bound_check(t, 0.0, nu);
  // holds while t is still decreasing by 1/nu, fails once it sits at 0
  CHECK(chk.holds[0]);
  CHECK(chk.holds[1]);
  CHECK(chk.first_violation.has_value());
  CHECK(*chk.first_violation >= 2);
}

TEST_CASE("rate_bound_check rejects too-slow sequences") {
  // t_k = nu/k with mu = 2: nu^2/k^2 > nu^2/(k(k+1)) for all k >= 1
  const double nu = 3.0;
  std::vector<double> t;
  t.push_back(nu);  // k = 0 placeholder so indices line up with k >= 1
  for (int k = 1; k < 20; ++k) t.push_back(nu / k);
  const auto chk = rate_bound_check(t, 2.0, nu);
  for (std::size_t k = 1; k < chk.holds.size(); ++k) CHECK_FALSE(chk.holds[k]);
}

TEST_CASE("rate_predict closed forms") {
  CHECK(rate_predict(1.0, 2.0, 1.0, 10) == Approx(9.765625e-4).margin(1e-18));
  CHECK(rate_predict(0.0, 2.0, 1.0, 2) == 0.0);
  CHECK(rate_predict(0.0, 2.0, 1.0, 1) == Approx(0.5));
  for (int k : {0, 1, 5, 50}) {
    CHECK(rate_predict(2.0, 1.0, 1.0, k) == Approx(1.0 / (1.0 + k)).margin(1e-15));
  }
  CHECK_THROWS_AS(rate_predict(1.0, 1.0, 1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(rate_predict(0.5, 0.9, 1.0, 3), std::invalid_argument);
}

TEST_CASE("rate_predict dominates admissible sequences") {
  Rng rng(606);
  for (double mu : {0.0, 1.0, 2.0}) {
    for (int rep = 0; rep < 30; ++rep) {
      const double nu = rng.uniform(1.5, 6.0);
      const double t0 = rng.uniform(0.05, 0.9);
      const auto t = admissible_sequence(rng, mu, nu, t0, 60);
      REQUIRE(rate_bound_check(t, mu, nu).first_violation.value_or(99) >=
              0);  // generator sanity; zeros may violate later for mu = 0
      for (std::size_t k = 0; k < t.size(); ++k) {
        CHECK(rate_predict(mu, nu, t0, static_cast<int>(k)) >= t[k]);
      }
    }
  }
}

TEST_CASE("the geometric equality case reproduces the bound with zero slack") {
  const double nu = 2.0, t0 = 1.0;
  for (int k = 0; k < 40; ++k) {
    const double tk = t0 * std::pow(1.0 - 1.0 / nu, k);
    CHECK(rate_predict(1.0, nu, t0, k) == tk);
  }
}

TEST_CASE("classify_rate recognizes geometric decay") {
  std::vector<double> fs;
  for (int k = 0; k < 60; ++k) fs.push_back(std::pow(0.9, k));
  const auto report = classify_rate(synthetic_trace(fs), 0.0);
  REQUIRE(report.classification == RateClass::linear);
  CHECK(*report.linear_rate == Approx(0.9).margin(0.01));
  CHECK(report.fit_constants.at("nu") == Approx(10.0).epsilon(0.05));
}

TEST_CASE("classify_rate recognizes power decay") {
  std::vector<double> fs;
  fs.push_back(2.0);  // k = 0 head, outside the tail window
  for (int k = 1; k < 200; ++k) fs.push_back(std::pow(k, -2.0));
  const auto report = classify_rate(synthetic_trace(fs), 0.0);
  REQUIRE(report.classification == RateClass::sublinear);
  CHECK(*report.sublinear_exponent == Approx(-2.0).margin(0.1));
}

TEST_CASE("classify_rate flags finite hits and short traces") {
  std::vector<double> fs = {1.0, 0.5, 0.0, 0.0};
  const auto report = classify_rate(synthetic_trace(fs), 0.0);
  CHECK(report.classification == RateClass::finite);
  CHECK(*report.finite_step == 2);

  std::vector<double> shorty;
  for (int k = 0; k < 10; ++k) shorty.push_back(std::pow(0.5, k));
  CHECK_THROWS_AS(classify_rate(synthetic_trace(shorty), 0.0), FitError);

  CHECK_THROWS_AS(classify_rate(synthetic_trace({0.5, 0.4, 0.3}), 0.45),
                  std::invalid_argument);
}

TEST_CASE("estimate_kl_exponent recovers analytic exponents") {
  // f(x) = x^2: |grad| = 2|x| = 2 (f)^{1/2}
  std::vector<double> fs, gs;
  for (int k = 0; k < 60; ++k) {
    const double x = std::pow(0.9, k);
    fs.push_back(x * x);
    gs.push_back(2.0 * x);
  }
  const auto est2 = estimate_kl_exponent(synthetic_trace(fs, gs), 0.0);
  CHECK(est2.kappa_hat == Approx(0.5).margin(0.05));
  CHECK(est2.M_hat == Approx(0.5).margin(0.01));

  // f(x) = x^4: |grad| = 4|x|^3 = 4 (f)^{3/4}
  fs.clear();
  gs.clear();
  for (int k = 0; k < 60; ++k) {
    const double x = std::pow(0.9, k);
    fs.push_back(std::pow(x, 4));
    gs.push_back(4.0 * std::pow(x, 3));
  }
  const auto est4 = estimate_kl_exponent(synthetic_trace(fs, gs), 0.0);
  CHECK(est4.kappa_hat == Approx(0.75).margin(0.05));
  CHECK(est4.M_hat == Approx(0.25).margin(0.01));

  // f(x) = x^6: |grad| = 6|x|^5 = 6 (f)^{5/6}
  fs.clear();
  gs.clear();
  for (int k = 0; k < 60; ++k) {
    const double x = std::pow(0.9, k);
    fs.push_back(std::pow(x, 6));
    gs.push_back(6.0 * std::pow(x, 5));
  }
  const auto est6 = estimate_kl_exponent(synthetic_trace(fs, gs), 0.0);
  CHECK(est6.kappa_hat == Approx(5.0 / 6.0).margin(0.05));

  // constant gradient: slope 0
  fs.clear();
  gs.clear();
  for (int k = 0; k < 60; ++k) {
    fs.push_back(std::pow(0.9, k));
    gs.push_back(3.0);
  }
  const auto est0 = estimate_kl_exponent(synthetic_trace(fs, gs), 0.0);
  CHECK(est0.kappa_hat == Approx(0.0).margin(1e-10));
}

TEST_CASE("estimate_kl_exponent error paths") {
  CHECK_THROWS_AS(estimate_kl_exponent(synthetic_trace({1.0, 0.5}), 0.0),
                  CapabilityError);
  // every tail point sits at fstar: degenerate window
  std::vector<double> fs(50, 1.0), gs(50, 1.0);
  CHECK_THROWS_AS(estimate_kl_exponent(synthetic_trace(fs, gs), 1.0), FitError);
}

TEST_CASE("lojasiewicz_check on f = x^2") {
  DcProblem p;
  p.label = "square";
  p.dim = 1;
  p.phi.value = [](const Vector&) { return 0.0; };
  p.phi.gradient = [](const Vector& x) { return Vector::Zero(x.size()).eval(); };
  p.phi.lipschitz_grad = 0.0;
  ConvexOracle sq;
  sq.value = [](const Vector& x) { return x.squaredNorm(); };
  SmoothOracle sm;
  sm.value = sq.value;
  sm.gradient = [](const Vector& x) { return (2.0 * x).eval(); };
  sm.lipschitz_grad = 2.0;
  sq.smooth = sm;
  p.g = sq;
  ConvexOracle zero;
  zero.value = [](const Vector&) { return 0.0; };
  SmoothOracle zsm;
  zsm.value = zero.value;
  zsm.gradient = [](const Vector& x) { return Vector::Zero(x.size()).eval(); };
  zero.smooth = zsm;
  p.h = zero;

  const Vector origin = Vector::Zero(1);
  // |x^2|^{1/2} = |x| <= 1 * |2x|
  const auto ok = lojasiewicz_check(p, origin, 0.5, 1.0, 1.0, 500, 99);
  CHECK(ok.holds);
  CHECK(ok.worst_ratio <= 0.5 + 1e-12);

  // M = 0.4: the ratio is the constant 1/0.8 = 1.25
  const auto bad = lojasiewicz_check(p, origin, 0.5, 0.4, 1.0, 500, 99);
  CHECK_FALSE(bad.holds);
  CHECK(bad.worst_ratio == Approx(1.25).margin(1e-9));
  CHECK(bad.witness.has_value());

  // kappa = 0 requires M |grad f| >= 1 wherever f != fstar: fails near 0
  const auto zerok = lojasiewicz_check(p, origin, 0.0, 1.0, 1.0, 500, 99);
  CHECK_FALSE(zerok.holds);
}
