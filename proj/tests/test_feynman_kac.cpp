#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "critkill/constants.hpp"
#include "critkill/core_model.hpp"
#include "critkill/feynman_kac.hpp"

using namespace critkill;

TEST_CASE("free walk on the whole space survives with certainty") {
  StableParams params{2, 1.5};
  McConfig mc;
  mc.n_paths = 500;
  EstimatorResult r = estimate_survival(params, {0.0, 0.0}, 1.0,
                                        Domain::whole_space(),
                                        KillingPotential::zero(), mc, 5);
  CHECK(r.value == 1.0);
  CHECK(r.half_width_95 == 0.0);
  CHECK(r.n_paths == 500);
  CHECK(r.diagnostics.at("ess") == doctest::Approx(500.0));
  CHECK(r.diagnostics.at("alive_rate") == 1.0);
}

TEST_CASE("constant potential reproduces the exponential exactly") {
  // far from the boundary the critical-perturbation slot with eta = 0 is a
  // flat rate c, so every path carries weight exp(-c t) with zero variance
  StableParams params{1, 1.5};
  KillingPotential pot;
  pot.geometry = KillingPotential::Geometry::BoundaryDistance;
  pot.alpha = params.alpha;
  pot.C2 = 0.35;
  pot.eta = 0.0;
  McConfig mc;
  mc.n_paths = 2000;
  EstimatorResult r = estimate_survival(params, {1e6}, 1.0,
                                        Domain::half_space(), pot, mc, 6);
  CHECK(r.value == doctest::Approx(std::exp(-0.35)).epsilon(1e-12));
  CHECK(r.half_width_95 < 1e-8);
}

TEST_CASE("confidence intervals are calibrated on a Bernoulli target") {
  StableParams params{2, 1.5};
  Domain ball = Domain::ball({0.0, 0.0}, 1.0);
  Vec x{0.8, 0.0};
  McConfig mc;
  mc.n_paths = 2000;
  double pool = 0.0;
  std::vector<EstimatorResult> runs;
  for (int i = 0; i < 100; ++i) {
    runs.push_back(estimate_survival(params, x, 0.1, ball,
                                     KillingPotential::zero(), mc, 99,
                                     std::uint32_t(i)));
    pool += runs.back().value;
  }
  pool /= 100.0;
  int covered = 0;
  for (const auto& r : runs)
    if (std::abs(r.value - pool) <= r.half_width_95) ++covered;
  // nominal 95 of 100; the pooled mean adds ~0.1 sigma of slack
  CHECK(covered >= 93);
  CHECK(pool > 0.3);
  CHECK(pool < 0.995);
}

TEST_CASE("survival responds monotonically to the killing amplitude") {
  // same seed couples the trajectories, so e^{-2A} <= e^{-A} pathwise
  StableParams params{2, 1.2};
  Domain dom = Domain::punctured();
  McConfig mc;
  mc.n_paths = 3000;
  Vec x{0.3, 0.0};
  double v1 = estimate_survival(params, x, 1.0, dom,
                                KillingPotential::critical_origin(1.2, 0.5),
                                mc, 7)
                  .value;
  double v2 = estimate_survival(params, x, 1.0, dom,
                                KillingPotential::critical_origin(1.2, 1.0),
                                mc, 7)
                  .value;
  CHECK(v1 > v2);
  CHECK(v2 > 0.0);
}

TEST_CASE("survival decays in time but comparably so") {
  StableParams params{2, 1.2};
  Domain dom = Domain::punctured();
  KillingPotential pot = KillingPotential::critical_origin(1.2, 0.8);
  McConfig mc;
  mc.n_paths = 20000;
  Vec x{0.5, 0.0};
  EstimatorResult s1 = estimate_survival(params, x, 0.5, dom, pot, mc, 8);
  EstimatorResult s2 = estimate_survival(params, x, 1.0, dom, pot, mc, 9);
  double slack = 3.0 * (s1.half_width_95 + s2.half_width_95);
  CHECK(s2.value <= s1.value + slack);
  // doubling the horizon cannot collapse the survival by more than a
  // bounded factor
  CHECK(s2.value >= 0.05 * s1.value - slack);
}

TEST_CASE("kernel estimates match the closed-form free density") {
  // d = 1, alpha = 1, no killing: the transition density is Cauchy with
  // scale t
  StableParams params{1, 1.0};
  Domain whole = Domain::whole_space();
  KillingPotential zero = KillingPotential::zero();
  McConfig mc;
  mc.n_paths = 400000;
  double t = 1.0;
  ScalingFunction phi = ScalingFunction::power_law(1.0);
  VolumeModel vol = VolumeModel::lebesgue(1);
  for (double y : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    CAPTURE(y);
    EstimatorResult k =
        estimate_kernel(params, {0.0}, {y}, t, whole, zero, mc, 21);
    double ref = t / (M_PI * (t * t + y * y));
    CHECK(k.value == doctest::Approx(ref).epsilon(0.05));
    CHECK(k.diagnostics.at("in_window") >= 100.0);

    // domination by the comparison kernel, with the known constant band
    double q = tilde_q(params, phi, vol, t, {0.0}, {y});
    CHECK(k.value / q > 0.25);
    CHECK(k.value / q < 0.8);
  }
}

TEST_CASE("kernel estimate is symmetric within noise") {
  StableParams params{2, 1.5};
  Domain ball = Domain::ball({0.0, 0.0}, 1.0);
  KillingPotential zero = KillingPotential::zero();
  McConfig mc;
  mc.n_paths = 50000;
  EstimatorResult a = estimate_kernel(params, {0.3, 0.0}, {0.45, 0.0}, 0.1,
                                      ball, zero, mc, 22);
  EstimatorResult b = estimate_kernel(params, {0.45, 0.0}, {0.3, 0.0}, 0.1,
                                      ball, zero, mc, 23);
  CHECK(a.value / b.value > 0.8);
  CHECK(a.value / b.value < 1.25);
}

TEST_CASE("decay ray geometry") {
  StableParams params{2, 1.2};
  Domain dom = Domain::punctured();
  KillingPotential pot = KillingPotential::critical_origin(1.2, 0.5);
  std::vector<Vec> ray = make_decay_ray(params, dom, pot, 1.0, 8);
  REQUIRE(ray.size() == 8);
  CHECK(norm2(ray.front()) == doctest::Approx(0.25));
  CHECK(norm2(ray.back()) == doctest::Approx(1.0 / 64.0));
  for (std::size_t i = 1; i < ray.size(); ++i)
    CHECK(norm2(ray[i]) < norm2(ray[i - 1]));

  Domain ball = Domain::ball({0.0, 0.0}, 1.0);
  std::vector<Vec> bray =
      make_decay_ray(params, ball, KillingPotential::zero(), 0.1, 5);
  for (const Vec& x : bray) CHECK(ball.contains(x));

  // a window wider than the domain cannot be probed
  CHECK_THROWS_AS(make_decay_ray(params, Domain::ball({0.0, 0.0}, 0.01),
                                 KillingPotential::zero(), 1.0, 5),
                  InputError);
  // whole space without an origin-anchored potential has no decay direction
  CHECK_THROWS_AS(make_decay_ray(params, Domain::whole_space(),
                                 KillingPotential::zero(), 1.0, 5),
                  InputError);
}

TEST_CASE("exponent fit recovers the ball decay coarsely") {
  StableParams params{2, 1.5};
  Domain ball = Domain::ball({0.0, 0.0}, 1.0);
  KillingPotential zero = KillingPotential::zero();
  McConfig mc;
  mc.n_paths = 20000;
  std::vector<Vec> ray = make_decay_ray(params, ball, zero, 0.1, 6);
  ExponentFit fit = fit_exponent(params, ball, zero, 0.1, ray, mc, 31);
  CHECK(fit.p_hat > 0.55);
  CHECK(fit.p_hat < 0.95);
  CHECK(fit.std_err > 0.0);
  CHECK(fit.points.size() == 6);
}

TEST_CASE("exponent fit validates its ray") {
  StableParams params{2, 1.2};
  Domain dom = Domain::punctured();
  KillingPotential pot = KillingPotential::critical_origin(1.2, 0.5);
  McConfig mc;
  mc.n_paths = 100;
  CHECK_THROWS_AS(
      fit_exponent(params, dom, pot, 1.0, {Vec{0.1, 0.0}}, mc, 1),
      InputError);
  // not decreasing
  CHECK_THROWS_AS(fit_exponent(params, dom, pot, 1.0,
                               {Vec{0.1, 0.0}, Vec{0.2, 0.0}}, mc, 1),
                  InputError);
  // outside the short-time window t^{1/alpha}/2
  CHECK_THROWS_AS(fit_exponent(params, dom, pot, 1.0,
                               {Vec{0.9, 0.0}, Vec{0.1, 0.0}}, mc, 1),
                  InputError);
}

TEST_CASE("degenerate weights raise an estimator error") {
  StableParams params{2, 1.2};
  McConfig mc;
  mc.n_paths = 200;
  CHECK_THROWS_AS(
      estimate_survival(params, {1e-3, 0.0}, 1.0, Domain::punctured(),
                        KillingPotential::critical_origin(1.2, 1e6), mc, 3),
      EstimatorError);
}

TEST_CASE("empty kernel windows raise an estimator error") {
  StableParams params{2, 1.5};
  McConfig mc;
  mc.n_paths = 2000;
  CHECK_THROWS_AS(
      estimate_kernel(params, {0.0, 0.0}, {50.0, 0.0}, 0.1,
                      Domain::whole_space(), KillingPotential::zero(), mc, 4),
      EstimatorError);
}

TEST_CASE("estimators are worker-count independent") {
  StableParams params{2, 1.2};
  Domain dom = Domain::punctured();
  KillingPotential pot = KillingPotential::critical_origin(1.2, 1.0);
  McConfig m1, m3;
  m1.n_paths = m3.n_paths = 5000;
  m1.workers = 1;
  m3.workers = 3;
  EstimatorResult a =
      estimate_survival(params, {0.5, 0.0}, 0.5, dom, pot, m1, 77);
  EstimatorResult b =
      estimate_survival(params, {0.5, 0.0}, 0.5, dom, pot, m3, 77);
  CHECK(a.value == b.value);
  CHECK(a.half_width_95 == b.half_width_95);
  CHECK(a.diagnostics.at("ess") == b.diagnostics.at("ess"));
}

TEST_CASE("factorization report shares survival factors and stays finite") {
  StableParams params{2, 1.5};
  Domain ball = Domain::ball({0.0, 0.0}, 1.0);
  KillingPotential zero = KillingPotential::zero();
  McConfig mc;
  mc.n_paths = 20000;
  Vec a{0.6, 0.0}, b{0.7, 0.0};
  std::vector<std::pair<Vec, Vec>> grid{{a, a}, {a, b}, {b, a}, {b, b}};
  FactorizationReport rep =
      factorization_report(params, ball, zero, 0.1, grid, mc, 88);
  REQUIRE(rep.cells.size() == 4);
  for (const auto& cell : rep.cells) {
    CHECK(cell.ratio > 0.0);
    CHECK(std::isfinite(cell.ratio));
    CHECK(cell.ratio_hw > 0.0);
    CHECK(cell.comparison > 0.0);
  }
  // per-point survival is estimated once and reused verbatim
  CHECK(rep.cells[0].survival_x == rep.cells[1].survival_x);
  CHECK(rep.cells[1].survival_y == rep.cells[3].survival_y);
  CHECK(rep.max_ratio >= rep.min_ratio);
  CHECK(rep.spread == doctest::Approx(rep.max_ratio / rep.min_ratio));
}
