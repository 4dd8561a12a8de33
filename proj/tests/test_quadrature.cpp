#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "critkill/quadrature.hpp"

using namespace critkill;

TEST_CASE("smooth integrands to machine accuracy") {
  QuadResult r = integrate([](double x) { return x * x; }, 0.0, 1.0);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  r = integrate([](double x) { return std::sin(x); }, 0.0, M_PI);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-14));

  r = integrate([](double x) { return std::exp(x); }, 0.0, 1.0);
  CHECK(r.value == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
  CHECK(r.err_estimate < 1e-10);
}

TEST_CASE("agreement with the raw panel rule on one smooth panel") {
  // cross-check the adaptive driver against a direct high-order evaluation
  auto f = [](double x) { return std::cos(3.0 * x) * std::exp(-x); };
  double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, 0.0, 2.0, 10, 1e-14);
  QuadResult r = integrate(f, 0.0, 2.0);
  CHECK(r.value == doctest::Approx(ref).epsilon(1e-13));
}

TEST_CASE("oscillatory integrand needs subdivisions and converges") {
  auto f = [](double x) { return std::sin(40.0 * x); };
  QuadResult r = integrate(f, 0.0, 1.0);
  CHECK(r.converged);
  CHECK(r.value ==
        doctest::Approx((1.0 - std::cos(40.0)) / 40.0).epsilon(1e-12));
  CHECK(r.subdivisions > 1);
}

TEST_CASE("subdivision budget reports failure instead of lying") {
  // a sharp spike with a one-panel budget cannot converge
  auto f = [](double x) { return 1.0 / (1e-6 + (x - 0.5) * (x - 0.5)); };
  QuadratureConfig tight;
  tight.max_subdivisions = 1;
  QuadResult r = integrate(f, 0.0, 1.0, tight);
  CHECK(!r.converged);
  CHECK(r.err_estimate > 0.0);
}

TEST_CASE("breakpoints handle interior kinks") {
  auto f = [](double x) { return std::abs(x - 0.5); };
  QuadResult r = integrate_points(f, 0.0, 1.0, {0.5});
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(0.25).epsilon(1e-14));

  // breakpoints outside the interval are ignored
  r = integrate_points([](double x) { return x; }, 0.0, 1.0,
                       {-3.0, 0.25, 7.0});
  CHECK(r.value == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("taming order for algebraic endpoint behavior") {
  CHECK(taming_order(0.0) == 3);
  CHECK(taming_order(-0.5) == 6);
  CHECK(taming_order(2.0) == 1);
  // exact value is ceil(3/0.1) = 30; the division lands a ulp above
  int m = taming_order(-0.9);
  CHECK(m >= 30);
  CHECK(m <= 31);
  CHECK_THROWS_AS(taming_order(-1.0), InputError);
  CHECK_THROWS_AS(taming_order(-1.5), InputError);
  CHECK_THROWS_AS(taming_order(-1.0 + 1e-7), NumericError);
}

TEST_CASE("power-tamed endpoint singularities") {
  QuadResult r =
      integrate_power_tamed([](double x) { return std::pow(x, -0.5); }, 0.0,
                            1.0, -0.5);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-12));

  r = integrate_power_tamed([](double x) { return std::pow(x, -0.9); }, 0.0,
                            1.0, -0.9);
  CHECK(r.value == doctest::Approx(10.0).epsilon(1e-10));

  // shifted left endpoint
  r = integrate_power_tamed(
      [](double x) { return std::pow(x - 2.0, -0.5) * std::cos(x - 2.0); },
      2.0, 3.0, -0.5);
  // reference: int_0^1 u^{-1/2} cos u du evaluated independently; for a
  // shifted singular endpoint, offsets below eps(a) are absorbed when the
  // caller's integrand reconstructs t - a, which caps the attainable
  // accuracy near eps(a)^{1+sigma} ~ 1.5e-8 here
  double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [](double u) { return 2.0 * std::cos(u * u); }, 0.0, 1.0, 10, 1e-14);
  CHECK(r.value == doctest::Approx(ref).epsilon(5e-8));

  // integrable log-free smooth case degenerates to plain integration
  r = integrate_power_tamed([](double x) { return x * x; }, 0.0, 1.0, 2.0);
  CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("tail integrals with known algebraic decay") {
  QuadResult r =
      integrate_tail([](double w) { return std::pow(w, -2.0); }, 1.0, 2.0);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));

  r = integrate_tail([](double w) { return std::pow(w, -1.5); }, 1.0, 1.5);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-12));

  r = integrate_tail([](double w) { return std::pow(w, -3.0); }, 2.0, 3.0);
  CHECK(r.value == doctest::Approx(0.125).epsilon(1e-12));

  // integrand decaying faster than declared still converges
  r = integrate_tail([](double w) { return std::exp(-w); }, 1.0, 2.0);
  CHECK(r.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));

  // corrections on top of the leading power
  r = integrate_tail(
      [](double w) { return std::pow(w, -2.0) * (1.0 + 1.0 / w); }, 1.0, 2.0);
  CHECK(r.value == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("results are bitwise deterministic") {
  auto f = [](double x) { return std::sin(17.0 * x) / (0.1 + x); };
  QuadResult a = integrate(f, 0.0, 3.0);
  QuadResult b = integrate(f, 0.0, 3.0);
  CHECK(a.value == b.value);
  CHECK(a.err_estimate == b.err_estimate);
  CHECK(a.subdivisions == b.subdivisions);
}
