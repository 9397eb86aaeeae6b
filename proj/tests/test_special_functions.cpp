#include "vvq/special_functions.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "vvq/errors.hpp"

namespace {

// Closed forms for half-integer orders, written to stay stable for large z:
// I_{1/2}(z)  = sqrt(2/(pi z)) * sinh z
// I_{3/2}(z)  = sqrt(2/(pi z)) * (cosh z - sinh z / z)
// I_{5/2}(z)  = sqrt(2/(pi z)) * ((1 + 3/z^2) sinh z - (3/z) cosh z)
double log_i_half(double z) {
  const double prefix = 0.5 * std::log(2.0 / (M_PI * z));
  if (z < 20.0) return prefix + std::log(std::sinh(z));
  return prefix + z - std::log(2.0) + std::log1p(-std::exp(-2.0 * z));
}

double log_i_3half(double z) {
  const double prefix = 0.5 * std::log(2.0 / (M_PI * z));
  if (z < 20.0) return prefix + std::log(std::cosh(z) - std::sinh(z) / z);
  const double e = std::exp(-2.0 * z);
  return prefix + z - std::log(2.0) +
         std::log(1.0 - 1.0 / z + e * (1.0 + 1.0 / z));
}

double log_i_5half(double z) {
  const double prefix = 0.5 * std::log(2.0 / (M_PI * z));
  if (z < 20.0) {
    return prefix + std::log((1.0 + 3.0 / (z * z)) * std::sinh(z) -
                             (3.0 / z) * std::cosh(z));
  }
  const double e = std::exp(-2.0 * z);
  const double a = 1.0 + 3.0 / (z * z);
  return prefix + z - std::log(2.0) +
         std::log(a - 3.0 / z - e * (a + 3.0 / z));
}

// Independent oracle for the ratio I_nu(z)/I_{nu-1}(z) via the backward
// continued fraction from the three-term recurrence
// I_{nu-1} = (2 nu / z) I_nu + I_{nu+1}.
double bessel_ratio_cf(double nu, double z) {
  // Backward recurrence converges once 2(nu+k)/z dominates, so the depth
  // must grow with z.
  const int depth = static_cast<int>(3.0 * z) + 100;
  const double top = nu + depth;
  double r = z / (top + std::sqrt(top * top + z * z));  // seed approximation
  for (int k = depth - 1; k >= 0; --k) {
    r = 1.0 / (2.0 * (nu + k) / z + r);
  }
  return r;
}

double rel_err(double got, double want) {
  return std::fabs(got - want) / std::fmax(std::fabs(want), 1e-12);
}

}  // namespace

TEST_CASE("log_bessel_i: half-integer closed forms to 1e-10") {
  const std::vector<double> zs = {0.1,  0.5,  1.0,  2.0,   5.0,   10.0, 25.0,
                                  30.0, 40.0, 50.0, 100.0, 1000.0, 1e4};
  for (double z : zs) {
    CHECK(rel_err(vvq::log_bessel_i(0.5, z), log_i_half(z)) < 1e-10);
    CHECK(rel_err(vvq::log_bessel_i(1.5, z), log_i_3half(z)) < 1e-10);
    CHECK(rel_err(vvq::log_bessel_i(2.5, z), log_i_5half(z)) < 1e-10);
  }
  // Half-integer-order closed form: ln I_{1/2}(1) = ln(sinh 1) + 0.5 ln(2/pi).
  CHECK(vvq::log_bessel_i(0.5, 1.0) ==
        doctest::Approx(-0.0644).epsilon(1e-3));
  CHECK(std::fabs(vvq::log_bessel_i(0.5, 1.0) - log_i_half(1.0)) < 1e-13);
}

TEST_CASE("log_bessel_i: ratio cross-check against continued fraction") {
  for (double nu : {1.0, 3.0, 8.5, 20.0}) {
    for (double z : {0.5, 5.0, 50.0, 500.0, 5000.0}) {
      const double ratio =
          std::exp(vvq::log_bessel_i(nu, z) - vvq::log_bessel_i(nu - 1.0, z));
      CHECK(rel_err(ratio, bessel_ratio_cf(nu, z)) < 1e-12);
    }
  }
}

TEST_CASE("log_bessel_i: z = 0 limits and domain errors") {
  CHECK(vvq::log_bessel_i(0.0, 0.0) == 0.0);
  CHECK(vvq::log_bessel_i(1.0, 0.0) ==
        -std::numeric_limits<double>::infinity());
  CHECK(vvq::log_bessel_i(7.5, 0.0) ==
        -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(vvq::log_bessel_i(-0.5, 1.0), vvq::DataError);
  CHECK_THROWS_AS(vvq::log_bessel_i(0.5, -1.0), vvq::DataError);
}

TEST_CASE("log_bessel_i: tiny argument matches leading series term") {
  // I_0(z) - 1 ~ z^2/4; at z = 1e-8 the log is ~2.5e-17, far below double
  // resolution relative to 1, so check the absolute value instead.
  const double z = 1e-8;
  CHECK(std::fabs(vvq::log_bessel_i(0.0, z) - 0.25 * z * z) < 1e-30);
  // nu = 2: ln I_2(z) ~ 2 ln(z/2) - ln 2.
  const double expect = 2.0 * std::log(0.5 * z) - std::log(2.0);
  CHECK(rel_err(vvq::log_bessel_i(2.0, z), expect) < 1e-12);
}

TEST_CASE("log_bessel_i: branch continuity at the switch line") {
  for (double nu : {0.0, 0.5, 1.0, 2.5, 4.0, 7.5, 8.0, 8.5, 16.0, 25.0}) {
    const double zs = vvq::detail::bessel_switch_z(nu);
    const double a = vvq::detail::log_bessel_i_series(nu, zs);
    const double b = vvq::detail::log_bessel_i_asymptotic(nu, zs);
    CHECK(rel_err(a, b) < 1e-11);
  }
}

TEST_CASE("log_bessel_i: large-z leading asymptotics") {
  // ln I_nu(z) = z - 0.5 ln(2 pi z) - (4nu^2-1)/(8z) + O(z^-2).
  for (double nu : {0.0, 0.5, 1.0, 5.0, 8.5}) {
    const double z = 1e4;
    const double lead = z - 0.5 * std::log(2.0 * M_PI * z);
    const double correction = (4.0 * nu * nu - 1.0) / (8.0 * z);
    const double diff = vvq::log_bessel_i(nu, z) - lead;
    CHECK(std::fabs(diff + correction) < 1e-6);  // next order ~ nu^4/z^2
  }
  // Extreme argument stays finite and ordered (concentration solver domain).
  const double big = vvq::log_bessel_i(8.5, 1e10);
  CHECK(std::isfinite(big));
  CHECK(big > vvq::log_bessel_i(8.5, 1e9));
}

TEST_CASE("log_bessel_i: monotone increasing in z") {
  for (double nu : {0.0, 2.0, 8.5}) {
    double prev = vvq::log_bessel_i(nu, 0.01);
    for (double z : {0.1, 1.0, 10.0, 100.0, 1000.0, 1e4}) {
      const double cur = vvq::log_bessel_i(nu, z);
      CHECK(cur > prev);
      prev = cur;
    }
  }
}

TEST_CASE("digamma: reference values and recurrence") {
  const double euler = 0.5772156649015328606;
  CHECK(std::fabs(vvq::digamma(1.0) + euler) < 1e-13);
  CHECK(std::fabs(vvq::digamma(0.5) + euler + 2.0 * std::log(2.0)) < 1e-13);
  for (double x : {0.1, 0.5, 1.5, 3.7, 12.3, 100.0}) {
    CHECK(std::fabs(vvq::digamma(x + 1.0) - vvq::digamma(x) - 1.0 / x) <
          1e-12);
  }
  CHECK_THROWS_AS(vvq::digamma(0.0), vvq::DataError);
  CHECK_THROWS_AS(vvq::digamma(-3.0), vvq::DataError);
}

TEST_CASE("trigamma: reference values and recurrence") {
  CHECK(std::fabs(vvq::trigamma(1.0) - M_PI * M_PI / 6.0) < 1e-12);
  CHECK(std::fabs(vvq::trigamma(0.5) - M_PI * M_PI / 2.0) < 1e-11);
  for (double x : {0.2, 0.9, 2.5, 7.1, 40.0}) {
    CHECK(std::fabs(vvq::trigamma(x + 1.0) - vvq::trigamma(x) +
                    1.0 / (x * x)) < 1e-11);
  }
  CHECK_THROWS_AS(vvq::trigamma(-1.0), vvq::DataError);
}

TEST_CASE("inv_digamma: round trips") {
  for (double x : {0.01, 0.1, 0.7, 1.0, 3.0, 25.0, 400.0}) {
    const double y = vvq::digamma(x);
    CHECK(rel_err(vvq::inv_digamma(y), x) < 1e-10);
  }
  for (double y : {-10.0, -2.0, -0.5, 0.0, 1.5, 6.0}) {
    CHECK(std::fabs(vvq::digamma(vvq::inv_digamma(y)) - y) < 1e-10);
  }
}

TEST_CASE("log_sphere_area: known areas") {
  // S^1 (circle): 2 pi. S^2: 4 pi. S^0: two points.
  CHECK(std::fabs(vvq::log_sphere_area(2) - std::log(2.0 * M_PI)) < 1e-13);
  CHECK(std::fabs(vvq::log_sphere_area(3) - std::log(4.0 * M_PI)) < 1e-13);
  CHECK(std::fabs(vvq::log_sphere_area(1) - std::log(2.0)) < 1e-13);
  // d=4: 2 pi^2.
  CHECK(std::fabs(vvq::log_sphere_area(4) - std::log(2.0 * M_PI * M_PI)) <
        1e-13);
  CHECK_THROWS_AS(vvq::log_sphere_area(0), vvq::DataError);
}
