#include "vvq/special_functions.hpp"

#include <cmath>
#include <limits>

#include "vvq/errors.hpp"

namespace vvq {

namespace detail {

double bessel_switch_z(double nu) {
  // The Hankel expansion's terms scale like (nu^2/z)^k / k!; requiring
  // z >= 1.5 nu^2 (and at least 30 so the e^{-2z} reflection term is
  // negligible) keeps its truncation error near machine precision, while the
  // power series stays affordable below that line.
  return std::fmax(30.0, 1.5 * nu * nu);
}

double log_bessel_i_series(double nu, double z) {
  if (z == 0.0) {
    return nu == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  // I_nu(z) = (z/2)^nu / Gamma(nu+1) * sum_m u_m,  u_0 = 1,
  // u_{m+1} = u_m * (z^2/4) / ((m+1)(m+1+nu)).  All terms positive.
  const double q = 0.25 * z * z;
  double tail = 0.0;     // sum of u_m for m >= 1, relative to a base of 1
  double term = 1.0;
  double log_offset = 0.0;  // accumulated log of rescales
  bool converged = false;
  for (int m = 1; m <= 100000; ++m) {
    term *= q / (static_cast<double>(m) * (static_cast<double>(m) + nu));
    tail += term;
    if (term < (1.0 + tail) * 1e-18) {
      converged = true;
      break;
    }
    if (tail > 1e250) {
      // Rebase so the running sum stays representable; the base value 1+tail
      // moves into log_offset and subsequent terms are pre-divided.
      const double s = 1.0 + tail;
      log_offset += std::log(s);
      term /= s;
      tail = 0.0;
    }
  }
  if (!converged) {
    throw NumericError("log_bessel_i: series did not converge");
  }
  return nu * std::log(0.5 * z) - std::lgamma(nu + 1.0) + log_offset +
         std::log1p(tail);
}

double log_bessel_i_asymptotic(double nu, double z) {
  // I_nu(z) ~ e^z / sqrt(2 pi z) * sum_k (-1)^k a_k(nu) / z^k with
  // a_k = prod_{j=1..k} (4nu^2 - (2j-1)^2) / (k! 8^k). For half-integer nu
  // the series terminates exactly; otherwise it is truncated at the smallest
  // term (classic asymptotic-series rule).
  const double mu = 4.0 * nu * nu;
  double sum = 1.0;
  double term = 1.0;
  double prev_mag = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 400; ++k) {
    const double odd = 2.0 * static_cast<double>(k) - 1.0;
    term *= -(mu - odd * odd) / (static_cast<double>(k) * 8.0 * z);
    const double mag = std::fabs(term);
    if (mag >= prev_mag) break;  // smallest term reached; stop before it grows
    sum += term;
    if (mag < std::fabs(sum) * 1e-18 || term == 0.0) break;
    prev_mag = mag;
  }
  return z - 0.5 * std::log(2.0 * M_PI * z) + std::log(sum);
}

}  // namespace detail

double log_bessel_i(double nu, double z) {
  if (nu < 0.0 || z < 0.0 || std::isnan(nu) || std::isnan(z)) {
    throw DataError("log_bessel_i: requires nu >= 0 and z >= 0");
  }
  if (z < detail::bessel_switch_z(nu)) {
    return detail::log_bessel_i_series(nu, z);
  }
  return detail::log_bessel_i_asymptotic(nu, z);
}

double digamma(double x) {
  if (!(x > 0.0)) throw DataError("digamma: requires x > 0");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  // Asymptotic expansion with Bernoulli coefficients B_{2n}/(2n).
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = inv2 *
      (1.0 / 12.0 -
       inv2 * (1.0 / 120.0 -
               inv2 * (1.0 / 252.0 -
                       inv2 * (1.0 / 240.0 -
                               inv2 * (1.0 / 132.0 -
                                       inv2 * 691.0 / 32760.0)))));
  return result + std::log(x) - 0.5 * inv - series;
}

double trigamma(double x) {
  if (!(x > 0.0)) throw DataError("trigamma: requires x > 0");
  double result = 0.0;
  while (x < 10.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = inv *
      (1.0 +
       inv * (0.5 +
              inv * (1.0 / 6.0 -
                     inv2 * (1.0 / 30.0 -
                             inv2 * (1.0 / 42.0 - inv2 / 30.0)))));
  return result + series;
}

double inv_digamma(double y) {
  // Initial guess per the standard piecewise form, then Newton.
  double x = y >= -2.22 ? std::exp(y) + 0.5 : -1.0 / (y + 0.5772156649015329);
  for (int it = 0; it < 16; ++it) {
    const double f = digamma(x) - y;
    const double step = f / trigamma(x);
    double next = x - step;
    if (next <= 0.0) next = x * 0.5;  // stay in the domain
    if (std::fabs(next - x) <= 1e-14 * std::fabs(next) + 1e-300) {
      return next;
    }
    x = next;
  }
  return x;
}

double log_sphere_area(int d) {
  if (d < 1) throw DataError("log_sphere_area: requires d >= 1");
  const double half_d = 0.5 * static_cast<double>(d);
  return std::log(2.0) + half_d * std::log(M_PI) - std::lgamma(half_d);
}

}  // namespace vvq
