#pragma once

namespace vvq {

// ln I_nu(z), the log of the modified Bessel function of the first kind,
// for nu >= 0 and z >= 0. Accurate to better than 1e-10 relative over
// nu in [0, 50] and z in [1e-8, 1e4] (and usable far beyond, up to z ~ 1e10,
// which the concentration solver needs). ln I_0(0) = 0; ln I_nu(0) = -inf
// for nu > 0.
double log_bessel_i(double nu, double z);

namespace detail {

// Power-series branch, valid for any z but efficient only below the switch.
double log_bessel_i_series(double nu, double z);

// Large-argument (Hankel) asymptotic branch; requires z >= switch line.
double log_bessel_i_asymptotic(double nu, double z);

// Branch switch: series below, asymptotic at or above. Placed where the
// asymptotic tail terms bottom out below 1e-13 relative.
double bessel_switch_z(double nu);

}  // namespace detail

// Digamma (psi) and trigamma (psi') for x > 0.
double digamma(double x);
double trigamma(double x);

// Inverse of digamma on (0, inf): returns x > 0 with digamma(x) = y.
double inv_digamma(double y);

// ln of the surface area of the unit sphere S^{d-1} embedded in R^d:
// ln(2 pi^{d/2} / Gamma(d/2)).
double log_sphere_area(int d);

}  // namespace vvq
