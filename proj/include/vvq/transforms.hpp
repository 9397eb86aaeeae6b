#pragma once

#include <vector>

#include "vvq/types.hpp"

namespace vvq {

// Input validation; each throws DataError with a specific message.
void validate_lsf(const LsfVector& s);        // strictly increasing in (0, pi)
void validate_delta(const DeltaLsf& v);       // all > 0, sum < 1
void validate_sphere(const SphereVector& x);  // unit norm within 1e-12

// v_k = (s_k - s_{k-1}) / pi with s_0 = 0. The 1/pi normalization makes the
// increments sum below 1 so the square-root lift lands on the unit sphere.
DeltaLsf lsf_to_delta(const LsfVector& s);

// Inverse: s = pi * cumulative_sum(v).
LsfVector delta_to_lsf(const DeltaLsf& v);

// x_k = sqrt(v_k) for k <= K, x_{K+1} = sqrt(1 - sum v); unit norm by
// construction.
SphereVector delta_to_srdlsf(const DeltaLsf& v);

// v_k = x_k^2 (sign-agnostic). Rejects x with residual coordinate 0, which
// would put s_K on the closed boundary pi.
DeltaLsf srdlsf_to_delta(const SphereVector& x);

// Diagonal of the Jacobian dv/dx at x = sqrt(v): entries 2 sqrt(v_k).
std::vector<double> jacobian_diag(const DeltaLsf& v);

// (v_1, ..., v_K, 1 - sum v): the completed simplex point used by the
// Dirichlet baseline.
std::vector<double> complete_simplex(const DeltaLsf& v);

// High-rate white-noise distortion conversions between domains.
// Per-vector MSE in x maps to v via the Jacobian: D_v = (4/K) D_x mean_sum_v,
// where mean_sum_v = E[sum_k v_k] in (0, 1).
DistortionValue distortion_x_to_v(const DistortionValue& dx,
                                  double mean_sum_v, int K);

// White noise in v through the pi-scaled cumulative sum:
// D_s = D_v pi^2 (K+1)/2.
DistortionValue distortion_v_to_s(const DistortionValue& dv, int K);

// Scale factors behind the conversions above, for curve assembly.
double x_to_v_factor(double mean_sum_v, int K);  // 4 mean_sum_v / K
double v_to_s_factor(int K);                     // pi^2 (K+1) / 2

}  // namespace vvq
