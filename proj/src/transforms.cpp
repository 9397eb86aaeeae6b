#include "vvq/transforms.hpp"

#include <cmath>
#include <string>

#include "vvq/errors.hpp"

namespace vvq {

void validate_lsf(const LsfVector& s) {
  if (s.values.empty()) throw DataError("lsf: empty vector");
  double prev = 0.0;
  for (double val : s.values) {
    if (!(val > prev)) {
      throw DataError("lsf: values must be strictly increasing and positive");
    }
    prev = val;
  }
  if (!(prev < M_PI)) throw DataError("lsf: values must stay below pi");
}

void validate_delta(const DeltaLsf& v) {
  if (v.values.empty()) throw DataError("delta-lsf: empty vector");
  double sum = 0.0;
  for (double val : v.values) {
    if (!(val > 0.0)) throw DataError("delta-lsf: entries must be positive");
    sum += val;
  }
  if (!(sum < 1.0)) throw DataError("delta-lsf: entries must sum below 1");
}

void validate_sphere(const SphereVector& x) {
  if (x.values.size() < 2) throw DataError("sphere vector: needs >= 2 coords");
  double norm2 = 0.0;
  for (double val : x.values) norm2 += val * val;
  if (std::fabs(norm2 - 1.0) > 1e-12) {
    throw DataError("sphere vector: squared norm deviates from 1");
  }
}

DeltaLsf lsf_to_delta(const LsfVector& s) {
  validate_lsf(s);
  DeltaLsf v;
  v.values.resize(s.values.size());
  double prev = 0.0;
  for (std::size_t k = 0; k < s.values.size(); ++k) {
    v.values[k] = (s.values[k] - prev) / M_PI;
    prev = s.values[k];
  }
  return v;
}

LsfVector delta_to_lsf(const DeltaLsf& v) {
  validate_delta(v);
  LsfVector s;
  s.values.resize(v.values.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < v.values.size(); ++k) {
    acc += v.values[k];
    s.values[k] = M_PI * acc;
  }
  return s;
}

SphereVector delta_to_srdlsf(const DeltaLsf& v) {
  validate_delta(v);
  SphereVector x;
  x.values.resize(v.values.size() + 1);
  double sum = 0.0;
  for (std::size_t k = 0; k < v.values.size(); ++k) {
    x.values[k] = std::sqrt(v.values[k]);
    sum += v.values[k];
  }
  x.values.back() = std::sqrt(1.0 - sum);
  return x;
}

DeltaLsf srdlsf_to_delta(const SphereVector& x) {
  validate_sphere(x);
  if (x.values.back() == 0.0) {
    throw DataError(
        "srdlsf_to_delta: residual coordinate is zero (s_K would reach pi)");
  }
  DeltaLsf v;
  v.values.resize(x.values.size() - 1);
  for (std::size_t k = 0; k + 1 < x.values.size(); ++k) {
    v.values[k] = x.values[k] * x.values[k];
  }
  return v;
}

std::vector<double> jacobian_diag(const DeltaLsf& v) {
  validate_delta(v);
  std::vector<double> diag(v.values.size());
  for (std::size_t k = 0; k < v.values.size(); ++k) {
    diag[k] = 2.0 * std::sqrt(v.values[k]);
  }
  return diag;
}

std::vector<double> complete_simplex(const DeltaLsf& v) {
  validate_delta(v);
  std::vector<double> u(v.values.size() + 1);
  double sum = 0.0;
  for (std::size_t k = 0; k < v.values.size(); ++k) {
    u[k] = v.values[k];
    sum += v.values[k];
  }
  u.back() = 1.0 - sum;
  return u;
}

double x_to_v_factor(double mean_sum_v, int K) {
  if (K < 1) throw DataError("distortion conversion: K must be >= 1");
  if (!(mean_sum_v > 0.0 && mean_sum_v < 1.0)) {
    throw DataError("distortion conversion: mean_sum_v must lie in (0, 1)");
  }
  return 4.0 * mean_sum_v / static_cast<double>(K);
}

double v_to_s_factor(int K) {
  if (K < 1) throw DataError("distortion conversion: K must be >= 1");
  return M_PI * M_PI * 0.5 * static_cast<double>(K + 1);
}

DistortionValue distortion_x_to_v(const DistortionValue& dx,
                                  double mean_sum_v, int K) {
  if (dx.domain != Domain::kSrdlsf) {
    throw DataError("distortion_x_to_v: input must be srdlsf-domain");
  }
  if (!(dx.value >= 0.0)) {
    throw DataError("distortion_x_to_v: distortion must be >= 0");
  }
  return {Domain::kDlsf, dx.value * x_to_v_factor(mean_sum_v, K)};
}

DistortionValue distortion_v_to_s(const DistortionValue& dv, int K) {
  if (dv.domain != Domain::kDlsf) {
    throw DataError("distortion_v_to_s: input must be dlsf-domain");
  }
  if (!(dv.value >= 0.0)) {
    throw DataError("distortion_v_to_s: distortion must be >= 0");
  }
  return {Domain::kLsf, dv.value * v_to_s_factor(K)};
}

}  // namespace vvq
