#include "vvq/vmf.hpp"

#include <cmath>
#include <string>

#include "vvq/errors.hpp"
#include "vvq/special_functions.hpp"

namespace vvq {

namespace {

// Below this concentration the density is numerically uniform and the
// normalizing constant takes its lambda -> 0 limit (error O(lambda^2)).
constexpr double kUniformLambda = 1e-8;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

void validate_component(const VmfComponent& comp) {
  if (comp.dim() < 3) {
    throw DataError("vmf: component dimension must be >= 3");
  }
  if (!(comp.lambda >= 0.0)) {
    throw DataError("vmf: concentration must be >= 0");
  }
  const double norm2 = dot(comp.mu, comp.mu);
  if (std::fabs(norm2 - 1.0) > 2e-12) {
    throw DataError("vmf: mean direction must have unit norm");
  }
}

double log_norm_const(int d, double lambda) {
  if (d < 3) throw DataError("log_norm_const: requires d >= 3");
  if (!(lambda >= 0.0)) {
    throw DataError("log_norm_const: requires lambda >= 0");
  }
  if (lambda < kUniformLambda) {
    return -log_sphere_area(d);
  }
  const double half_d = 0.5 * static_cast<double>(d);
  return (half_d - 1.0) * std::log(lambda) - half_d * std::log(2.0 * M_PI) -
         log_bessel_i(half_d - 1.0, lambda);
}

double log_pdf(const SphereVector& x, const VmfComponent& comp) {
  if (static_cast<int>(x.values.size()) != comp.dim()) {
    throw DataError("log_pdf: dimension mismatch");
  }
  return log_norm_const(comp.dim(), comp.lambda) +
         comp.lambda * dot(x.values, comp.mu);
}

double mean_resultant(int d, double lambda) {
  if (d < 3) throw DataError("mean_resultant: requires d >= 3");
  if (!(lambda >= 0.0)) {
    throw DataError("mean_resultant: requires lambda >= 0");
  }
  if (lambda < kUniformLambda) {
    // Leading behaviour A_d(lambda) = lambda/d + O(lambda^3).
    return lambda / static_cast<double>(d);
  }
  const double nu = 0.5 * static_cast<double>(d) - 1.0;
  const double a =
      std::exp(log_bessel_i(nu + 1.0, lambda) - log_bessel_i(nu, lambda));
  if (a >= 1.0) return std::nextafter(1.0, 0.0);
  return a < 0.0 ? 0.0 : a;
}

double component_entropy(int d, double lambda, EntropyForm form) {
  const double neg_log_c = -log_norm_const(d, lambda);
  switch (form) {
    case EntropyForm::kPeak:
      return neg_log_c - lambda;
    case EntropyForm::kExact:
      return neg_log_c - lambda * mean_resultant(d, lambda);
  }
  throw DataError("component_entropy: unknown form");
}

std::vector<SphereVector> sample_vmf(const VmfComponent& comp, int n,
                                     Rng& rng) {
  validate_component(comp);
  if (n < 1) throw DataError("sample_vmf: requires n >= 1");
  const int d = comp.dim();
  std::vector<SphereVector> out(static_cast<std::size_t>(n));

  if (comp.lambda == 0.0) {
    for (auto& sv : out) {
      sv.values.resize(d);
      double norm2 = 0.0;
      do {
        norm2 = 0.0;
        for (double& c : sv.values) {
          c = rng.normal();
          norm2 += c * c;
        }
      } while (norm2 == 0.0);
      const double inv = 1.0 / std::sqrt(norm2);
      for (double& c : sv.values) c *= inv;
    }
    return out;
  }

  // Scalar rejection for the cosine t = mu'x: proposal built from a
  // symmetric Beta((d-1)/2, (d-1)/2) variate.
  const double dm1 = static_cast<double>(d - 1);
  const double lambda = comp.lambda;
  const double b =
      dm1 / (std::sqrt(4.0 * lambda * lambda + dm1 * dm1) + 2.0 * lambda);
  const double x0 = (1.0 - b) / (1.0 + b);
  const double log_accept_ref =
      lambda * x0 + dm1 * std::log(1.0 - x0 * x0);
  const double half = 0.5 * dm1;

  // Householder vector mapping e_d onto mu: H y = y - 2 u (u'y)/(u'u).
  std::vector<double> u(comp.mu.size());
  double u_norm2 = 0.0;
  for (int i = 0; i < d; ++i) {
    u[i] = (i == d - 1 ? 1.0 : 0.0) - comp.mu[i];
    u_norm2 += u[i] * u[i];
  }
  const bool rotate = u_norm2 > 1e-24;

  std::vector<double> tangent(static_cast<std::size_t>(d - 1));
  for (auto& sv : out) {
    double t = 0.0;
    for (;;) {
      const double z = rng.beta(half, half);
      t = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
      const double crit =
          lambda * t + dm1 * std::log(1.0 - x0 * t) - log_accept_ref;
      if (crit >= std::log(1.0 - rng.uniform())) break;
    }

    // Uniform direction in the tangent space.
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (double& c : tangent) {
        c = rng.normal();
        norm2 += c * c;
      }
    } while (norm2 == 0.0);
    const double scale = std::sqrt(std::fmax(0.0, 1.0 - t * t) / norm2);

    sv.values.resize(d);
    for (int i = 0; i < d - 1; ++i) sv.values[i] = tangent[i] * scale;
    sv.values[d - 1] = t;

    if (rotate) {
      double proj = 0.0;
      for (int i = 0; i < d; ++i) proj += u[i] * sv.values[i];
      const double f = 2.0 * proj / u_norm2;
      for (int i = 0; i < d; ++i) sv.values[i] -= f * u[i];
    }
    // Exact renormalization guards accumulated rounding.
    double r2 = 0.0;
    for (double c : sv.values) r2 += c * c;
    const double inv = 1.0 / std::sqrt(r2);
    for (double& c : sv.values) c *= inv;
  }
  return out;
}

std::vector<SphereVector> sample_vmf(const VmfComponent& comp, int n,
                                     std::uint64_t seed) {
  Rng rng(seed);
  return sample_vmf(comp, n, rng);
}

}  // namespace vvq
