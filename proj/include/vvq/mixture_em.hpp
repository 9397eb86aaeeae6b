#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vvq/types.hpp"
#include "vvq/vmf.hpp"

namespace vvq {

// Finite mixture of von Mises-Fisher components on a shared sphere.
struct VmfMixture {
  std::vector<double> weights;
  std::vector<VmfComponent> components;

  int size() const { return static_cast<int>(weights.size()); }
  int dim() const { return components.empty() ? 0 : components[0].dim(); }
};

// Throws DataError unless: weights and components agree in count, weights
// are positive and sum to 1 within 1e-12, and every component is valid on a
// common dimension.
void validate_mixture(const VmfMixture& mixture);

// N x I posterior matrix, row-major; each row sums to 1.
struct Responsibilities {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double& at(std::size_t n, std::size_t i) { return values[n * cols + i]; }
  double at(std::size_t n, std::size_t i) const {
    return values[n * cols + i];
  }
};

// Outcome of an EM fit. The trace holds the mean log-likelihood of the model
// entering each iteration, so it is non-decreasing (slack 1e-8).
struct EmReport {
  VmfMixture final_model;
  std::vector<double> log_likelihood_trace;
  int iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;
};

// Posterior component memberships, computed in log space with per-row
// max-subtraction. Throws NumericError naming the sample index if a row
// underflows to all zeros.
Responsibilities e_step(const std::vector<SphereVector>& x,
                        const VmfMixture& model);

// Which dimension constant enters the concentration update
// lambda = (r*dim - r^3) / (1 - r^2): the ambient coordinate count d, or the
// sphere dimension d-1 (kept for compatibility; kAmbient is the default).
enum class DimConvention { kAmbient, kLiteral };

// Closed-form concentration estimate from a mean resultant length.
double kappa_banerjee(int dim, double r_bar,
                      DimConvention convention = DimConvention::kAmbient);

// Exact maximum-likelihood concentration: solves A_dim(lambda) = r_bar by
// bisection so the residual is below 1e-9. r_bar must lie in [0, 1-1e-9].
double kappa_ml_oracle(int dim, double r_bar);

// Maximization update: weights are column means of the responsibilities,
// means are normalized weighted resultants, concentrations come from
// kappa_banerjee with the resultant length clamped to [0, 1-1e-9].
// Components with a vanishing weight or resultant are re-seeded at the
// sample with the lowest maximum responsibility.
VmfMixture m_step(const std::vector<SphereVector>& x,
                  const Responsibilities& resp,
                  DimConvention convention = DimConvention::kAmbient);

enum class VmmInit {
  kSphericalKmeans,  // cosine k-means, 10 restarts, best inertia kept
  kRandomPoints,     // distinct data points as means, shared concentration
};

// Full EM fit. Alternates e_step/m_step until the mean log-likelihood moves
// by less than `tol` (default 1e-6) or `max_iter` iterations (default 500);
// tol = infinity performs exactly one iteration. Requires n >= 10 * components.
// Deterministic for a given seed.
EmReport fit_vmm(const std::vector<SphereVector>& x, int components,
                 VmmInit init = VmmInit::kSphericalKmeans, double tol = 1e-6,
                 int max_iter = 500, std::uint64_t seed = 0);

// Same loop from a caller-supplied starting model (also used internally once
// initialization has produced one).
EmReport fit_vmm(const std::vector<SphereVector>& x,
                 const VmfMixture& initial, double tol = 1e-6,
                 int max_iter = 500, std::uint64_t seed = 0);

}  // namespace vvq
