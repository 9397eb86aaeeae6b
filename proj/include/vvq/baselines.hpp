#pragma once

#include <cstdint>
#include <vector>

namespace vvq {

// ---------------------------------------------------------------------------
// Gaussian mixture baseline (fits raw LSF vectors)
// ---------------------------------------------------------------------------

struct GaussComponent {
  std::vector<double> mean;
  std::vector<std::vector<double>> covariance;  // symmetric positive-definite

  int dim() const { return static_cast<int>(mean.size()); }
};

struct GaussMixture {
  std::vector<double> weights;
  std::vector<GaussComponent> components;

  int size() const { return static_cast<int>(weights.size()); }
  int dim() const { return components.empty() ? 0 : components[0].dim(); }
};

struct GmmReport {
  GaussMixture final_model;
  std::vector<double> log_likelihood_trace;
  int iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;
};

// Full-covariance EM fit. Covariances get +1e-8*trace/K on the diagonal each
// update; a component whose covariance still fails its Cholesky factorization
// is re-seeded at the worst-explained sample with the global covariance.
// Requires n >= 10 * components * dim. tol = infinity runs one iteration.
GmmReport fit_gmm(const std::vector<std::vector<double>>& x, int components,
                  double tol = 1e-6, int max_iter = 500,
                  std::uint64_t seed = 0);

// Differential entropy 0.5 * ln((2 pi e)^K det(cov)). Throws NumericError if
// the covariance is not positive-definite.
double gmm_component_entropy(const GaussComponent& comp);

// ---------------------------------------------------------------------------
// Dirichlet mixture baseline (fits completed spectral-gap simplex vectors)
// ---------------------------------------------------------------------------

struct DirichletComponent {
  std::vector<double> alpha;  // all entries > 0

  int dim() const { return static_cast<int>(alpha.size()); }
};

struct DirichletMixture {
  std::vector<double> weights;
  std::vector<DirichletComponent> components;

  int size() const { return static_cast<int>(weights.size()); }
  int dim() const { return components.empty() ? 0 : components[0].dim(); }
};

struct DmmReport {
  DirichletMixture final_model;
  std::vector<double> log_likelihood_trace;
  int iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;
};

// EM fit over simplex vectors (each row: positive entries summing to 1;
// entries are clamped at 1e-10 and renormalized on input). Concentration
// updates use the digamma fixed point iterated to 1e-8 with a Newton
// refinement; if Newton diverges the component falls back to moment matching
// and retries once. Requires n >= 10 * components. tol = infinity runs one
// iteration.
DmmReport fit_dmm(const std::vector<std::vector<double>>& v, int components,
                  double tol = 1e-6, int max_iter = 500,
                  std::uint64_t seed = 0);

// Differential entropy ln B(alpha) + (a0 - d) psi(a0) - sum (a_j - 1) psi(a_j).
double dirichlet_component_entropy(const DirichletComponent& comp);

// Model-based mean of the summed spectral gaps: sum_i pi_i * sum_{k<=K}
// alpha_{i,k} / alpha_{i,0}, where the last cell of each alpha is the
// residual. Always in (0, 1).
double dmm_mean_sum_v(const DirichletMixture& model);

}  // namespace vvq
