#pragma once

#include <cstdint>
#include <vector>

#include "vvq/rng.hpp"
#include "vvq/types.hpp"

namespace vvq {

// One von Mises-Fisher component on S^{d-1}: mean direction mu (unit norm)
// and concentration lambda >= 0.
struct VmfComponent {
  std::vector<double> mu;
  double lambda = 0.0;

  int dim() const { return static_cast<int>(mu.size()); }
};

// Throws DataError unless d >= 3, ||mu|| = 1 within 1e-12, lambda >= 0.
void validate_component(const VmfComponent& comp);

// ln c_d(lambda) = (d/2 - 1) ln(lambda) - (d/2) ln(2 pi) - ln I_{d/2-1}(lambda).
// The lambda -> 0 limit is a removable singularity handled as an explicit
// uniform branch: -ln(area of S^{d-1}).
double log_norm_const(int d, double lambda);

// ln f(x) = log_norm_const(d, lambda) + lambda * mu'x.
double log_pdf(const SphereVector& x, const VmfComponent& comp);

// Mean resultant length A_d(lambda) = I_{d/2}(lambda) / I_{d/2-1}(lambda);
// strictly increasing in lambda, A_d(0) = 0, A_d(lambda) -> 1.
double mean_resultant(int d, double lambda);

// Differential entropy of a component with respect to the sphere's surface
// measure. Two conventions:
//   kPeak:  -ln c - lambda.          Substitutes the modal value 1 for the
//                                    mean cosine E[mu'x]; equals -ln f at the
//                                    mode. Understates the entropy by
//                                    lambda * (1 - A_d(lambda)).
//   kExact: -ln c - lambda A_d(lambda).  Uses the true mean cosine; matches
//                                    -E[ln f] under sampling.
enum class EntropyForm { kPeak, kExact };

double component_entropy(int d, double lambda, EntropyForm form);

// Rejection sampler (tangent-normal decomposition with a scalar rejection on
// the mu'x marginal, uniform tangent direction, Householder rotation onto
// mu). Samples are general-sign unit vectors; deterministic for a given rng
// state / seed.
std::vector<SphereVector> sample_vmf(const VmfComponent& comp, int n,
                                     Rng& rng);
std::vector<SphereVector> sample_vmf(const VmfComponent& comp, int n,
                                     std::uint64_t seed);

}  // namespace vvq
