#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vvq/baselines.hpp"
#include "vvq/mixture_em.hpp"
#include "vvq/vmf.hpp"

namespace vvq {

enum class RateUnit { kNats, kBits };

// Constant in front of the high-rate distortion expression. All model
// comparisons are invariant to it; the non-unity options give absolute
// scales under the named quantizer conventions.
enum class CMode { kUnity, kSphereBound, kZadorGaussian };

struct RateConfig {
  RateUnit rate_unit = RateUnit::kBits;  // unit of dr_curve grids and output
  double r_exponent = 2.0;               // distortion power r
  int dimension = 16;                    // degrees of freedom K
  CMode c_mode = CMode::kUnity;
};

// Rate split between index and quantization, all in nats per vector.
struct BitAllocation {
  std::vector<double> per_component_rates;  // R_i
  double quantization_rate = 0.0;           // R_q, satisfies sum pi_i R_i = R_q
  double index_rate = 0.0;                  // R_a = ln(component count)
  double total_rate = 0.0;                  // R = R_a + R_q
  bool high_rate_valid = true;              // false when any R_i < 0
};

enum class ModelFamily { kVmm, kGmm, kDmm };

std::string family_name(ModelFamily family);  // "vmm" / "gmm" / "dmm"

// What the rate machinery needs from a fitted mixture: weights and
// per-component differential entropies (nats) in the family's native domain
// (sphere coordinates, raw frequency vectors, or spectral-gap simplex).
struct MixtureSummary {
  ModelFamily family = ModelFamily::kVmm;
  std::vector<double> weights;
  std::vector<double> entropies;
};

MixtureSummary summarize(const VmfMixture& model,
                         EntropyForm form = EntropyForm::kPeak);
MixtureSummary summarize(const GaussMixture& model);
MixtureSummary summarize(const DirichletMixture& model);

// One D-R point: per-dimension expected distortion in the three domains.
struct DrPoint {
  double rate_bits = 0.0;
  double d_x = 0.0;
  double d_v = 0.0;
  double d_s = 0.0;
  bool valid = true;  // false where the high-rate assumption breaks down
};

struct DrCurve {
  ModelFamily family = ModelFamily::kVmm;
  int component_count = 0;
  std::vector<DrPoint> points;
};

// Rate spent identifying the component index: ln(component_count), nats.
double index_rate(int component_count);

// The distortion constant C(r, K) selected by the config.
double c_constant(const RateConfig& cfg);

// Optimal inter-component split of a total rate (nats): each component gets
// R_i = R_q + h_i - sum_j pi_j h_j, which equalizes per-component
// distortions. Negative rates are reported unclamped with
// high_rate_valid = false.
BitAllocation allocate_rates(const std::vector<double>& entropies,
                             const std::vector<double>& weights,
                             double total_rate_nats);

// Mean per-dimension distortion at a total rate (nats):
//   D(R) = C(r, K) * exp(-(r/K) * (R - ln I - sum pi_i h_i)),
// in the same domain as the entropies.
double dr_point(double total_rate_nats,
                const std::vector<double>& entropies,
                const std::vector<double>& weights, const RateConfig& cfg);

// Distortion-rate curve over a strictly increasing rate grid (in
// cfg.rate_unit). The native-domain distortion from dr_point is mapped to
// all three reporting domains using the supplied mean summed spectral gap.
DrCurve dr_curve(const MixtureSummary& model,
                 const std::vector<double>& rate_grid, const RateConfig& cfg,
                 double mean_sum_v);

// Diagnostic for the independence approximation behind the rate split: the
// mixture's true entropy (Monte Carlo) can be at most
// ln I + sum pi_i h_i, with equality for non-overlapping components.
// Component entropies use the exact form so the single-component gap is 0.
struct GapReport {
  double lhs = 0.0;        // ln I + sum pi_i h_i
  double mc_entropy = 0.0; // -E[ln f_mixture], sampled from the model
  double gap = 0.0;        // lhs - mc_entropy
  double std_error = 0.0;  // MC standard error of mc_entropy
};

GapReport entropy_gap(const VmfMixture& model, int mc_samples,
                      std::uint64_t seed);

// CSV with header rate_bits,family,I,D_x,D_v,D_s,valid; numbers carry 12
// significant digits.
void write_dr_csv(std::ostream& out, const std::vector<DrCurve>& curves);

}  // namespace vvq
