#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace vvq {

// Seeded random source with self-contained distribution transforms.
// std::mt19937_64 output is pinned by the standard, and the transforms below
// avoid std::normal_distribution and friends, whose streams differ between
// standard libraries; a fixed seed therefore yields the same stream on every
// platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  // Standard normal via Marsaglia's polar method; pairs are cached.
  double normal();

  // Gamma(shape, 1) via the Marsaglia-Tsang squeeze, with the usual
  // U^{1/shape} boost for shape < 1.
  double gamma(double shape);

  double beta(double a, double b);

  std::vector<double> dirichlet(const std::vector<double>& alpha);

  // In-place Fisher-Yates shuffle of an index permutation.
  void shuffle(std::vector<int>& items);

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace vvq
