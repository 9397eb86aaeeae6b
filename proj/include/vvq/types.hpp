#pragma once

#include <vector>

namespace vvq {

// Spectral parameter vectors at the three analysis stages.

// K strictly increasing angles in the open interval (0, pi).
struct LsfVector {
  std::vector<double> values;
};

// K positive normalized LSF increments with sum < 1; the residual 1 - sum
// completes the simplex.
struct DeltaLsf {
  std::vector<double> values;
};

// (K+1) coordinates with unit Euclidean norm. Speech-derived vectors are
// entrywise nonnegative with a strictly positive residual coordinate; model
// samples may carry general signs.
struct SphereVector {
  std::vector<double> values;
};

// Coordinate system a distortion was measured in.
enum class Domain { kSrdlsf, kDlsf, kLsf };

// Mean squared error per vector: unitless for srdlsf/dlsf, rad^2 for lsf.
struct DistortionValue {
  Domain domain = Domain::kSrdlsf;
  double value = 0.0;
};

}  // namespace vvq
