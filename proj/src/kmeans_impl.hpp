#pragma once

// Shared k-means implementation used to initialize the mixture fits. Not
// part of the public interface.

#include <vector>

#include "vvq/rng.hpp"

namespace vvq::detail {

enum class KmeansMetric {
  kCosine,     // distance 1 - x'c, centroids renormalized to unit length
  kEuclidean,  // squared distance, centroids are cluster means
};

struct KmeansResult {
  std::vector<std::vector<double>> centroids;
  std::vector<int> assignment;  // one label per input row
  double inertia = 0.0;         // sum of distances to assigned centroids
};

// Lloyd iterations with k-means++ seeding, `restarts` independent starts
// keeping the lowest inertia. When the input exceeds `subsample_cap` rows the
// iterations run on a random subset and a final assignment pass covers the
// full set. Deterministic for a given rng state.
KmeansResult kmeans(const std::vector<std::vector<double>>& rows, int k,
                    KmeansMetric metric, int restarts, Rng& rng,
                    std::size_t subsample_cap = 50000);

}  // namespace vvq::detail
