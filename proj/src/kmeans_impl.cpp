#include "kmeans_impl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "vvq/errors.hpp"

namespace vvq::detail {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return acc;
}

double cos_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return 1.0 - dot;
}

double distance(KmeansMetric metric, const std::vector<double>& a,
                const std::vector<double>& b) {
  return metric == KmeansMetric::kCosine ? cos_dist(a, b) : sq_dist(a, b);
}

void normalize(std::vector<double>* v) {
  double norm = 0.0;
  for (double x : *v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (double& x : *v) x /= norm;
  }
}

// k-means++ seeding: first centroid uniform, then proportional to the
// distance to the nearest centroid chosen so far.
std::vector<std::vector<double>> seed_centroids(
    const std::vector<std::vector<double>>& rows,
    const std::vector<std::size_t>& active, int k, KmeansMetric metric,
    Rng& rng) {
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  centroids.push_back(rows[active[rng.below(active.size())]]);

  std::vector<double> nearest(active.size());
  for (std::size_t i = 0; i < active.size(); ++i) {
    nearest[i] = distance(metric, rows[active[i]], centroids[0]);
  }
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (double dist : nearest) total += std::max(dist, 0.0);
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < nearest.size(); ++i) {
        acc += std::max(nearest[i], 0.0);
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(active.size());
    }
    centroids.push_back(rows[active[pick]]);
    for (std::size_t i = 0; i < active.size(); ++i) {
      nearest[i] = std::min(
          nearest[i], distance(metric, rows[active[i]], centroids.back()));
    }
  }
  return centroids;
}

}  // namespace

KmeansResult kmeans(const std::vector<std::vector<double>>& rows, int k,
                    KmeansMetric metric, int restarts, Rng& rng,
                    std::size_t subsample_cap) {
  if (rows.empty() || k < 1 || static_cast<std::size_t>(k) > rows.size()) {
    throw DataError("kmeans: need at least k non-empty rows");
  }
  const std::size_t dim = rows[0].size();

  // Iterate on a subset when the input is large; the final assignment pass
  // below always covers every row.
  std::vector<std::size_t> active(rows.size());
  std::iota(active.begin(), active.end(), std::size_t{0});
  if (rows.size() > subsample_cap) {
    std::vector<int> idx(rows.size());
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    active.assign(idx.begin(), idx.begin() + subsample_cap);
  }

  std::vector<std::vector<double>> best_centroids;
  double best_inertia = std::numeric_limits<double>::infinity();

  std::vector<int> labels(active.size(), -1);
  for (int restart = 0; restart < restarts; ++restart) {
    auto centroids = seed_centroids(rows, active, k, metric, rng);
    std::fill(labels.begin(), labels.end(), -1);

    double inertia = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      bool changed = false;
      inertia = 0.0;
      for (std::size_t i = 0; i < active.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (int c = 0; c < k; ++c) {
          const double dist = distance(metric, rows[active[i]], centroids[c]);
          if (dist < best) {
            best = dist;
            arg = c;
          }
        }
        if (labels[i] != arg) {
          labels[i] = arg;
          changed = true;
        }
        inertia += best;
      }
      if (!changed && iter > 0) break;

      std::vector<std::vector<double>> sums(k,
                                            std::vector<double>(dim, 0.0));
      std::vector<std::size_t> counts(k, 0);
      for (std::size_t i = 0; i < active.size(); ++i) {
        const auto& row = rows[active[i]];
        auto& sum = sums[labels[i]];
        for (std::size_t j = 0; j < dim; ++j) sum[j] += row[j];
        ++counts[labels[i]];
      }
      for (int c = 0; c < k; ++c) {
        if (counts[c] == 0) {
          // Re-seed an empty cluster at the row farthest from its centroid.
          std::size_t far = 0;
          double far_dist = -1.0;
          for (std::size_t i = 0; i < active.size(); ++i) {
            const double dist =
                distance(metric, rows[active[i]], centroids[labels[i]]);
            if (dist > far_dist) {
              far_dist = dist;
              far = i;
            }
          }
          centroids[c] = rows[active[far]];
          continue;
        }
        for (std::size_t j = 0; j < dim; ++j) {
          centroids[c][j] = sums[c][j] / double(counts[c]);
        }
        if (metric == KmeansMetric::kCosine) normalize(&centroids[c]);
      }
    }
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_centroids = centroids;
    }
  }

  KmeansResult result;
  result.centroids = std::move(best_centroids);
  result.assignment.resize(rows.size());
  result.inertia = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int c = 0; c < k; ++c) {
      const double dist = distance(metric, rows[i], result.centroids[c]);
      if (dist < best) {
        best = dist;
        arg = c;
      }
    }
    result.assignment[i] = arg;
    result.inertia += best;
  }
  return result;
}

}  // namespace vvq::detail
