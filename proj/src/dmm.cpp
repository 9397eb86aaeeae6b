#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "kmeans_impl.hpp"
#include "vvq/baselines.hpp"
#include "vvq/errors.hpp"
#include "vvq/special_functions.hpp"

namespace vvq {

namespace {

constexpr double kWeightFloor = 1e-8;
constexpr double kSimplexFloor = 1e-10;
constexpr double kAlphaTol = 1e-8;

// Posteriors below the smallest normal double are statistically zero, and
// leaving them sub-normal makes the M-step matrix products take the slow
// micro-coded float paths; flush them to exact zeros instead.
constexpr double kPosteriorFloor = std::numeric_limits<double>::min();

double log_beta(const std::vector<double>& alpha) {
  double sum = 0.0, total = 0.0;
  for (double a : alpha) {
    sum += std::lgamma(a);
    total += a;
  }
  return sum - std::lgamma(total);
}

// Moment-matching estimate from per-coordinate means and second moments:
// each coordinate implies a total concentration via its beta marginal; the
// positive estimates are averaged.
std::vector<double> moment_match(const std::vector<double>& mean,
                                 const std::vector<double>& mean_sq) {
  double a0_acc = 0.0;
  int a0_count = 0;
  for (std::size_t j = 0; j < mean.size(); ++j) {
    const double var = mean_sq[j] - mean[j] * mean[j];
    if (var > 0.0 && mean[j] > 0.0 && mean[j] < 1.0) {
      const double est = mean[j] * (1.0 - mean[j]) / var - 1.0;
      if (est > 0.0) {
        a0_acc += est;
        ++a0_count;
      }
    }
  }
  const double a0 = a0_count > 0 ? a0_acc / a0_count : double(mean.size());
  std::vector<double> alpha(mean.size());
  for (std::size_t j = 0; j < mean.size(); ++j) {
    alpha[j] = std::max(mean[j] * a0, 1e-6);
  }
  return alpha;
}

// Digamma fixed point to kAlphaTol. Always converges (the weighted
// log-likelihood is concave in alpha).
void fixed_point(const std::vector<double>& lbar, std::vector<double>* alpha) {
  for (int iter = 0; iter < 2000; ++iter) {
    double a0 = 0.0;
    for (double a : *alpha) a0 += a;
    const double base = digamma(a0);
    double max_move = 0.0;
    for (std::size_t j = 0; j < alpha->size(); ++j) {
      const double next = inv_digamma(base + lbar[j]);
      max_move = std::max(max_move, std::abs(next - (*alpha)[j]));
      (*alpha)[j] = next;
    }
    if (max_move < kAlphaTol) break;
  }
}

// Newton refinement using the rank-one Hessian structure. Returns false if a
// step leaves the positive orthant or produces non-finite values.
bool newton_refine(const std::vector<double>& lbar,
                   std::vector<double>* alpha) {
  const std::size_t dim = alpha->size();
  std::vector<double> g(dim), q(dim);
  for (int iter = 0; iter < 50; ++iter) {
    double a0 = 0.0;
    for (double a : *alpha) a0 += a;
    const double psi0 = digamma(a0);
    double inv_q_sum = 0.0, gq_sum = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      g[j] = psi0 - digamma((*alpha)[j]) + lbar[j];
      q[j] = -trigamma((*alpha)[j]);
      inv_q_sum += 1.0 / q[j];
      gq_sum += g[j] / q[j];
    }
    const double z = trigamma(a0);
    const double b = gq_sum / (1.0 / z + inv_q_sum);
    double max_step = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double step = (g[j] - b) / q[j];
      const double next = (*alpha)[j] - step;
      if (!std::isfinite(next) || next <= 0.0) return false;
      max_step = std::max(max_step, std::abs(step));
      (*alpha)[j] = next;
    }
    if (max_step < 1e-12) break;
  }
  return true;
}

// Weighted maximum likelihood with the documented fallback: if Newton leaves
// the feasible region, restart from moment matching and retry once.
std::vector<double> estimate_alpha(const std::vector<double>& lbar,
                                   const std::vector<double>& mean,
                                   const std::vector<double>& mean_sq,
                                   std::vector<double> warm_start) {
  fixed_point(lbar, &warm_start);
  std::vector<double> refined = warm_start;
  if (newton_refine(lbar, &refined)) return refined;

  std::vector<double> retry = moment_match(mean, mean_sq);
  fixed_point(lbar, &retry);
  std::vector<double> retry_refined = retry;
  if (newton_refine(lbar, &retry_refined)) return retry_refined;
  return retry;  // fixed-point solution already meets the 1e-8 tolerance
}

}  // namespace

double dirichlet_component_entropy(const DirichletComponent& comp) {
  if (comp.dim() < 2) {
    throw DataError("dirichlet_component_entropy: need at least 2 cells");
  }
  double a0 = 0.0;
  for (double a : comp.alpha) {
    if (!(a > 0.0)) {
      throw DataError("dirichlet_component_entropy: non-positive alpha");
    }
    a0 += a;
  }
  double acc = log_beta(comp.alpha) +
               (a0 - double(comp.dim())) * digamma(a0);
  for (double a : comp.alpha) acc -= (a - 1.0) * digamma(a);
  return acc;
}

double dmm_mean_sum_v(const DirichletMixture& model) {
  if (model.size() == 0) throw DataError("dmm_mean_sum_v: empty mixture");
  double acc = 0.0;
  for (int i = 0; i < model.size(); ++i) {
    const auto& alpha = model.components[i].alpha;
    double a0 = 0.0;
    for (double a : alpha) a0 += a;
    double head = 0.0;  // all cells except the residual
    for (std::size_t k = 0; k + 1 < alpha.size(); ++k) head += alpha[k];
    acc += model.weights[i] * head / a0;
  }
  return acc;
}

DmmReport fit_dmm(const std::vector<std::vector<double>>& v, int components,
                  double tol, int max_iter, std::uint64_t seed) {
  if (components < 1) throw DataError("fit_dmm: need at least one component");
  if (v.empty() || v[0].size() < 2) {
    throw DataError("fit_dmm: need simplex vectors with at least 2 cells");
  }
  if (v.size() < 10 * static_cast<std::size_t>(components)) {
    throw DataError("fit_dmm: need at least 10 samples per component");
  }
  const std::size_t n = v.size();
  const std::size_t dim = v[0].size();

  // Clamp tiny cells and renormalize. The values, their logs, and their
  // squares are packed as sample-per-row matrices so the E-step and the
  // sufficient statistics run as matrix products.
  std::vector<std::vector<double>> rows(n);
  Eigen::MatrixXd vals(n, dim);
  Eigen::MatrixXd logs(n, dim);
  Eigen::MatrixXd squares(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i].size() != dim) {
      throw DataError("fit_dmm: rows have inconsistent dimensions");
    }
    rows[i].resize(dim);
    double total = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      if (!std::isfinite(v[i][j]) || v[i][j] < 0.0) {
        throw DataError("fit_dmm: simplex entries must be non-negative");
      }
      rows[i][j] = std::max(v[i][j], kSimplexFloor);
      total += rows[i][j];
    }
    for (std::size_t j = 0; j < dim; ++j) {
      rows[i][j] /= total;
      const auto ei = static_cast<Eigen::Index>(i);
      const auto ej = static_cast<Eigen::Index>(j);
      vals(ei, ej) = rows[i][j];
      logs(ei, ej) = std::log(rows[i][j]);
      squares(ei, ej) = rows[i][j] * rows[i][j];
    }
  }

  // Global moments for re-seeding degenerate components.
  std::vector<double> g_mean(dim, 0.0), g_mean_sq(dim, 0.0);
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < dim; ++j) {
      g_mean[j] += row[j];
      g_mean_sq[j] += row[j] * row[j];
    }
  }
  for (std::size_t j = 0; j < dim; ++j) {
    g_mean[j] /= double(n);
    g_mean_sq[j] /= double(n);
  }
  const std::vector<double> global_alpha = moment_match(g_mean, g_mean_sq);

  // Initialization: k-means clusters, moment matching per cluster.
  Rng rng(seed);
  const auto clusters = detail::kmeans(rows, components,
                                       detail::KmeansMetric::kEuclidean,
                                       /*restarts=*/10, rng);
  std::vector<std::vector<double>> alphas(components);
  std::vector<double> weights(components);
  {
    std::vector<std::size_t> counts(components, 0);
    std::vector<std::vector<double>> mean(components,
                                          std::vector<double>(dim, 0.0));
    std::vector<std::vector<double>> mean_sq(components,
                                             std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      const int c = clusters.assignment[i];
      ++counts[c];
      for (std::size_t j = 0; j < dim; ++j) {
        mean[c][j] += rows[i][j];
        mean_sq[c][j] += rows[i][j] * rows[i][j];
      }
    }
    for (int c = 0; c < components; ++c) {
      weights[c] = std::max(double(counts[c]) / double(n), kWeightFloor);
      if (counts[c] >= 2) {
        for (std::size_t j = 0; j < dim; ++j) {
          mean[c][j] /= double(counts[c]);
          mean_sq[c][j] /= double(counts[c]);
        }
        alphas[c] = moment_match(mean[c], mean_sq[c]);
      } else {
        alphas[c] = global_alpha;
      }
    }
    double total = 0.0;
    for (double w : weights) total += w;
    for (double& w : weights) w /= total;
  }

  DmmReport report;
  report.seed = seed;

  const auto en = static_cast<Eigen::Index>(n);
  const auto edim = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd resp(en, components);
  Eigen::MatrixXd shape(edim, components);  // column c holds alpha_c - 1
  Eigen::RowVectorXd shift(components);     // ln w_c - ln B(alpha_c)
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= max_iter; ++iter) {
    // E-step: ln w_c + ln f_c(v_i) for all samples in one matrix product;
    // the alpha-only terms are hoisted out of the sample loop.
    for (int c = 0; c < components; ++c) {
      for (Eigen::Index j = 0; j < edim; ++j) {
        shape(j, c) = alphas[c][static_cast<std::size_t>(j)] - 1.0;
      }
      shift(c) = std::log(weights[c]) - log_beta(alphas[c]);
    }
    resp.noalias() = logs * shape;
    resp.rowwise() += shift;
    const Eigen::VectorXd top = resp.rowwise().maxCoeff();
    resp.colwise() -= top;
    resp = resp.array().exp();
    resp = (resp.array() < kPosteriorFloor).select(0.0, resp);
    const Eigen::VectorXd denom = resp.rowwise().sum();
    const double ll = (top.array() + denom.array().log()).mean();
    resp.array().colwise() /= denom.array();
    if (!std::isfinite(ll)) break;  // keep the last valid model
    report.log_likelihood_trace.push_back(ll);
    report.iterations = iter;

    // M-step: weighted sufficient statistics as matrix products, then
    // per-component ML.
    const Eigen::RowVectorXd mass = resp.colwise().sum();
    const Eigen::MatrixXd stat_log = logs.transpose() * resp;
    const Eigen::MatrixXd stat_mean = vals.transpose() * resp;
    const Eigen::MatrixXd stat_sq = squares.transpose() * resp;
    std::vector<double> lbar(dim), mean(dim), mean_sq(dim);
    for (int c = 0; c < components; ++c) {
      weights[c] = mass(c) / double(n);
      if (weights[c] < kWeightFloor) {
        alphas[c] = global_alpha;
        weights[c] = 1.0 / double(n);
        continue;
      }
      for (std::size_t j = 0; j < dim; ++j) {
        const auto ej = static_cast<Eigen::Index>(j);
        lbar[j] = stat_log(ej, c) / mass(c);
        mean[j] = stat_mean(ej, c) / mass(c);
        mean_sq[j] = stat_sq(ej, c) / mass(c);
      }
      alphas[c] = estimate_alpha(lbar, mean, mean_sq, alphas[c]);
    }
    double total = 0.0;
    for (double w : weights) total += w;
    for (double& w : weights) w /= total;

    if ((std::isinf(tol) && tol > 0.0) || std::abs(ll - prev_ll) < tol) {
      report.converged = true;
      break;
    }
    prev_ll = ll;
  }

  report.final_model.weights = weights;
  report.final_model.components.resize(components);
  for (int c = 0; c < components; ++c) {
    report.final_model.components[c].alpha = alphas[c];
  }
  return report;
}

}  // namespace vvq
