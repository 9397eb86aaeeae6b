#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "kmeans_impl.hpp"
#include "vvq/baselines.hpp"
#include "vvq/errors.hpp"

namespace vvq {

namespace {

constexpr double kWeightFloor = 1e-8;
constexpr double kRegFactor = 1e-8;

// Posteriors below the smallest normal double are statistically zero, and
// leaving them sub-normal makes the M-step matrix products take the slow
// micro-coded float paths; flush them to exact zeros instead.
constexpr double kPosteriorFloor = std::numeric_limits<double>::min();

// Samples packed one per column so the E- and M-steps run as matrix
// products on contiguous columns.
Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& x) {
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  const Eigen::Index dim = static_cast<Eigen::Index>(x[0].size());
  Eigen::MatrixXd out(dim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(x[i].size()) != dim) {
      throw DataError("fit_gmm: rows have inconsistent dimensions");
    }
    out.col(i) = Eigen::Map<const Eigen::VectorXd>(x[i].data(), dim);
  }
  return out;
}

Eigen::MatrixXd to_eigen_cov(const GaussComponent& comp) {
  const int dim = comp.dim();
  Eigen::MatrixXd cov(dim, dim);
  if (static_cast<int>(comp.covariance.size()) != dim) {
    throw DataError("gauss component: covariance does not match the mean");
  }
  for (int i = 0; i < dim; ++i) {
    if (static_cast<int>(comp.covariance[i].size()) != dim) {
      throw DataError("gauss component: covariance is not square");
    }
    for (int j = 0; j < dim; ++j) cov(i, j) = comp.covariance[i][j];
  }
  return cov;
}

void regularize(Eigen::MatrixXd* cov) {
  const double load = kRegFactor * cov->trace() / double(cov->rows());
  cov->diagonal().array() += load;
}

// Internal per-component state keeping the factorization alongside the
// parameters so the E-step solves reuse it.
struct Component {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::LLT<Eigen::MatrixXd> llt;
  double log_det = 0.0;

  bool factorize() {
    llt.compute(cov);
    if (llt.info() != Eigen::Success) return false;
    log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    return true;
  }
};

Eigen::MatrixXd global_covariance(const Eigen::MatrixXd& x) {
  const Eigen::VectorXd mean = x.rowwise().mean();
  const Eigen::MatrixXd centered = x.colwise() - mean;
  Eigen::MatrixXd cov =
      centered * centered.transpose() / double(x.cols());
  regularize(&cov);
  return cov;
}

}  // namespace

double gmm_component_entropy(const GaussComponent& comp) {
  if (comp.dim() < 1) throw DataError("gmm_component_entropy: empty mean");
  Eigen::MatrixXd cov = to_eigen_cov(comp);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw NumericError(
        "gmm_component_entropy: covariance is not positive-definite");
  }
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double dim = double(comp.dim());
  return 0.5 * (dim * std::log(2.0 * std::numbers::pi * std::numbers::e) +
                log_det);
}

GmmReport fit_gmm(const std::vector<std::vector<double>>& x, int components,
                  double tol, int max_iter, std::uint64_t seed) {
  if (components < 1) throw DataError("fit_gmm: need at least one component");
  if (x.empty() || x[0].empty()) throw DataError("fit_gmm: empty sample set");
  const std::size_t dim = x[0].size();
  if (x.size() < 10 * static_cast<std::size_t>(components) * dim) {
    throw DataError("fit_gmm: need at least 10 * components * dim samples");
  }

  const Eigen::MatrixXd data = to_matrix(x);
  const Eigen::Index n = data.cols();
  const Eigen::Index k = data.rows();
  const Eigen::MatrixXd fallback_cov = global_covariance(data);

  // Initialization: Euclidean k-means, cluster moments as starting point.
  Rng rng(seed);
  const auto clusters = detail::kmeans(x, components,
                                       detail::KmeansMetric::kEuclidean,
                                       /*restarts=*/10, rng);
  std::vector<Component> comps(components);
  std::vector<double> weights(components);
  {
    std::vector<Eigen::Index> counts(components, 0);
    for (Eigen::Index i = 0; i < n; ++i) ++counts[clusters.assignment[i]];
    for (int c = 0; c < components; ++c) {
      comps[c].mean = Eigen::VectorXd::Zero(k);
      comps[c].cov = Eigen::MatrixXd::Zero(k, k);
      weights[c] = std::max(double(counts[c]) / double(n), kWeightFloor);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      comps[clusters.assignment[i]].mean += data.col(i);
    }
    for (int c = 0; c < components; ++c) {
      if (counts[c] > 0) comps[c].mean /= double(counts[c]);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = clusters.assignment[i];
      const Eigen::VectorXd diff = data.col(i) - comps[c].mean;
      comps[c].cov += diff * diff.transpose();
    }
    for (int c = 0; c < components; ++c) {
      if (counts[c] > static_cast<Eigen::Index>(dim)) {
        comps[c].cov /= double(counts[c]);
        regularize(&comps[c].cov);
      } else {
        comps[c].cov = fallback_cov;
      }
      if (!comps[c].factorize()) {
        comps[c].cov = fallback_cov;
        comps[c].factorize();
      }
    }
    double total = 0.0;
    for (double w : weights) total += w;
    for (double& w : weights) w /= total;
  }

  GmmReport report;
  report.seed = seed;

  Eigen::MatrixXd resp(n, components);
  Eigen::MatrixXd centered(k, n);   // reused across components
  Eigen::MatrixXd weighted(k, n);
  const double log_2pi_term = double(k) * std::log(2.0 * std::numbers::pi);
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= max_iter; ++iter) {
    // E-step in log space: one triangular solve per component covers all
    // samples at once.
    for (int c = 0; c < components; ++c) {
      centered = data.colwise() - comps[c].mean;
      comps[c].llt.matrixL().solveInPlace(centered);
      const double base = -0.5 * (log_2pi_term + comps[c].log_det) +
                          std::log(weights[c]);
      resp.col(c) =
          (base - 0.5 * centered.colwise().squaredNorm().array())
              .transpose();
    }
    const Eigen::VectorXd row_max = resp.rowwise().maxCoeff();
    resp.colwise() -= row_max;
    resp = resp.array().exp();
    resp = (resp.array() < kPosteriorFloor).select(0.0, resp);
    const Eigen::VectorXd row_sum = resp.rowwise().sum();
    const double ll =
        (row_max.array() + row_sum.array().log()).mean();
    resp.array().colwise() /= row_sum.array();

    if (!std::isfinite(ll)) break;  // keep the last valid model
    report.log_likelihood_trace.push_back(ll);
    report.iterations = iter;

    // M-step.
    const Eigen::VectorXd mass = resp.colwise().sum();
    for (int c = 0; c < components; ++c) {
      weights[c] = mass(c) / double(n);
      if (weights[c] < kWeightFloor) {
        // Degenerate component: re-seed at the worst-explained sample.
        Eigen::Index worst = 0;
        resp.rowwise().maxCoeff().minCoeff(&worst);
        comps[c].mean = data.col(worst);
        comps[c].cov = fallback_cov;
        comps[c].factorize();
        weights[c] = 1.0 / double(n);
        continue;
      }
      comps[c].mean.noalias() = (data * resp.col(c)) / mass(c);
      centered = data.colwise() - comps[c].mean;
      weighted = centered.array().rowwise() * resp.col(c).transpose().array();
      comps[c].cov.noalias() = (weighted * centered.transpose()) / mass(c);
      regularize(&comps[c].cov);
      if (!comps[c].factorize()) {
        Eigen::Index worst = 0;
        resp.rowwise().maxCoeff().minCoeff(&worst);
        comps[c].mean = data.col(worst);
        comps[c].cov = fallback_cov;
        comps[c].factorize();
        weights[c] = 1.0 / double(n);
      }
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
    auto& out = report.final_model.components[c];
    out.mean.assign(comps[c].mean.data(), comps[c].mean.data() + k);
    out.covariance.assign(dim, std::vector<double>(dim));
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) {
        out.covariance[i][j] = comps[c].cov(i, j);
      }
    }
  }
  return report;
}

}  // namespace vvq
