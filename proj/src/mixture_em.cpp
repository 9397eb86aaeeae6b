#include "vvq/mixture_em.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kmeans_impl.hpp"
#include "vvq/errors.hpp"
#include "vvq/transforms.hpp"

namespace vvq {

namespace {

constexpr double kResultantClamp = 1.0 - 1e-9;
constexpr double kWeightFloor = 1e-8;

// Posteriors below the smallest normal double are statistically zero, and
// leaving them sub-normal makes the M-step matrix products take the slow
// micro-coded float paths; flush them to exact zeros instead.
constexpr double kPosteriorFloor = std::numeric_limits<double>::min();

// Samples packed one per column so the E- and M-steps run as matrix
// products instead of per-sample loops.
Eigen::MatrixXd pack_samples(const std::vector<SphereVector>& x) {
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  const Eigen::Index dim = static_cast<Eigen::Index>(x[0].values.size());
  Eigen::MatrixXd out(dim, n);
  for (Eigen::Index s = 0; s < n; ++s) {
    out.col(s) = Eigen::Map<const Eigen::VectorXd>(x[s].values.data(), dim);
  }
  return out;
}

// Log-space E-step on packed data: fills the component-by-sample posterior
// matrix and returns the mean log-evidence. The per-component density is
// ln w_i + ln C_i + lambda_i mu_i'x, so one GEMM covers all samples.
double batched_responsibilities(const Eigen::MatrixXd& data,
                                const VmfMixture& model,
                                Eigen::MatrixXd* resp) {
  const Eigen::Index n = data.cols();
  const Eigen::Index dim = data.rows();
  const Eigen::Index count = static_cast<Eigen::Index>(model.weights.size());

  Eigen::MatrixXd axes(dim, count);
  Eigen::VectorXd shift(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const auto& comp = model.components[i];
    axes.col(i) =
        comp.lambda *
        Eigen::Map<const Eigen::VectorXd>(comp.mu.data(), dim);
    shift(i) = std::log(model.weights[i]) +
               log_norm_const(static_cast<int>(dim), comp.lambda);
  }

  resp->resize(count, n);
  resp->noalias() = axes.transpose() * data;
  resp->colwise() += shift;

  const Eigen::RowVectorXd top = resp->colwise().maxCoeff();
  if (!top.allFinite()) {
    for (Eigen::Index s = 0; s < n; ++s) {
      if (!std::isfinite(top(s))) {
        throw NumericError("e_step: degenerate responsibilities at sample " +
                           std::to_string(s));
      }
    }
  }
  resp->rowwise() -= top;
  *resp = resp->array().exp();
  *resp = (resp->array() < kPosteriorFloor).select(0.0, *resp);
  const Eigen::RowVectorXd denom = resp->colwise().sum();
  if (!denom.allFinite() || !(denom.array() > 0.0).all()) {
    for (Eigen::Index s = 0; s < n; ++s) {
      if (!(denom(s) > 0.0) || !std::isfinite(denom(s))) {
        throw NumericError("e_step: degenerate responsibilities at sample " +
                           std::to_string(s));
      }
    }
  }
  resp->array().rowwise() /= denom.array();
  return (top.array() + denom.array().log()).mean();
}

// Index of the sample the model explains worst: lowest maximum posterior
// across components (columns of the packed posterior matrix).
Eigen::Index worst_explained_sample(const Eigen::MatrixXd& resp) {
  Eigen::Index arg = 0;
  resp.colwise().maxCoeff().minCoeff(&arg);
  return arg;
}

// Global resultant length of the packed data, for re-seeded concentrations.
double global_resultant(const Eigen::MatrixXd& data) {
  return std::min(data.rowwise().sum().norm() / double(data.cols()),
                  kResultantClamp);
}

// Maximization update on packed data; same formulas and degenerate-component
// policy as the public m_step.
VmfMixture batched_m_step(const Eigen::MatrixXd& data,
                          const Eigen::MatrixXd& resp,
                          DimConvention convention) {
  const Eigen::Index n = data.cols();
  const Eigen::Index dim = data.rows();
  const Eigen::Index count = resp.rows();

  const Eigen::VectorXd mass = resp.rowwise().sum();
  Eigen::MatrixXd resultant(dim, count);
  resultant.noalias() = data * resp.transpose();

  VmfMixture model;
  model.weights.resize(count);
  model.components.resize(count);
  bool any_reset = false;
  for (Eigen::Index i = 0; i < count; ++i) {
    model.weights[i] = mass(i) / double(n);
    const double norm = resultant.col(i).norm();

    auto& comp = model.components[i];
    if (model.weights[i] < kWeightFloor || norm == 0.0) {
      // Degenerate component: re-seed at the worst-explained sample with a
      // concentration from the global resultant, and give it a small but
      // workable share of the mass.
      const Eigen::VectorXd seed_point = data.col(worst_explained_sample(resp));
      comp.mu.assign(seed_point.data(), seed_point.data() + dim);
      comp.lambda = kappa_banerjee(static_cast<int>(dim),
                                   global_resultant(data), convention);
      model.weights[i] = 1.0 / double(n);
      any_reset = true;
      continue;
    }
    const Eigen::VectorXd mu = resultant.col(i) / norm;
    comp.mu.assign(mu.data(), mu.data() + dim);
    const double r_bar = std::min(norm / mass(i), kResultantClamp);
    comp.lambda = kappa_banerjee(static_cast<int>(dim), r_bar, convention);
  }
  if (any_reset) {
    double total = 0.0;
    for (double w : model.weights) total += w;
    for (double& w : model.weights) w /= total;
  }
  return model;
}

VmfMixture init_spherical_kmeans(const std::vector<SphereVector>& x,
                                 const Eigen::MatrixXd& data, int components,
                                 Rng& rng) {
  std::vector<std::vector<double>> rows(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) rows[i] = x[i].values;
  const auto clusters = detail::kmeans(
      rows, components, detail::KmeansMetric::kCosine, /*restarts=*/10, rng);

  const std::size_t dim = rows[0].size();
  VmfMixture model;
  model.weights.assign(components, 0.0);
  model.components.resize(components);
  std::vector<std::vector<double>> sums(components,
                                        std::vector<double>(dim, 0.0));
  std::vector<std::size_t> counts(components, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int c = clusters.assignment[i];
    for (std::size_t j = 0; j < dim; ++j) sums[c][j] += rows[i][j];
    ++counts[c];
  }
  const double fallback_r = global_resultant(data);
  for (int c = 0; c < components; ++c) {
    model.weights[c] =
        std::max(double(counts[c]) / double(rows.size()), kWeightFloor);
    double norm = 0.0;
    for (double s : sums[c]) norm += s * s;
    norm = std::sqrt(norm);
    auto& comp = model.components[c];
    if (counts[c] == 0 || norm == 0.0) {
      comp.mu = clusters.centroids[c];
      comp.lambda = kappa_banerjee(static_cast<int>(dim), fallback_r);
    } else {
      comp.mu.resize(dim);
      for (std::size_t j = 0; j < dim; ++j) comp.mu[j] = sums[c][j] / norm;
      const double r_bar =
          std::min(norm / double(counts[c]), kResultantClamp);
      comp.lambda = kappa_banerjee(static_cast<int>(dim), r_bar);
    }
  }
  double total = 0.0;
  for (double w : model.weights) total += w;
  for (double& w : model.weights) w /= total;
  return model;
}

VmfMixture init_random_points(const std::vector<SphereVector>& x,
                              const Eigen::MatrixXd& data, int components,
                              Rng& rng) {
  std::vector<int> idx(x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  rng.shuffle(idx);

  const int dim = static_cast<int>(x[0].values.size());
  const double lambda = kappa_banerjee(dim, global_resultant(data));
  VmfMixture model;
  model.weights.assign(components, 1.0 / components);
  model.components.resize(components);
  for (int c = 0; c < components; ++c) {
    model.components[c].mu = x[idx[c]].values;
    model.components[c].lambda = lambda;
  }
  return model;
}

EmReport run_em(const Eigen::MatrixXd& data, VmfMixture model, double tol,
                int max_iter, std::uint64_t seed) {
  EmReport report;
  report.seed = seed;

  double prev_ll = -std::numeric_limits<double>::infinity();
  Eigen::MatrixXd resp;
  for (int iter = 1; iter <= max_iter; ++iter) {
    const double ll = batched_responsibilities(data, model, &resp);
    if (!std::isfinite(ll)) break;  // keep the last valid model
    report.log_likelihood_trace.push_back(ll);
    report.iterations = iter;
    model = batched_m_step(data, resp, DimConvention::kAmbient);
    if (std::isinf(tol) && tol > 0.0) {
      report.converged = true;
      break;
    }
    if (std::abs(ll - prev_ll) < tol) {
      report.converged = true;
      break;
    }
    prev_ll = ll;
  }
  report.final_model = std::move(model);
  return report;
}

}  // namespace

void validate_mixture(const VmfMixture& mixture) {
  if (mixture.weights.empty() ||
      mixture.weights.size() != mixture.components.size()) {
    throw DataError("validate_mixture: weights/components size mismatch");
  }
  double total = 0.0;
  for (double w : mixture.weights) {
    if (!(w > 0.0)) throw DataError("validate_mixture: non-positive weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DataError("validate_mixture: weights must sum to 1");
  }
  const int dim = mixture.components[0].dim();
  for (const auto& comp : mixture.components) {
    if (comp.dim() != dim) {
      throw DataError("validate_mixture: mixed component dimensions");
    }
    validate_component(comp);
  }
}

Responsibilities e_step(const std::vector<SphereVector>& x,
                        const VmfMixture& model) {
  validate_mixture(model);
  if (x.empty()) throw DataError("e_step: empty sample set");
  for (const auto& v : x) {
    if (static_cast<int>(v.values.size()) != model.dim()) {
      throw DataError("e_step: sample dimension does not match the model");
    }
  }
  Eigen::MatrixXd packed;
  batched_responsibilities(pack_samples(x), model, &packed);
  Responsibilities resp;
  resp.rows = x.size();
  resp.cols = model.weights.size();
  resp.values.resize(resp.rows * resp.cols);
  for (std::size_t s = 0; s < resp.rows; ++s) {
    for (std::size_t i = 0; i < resp.cols; ++i) {
      resp.at(s, i) = packed(static_cast<Eigen::Index>(i),
                             static_cast<Eigen::Index>(s));
    }
  }
  return resp;
}

double kappa_banerjee(int dim, double r_bar, DimConvention convention) {
  if (dim < 3) throw DataError("kappa_banerjee: dimension must be >= 3");
  if (!(r_bar >= 0.0) || r_bar > kResultantClamp) {
    throw DataError("kappa_banerjee: r_bar must be in [0, 1-1e-9]");
  }
  const double d_term =
      convention == DimConvention::kAmbient ? double(dim) : double(dim - 1);
  return (r_bar * d_term - r_bar * r_bar * r_bar) /
         (1.0 - r_bar * r_bar);
}

double kappa_ml_oracle(int dim, double r_bar) {
  if (dim < 3) throw DataError("kappa_ml_oracle: dimension must be >= 3");
  if (!(r_bar >= 0.0) || r_bar > kResultantClamp) {
    throw DataError("kappa_ml_oracle: r_bar must be in [0, 1-1e-9]");
  }
  if (r_bar == 0.0) return 0.0;

  double hi = std::max(1.0, double(dim - 1) / (1.0 - r_bar));
  while (mean_resultant(dim, hi) < r_bar) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 400; ++it) {
    if (hi - lo <= 1e-10 || hi - lo <= 1e-15 * hi) break;
    const double mid = 0.5 * (lo + hi);
    if (mean_resultant(dim, mid) < r_bar) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

VmfMixture m_step(const std::vector<SphereVector>& x,
                  const Responsibilities& resp, DimConvention convention) {
  if (x.size() != resp.rows || resp.cols == 0) {
    throw DataError("m_step: responsibilities do not match the sample set");
  }
  using RowMajor =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> by_sample(
      resp.values.data(), static_cast<Eigen::Index>(resp.rows),
      static_cast<Eigen::Index>(resp.cols));
  return batched_m_step(pack_samples(x), by_sample.transpose(), convention);
}

EmReport fit_vmm(const std::vector<SphereVector>& x, int components,
                 VmmInit init, double tol, int max_iter, std::uint64_t seed) {
  if (components < 1) throw DataError("fit_vmm: need at least one component");
  if (x.size() < 10 * static_cast<std::size_t>(components)) {
    throw DataError("fit_vmm: need at least 10 samples per component");
  }
  for (const auto& v : x) validate_sphere(v);

  Rng rng(seed);
  const Eigen::MatrixXd data = pack_samples(x);
  VmfMixture initial = (init == VmmInit::kSphericalKmeans)
                           ? init_spherical_kmeans(x, data, components, rng)
                           : init_random_points(x, data, components, rng);
  return run_em(data, std::move(initial), tol, max_iter, seed);
}

EmReport fit_vmm(const std::vector<SphereVector>& x,
                 const VmfMixture& initial, double tol, int max_iter,
                 std::uint64_t seed) {
  validate_mixture(initial);
  if (x.size() < 10 * initial.weights.size()) {
    throw DataError("fit_vmm: need at least 10 samples per component");
  }
  for (const auto& v : x) validate_sphere(v);
  return run_em(pack_samples(x), initial, tol, max_iter, seed);
}

}  // namespace vvq
