#include "vvq/rate_allocation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include "vvq/errors.hpp"
#include "vvq/rng.hpp"
#include "vvq/transforms.hpp"

namespace vvq {

namespace {

void check_weights_entropies(const std::vector<double>& entropies,
                             const std::vector<double>& weights) {
  if (entropies.empty() || entropies.size() != weights.size()) {
    throw DataError("rate allocation: entropies/weights size mismatch");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) {
      throw DataError("rate allocation: weights must be positive");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-10) {
    throw DataError("rate allocation: weights must sum to 1");
  }
  for (double h : entropies) {
    if (!std::isfinite(h)) {
      throw DataError("rate allocation: entropies must be finite");
    }
  }
}

double weighted_entropy(const std::vector<double>& entropies,
                        const std::vector<double>& weights) {
  double acc = 0.0;
  for (std::size_t i = 0; i < entropies.size(); ++i) {
    acc += weights[i] * entropies[i];
  }
  return acc;
}

}  // namespace

std::string family_name(ModelFamily family) {
  switch (family) {
    case ModelFamily::kVmm:
      return "vmm";
    case ModelFamily::kGmm:
      return "gmm";
    case ModelFamily::kDmm:
      return "dmm";
  }
  throw DataError("family_name: unknown family");
}

MixtureSummary summarize(const VmfMixture& model, EntropyForm form) {
  validate_mixture(model);
  MixtureSummary out;
  out.family = ModelFamily::kVmm;
  out.weights = model.weights;
  out.entropies.reserve(model.size());
  for (const auto& comp : model.components) {
    out.entropies.push_back(component_entropy(comp.dim(), comp.lambda, form));
  }
  return out;
}

MixtureSummary summarize(const GaussMixture& model) {
  MixtureSummary out;
  out.family = ModelFamily::kGmm;
  out.weights = model.weights;
  out.entropies.reserve(model.size());
  for (const auto& comp : model.components) {
    out.entropies.push_back(gmm_component_entropy(comp));
  }
  return out;
}

MixtureSummary summarize(const DirichletMixture& model) {
  MixtureSummary out;
  out.family = ModelFamily::kDmm;
  out.weights = model.weights;
  out.entropies.reserve(model.size());
  for (const auto& comp : model.components) {
    out.entropies.push_back(dirichlet_component_entropy(comp));
  }
  return out;
}

double index_rate(int component_count) {
  if (component_count < 1) {
    throw DataError("index_rate: need at least one component");
  }
  return std::log(double(component_count));
}

double c_constant(const RateConfig& cfg) {
  if (!(cfg.r_exponent > 0.0)) {
    throw DataError("c_constant: r_exponent must be positive");
  }
  if (cfg.dimension < 1) {
    throw DataError("c_constant: dimension must be positive");
  }
  const double k = double(cfg.dimension);
  switch (cfg.c_mode) {
    case CMode::kUnity:
      return 1.0;
    case CMode::kSphereBound:
      return std::exp((2.0 / k) * std::lgamma(k / 2.0 + 1.0)) /
             ((k + 2.0) * std::numbers::pi);
    case CMode::kZadorGaussian:
      return 1.0 / (2.0 * std::numbers::pi * std::numbers::e);
  }
  throw DataError("c_constant: unknown C mode");
}

BitAllocation allocate_rates(const std::vector<double>& entropies,
                             const std::vector<double>& weights,
                             double total_rate_nats) {
  check_weights_entropies(entropies, weights);
  if (!std::isfinite(total_rate_nats)) {
    throw DataError("allocate_rates: total rate must be finite");
  }

  BitAllocation out;
  out.total_rate = total_rate_nats;
  out.index_rate = index_rate(static_cast<int>(entropies.size()));
  out.quantization_rate = total_rate_nats - out.index_rate;

  const double mean_h = weighted_entropy(entropies, weights);
  out.per_component_rates.resize(entropies.size());
  for (std::size_t i = 0; i < entropies.size(); ++i) {
    out.per_component_rates[i] =
        out.quantization_rate + entropies[i] - mean_h;
    if (out.per_component_rates[i] < 0.0) out.high_rate_valid = false;
  }
  return out;
}

double dr_point(double total_rate_nats,
                const std::vector<double>& entropies,
                const std::vector<double>& weights, const RateConfig& cfg) {
  check_weights_entropies(entropies, weights);
  const double mean_h = weighted_entropy(entropies, weights);
  const double beta = cfg.r_exponent / double(cfg.dimension);
  const double excess = total_rate_nats -
                        index_rate(static_cast<int>(entropies.size())) -
                        mean_h;
  return c_constant(cfg) * std::exp(-beta * excess);
}

DrCurve dr_curve(const MixtureSummary& model,
                 const std::vector<double>& rate_grid, const RateConfig& cfg,
                 double mean_sum_v) {
  check_weights_entropies(model.entropies, model.weights);
  if (rate_grid.empty()) throw DataError("dr_curve: empty rate grid");
  for (std::size_t i = 1; i < rate_grid.size(); ++i) {
    if (!(rate_grid[i] > rate_grid[i - 1])) {
      throw DataError("dr_curve: rate grid must be strictly increasing");
    }
  }

  const int K = cfg.dimension;
  const double to_v = x_to_v_factor(mean_sum_v, K);  // validates mean_sum_v
  const double to_s = v_to_s_factor(K);

  DrCurve curve;
  curve.family = model.family;
  curve.component_count = static_cast<int>(model.weights.size());
  curve.points.reserve(rate_grid.size());
  for (double grid_rate : rate_grid) {
    const double rate_nats = cfg.rate_unit == RateUnit::kBits
                                 ? grid_rate * std::numbers::ln2
                                 : grid_rate;
    const double native =
        dr_point(rate_nats, model.entropies, model.weights, cfg);

    DrPoint point;
    point.rate_bits = cfg.rate_unit == RateUnit::kBits
                          ? grid_rate
                          : grid_rate / std::numbers::ln2;
    switch (model.family) {
      case ModelFamily::kVmm:
        point.d_x = native;
        point.d_v = native * to_v;
        point.d_s = point.d_v * to_s;
        break;
      case ModelFamily::kDmm:
        point.d_v = native;
        point.d_x = native / to_v;
        point.d_s = native * to_s;
        break;
      case ModelFamily::kGmm:
        point.d_s = native;
        point.d_v = native / to_s;
        point.d_x = point.d_v / to_v;
        break;
    }
    point.valid =
        allocate_rates(model.entropies, model.weights, rate_nats)
            .high_rate_valid;
    curve.points.push_back(point);
  }
  return curve;
}

GapReport entropy_gap(const VmfMixture& model, int mc_samples,
                      std::uint64_t seed) {
  validate_mixture(model);
  if (mc_samples < 100000) {
    throw DataError("entropy_gap: need at least 1e5 Monte Carlo samples");
  }

  GapReport report;
  report.lhs = index_rate(model.size());
  for (int i = 0; i < model.size(); ++i) {
    report.lhs += model.weights[i] *
                  component_entropy(model.dim(), model.components[i].lambda,
                                    EntropyForm::kExact);
  }

  // Draw from the mixture: multinomial split of the budget, then batches.
  Rng rng(seed);
  std::vector<int> counts(model.size(), 0);
  for (int s = 0; s < mc_samples; ++s) {
    const double u = rng.uniform();
    double acc = 0.0;
    int pick = model.size() - 1;
    for (int i = 0; i < model.size(); ++i) {
      acc += model.weights[i];
      if (u < acc) {
        pick = i;
        break;
      }
    }
    ++counts[pick];
  }

  std::vector<double> log_weight(model.size());
  for (int i = 0; i < model.size(); ++i) {
    log_weight[i] = std::log(model.weights[i]);
  }

  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < model.size(); ++i) {
    const auto batch = sample_vmf(model.components[i], counts[i], rng);
    for (const auto& x : batch) {
      double top = -std::numeric_limits<double>::infinity();
      std::vector<double> terms(model.size());
      for (int j = 0; j < model.size(); ++j) {
        terms[j] = log_weight[j] + log_pdf(x, model.components[j]);
        top = std::max(top, terms[j]);
      }
      double denom = 0.0;
      for (double t : terms) denom += std::exp(t - top);
      const double neg_log_f = -(top + std::log(denom));
      sum += neg_log_f;
      sum_sq += neg_log_f * neg_log_f;
    }
  }
  const double n = double(mc_samples);
  report.mc_entropy = sum / n;
  const double variance =
      std::max(sum_sq / n - report.mc_entropy * report.mc_entropy, 0.0);
  report.std_error = std::sqrt(variance / n);
  report.gap = report.lhs - report.mc_entropy;
  return report;
}

void write_dr_csv(std::ostream& out, const std::vector<DrCurve>& curves) {
  out << "rate_bits,family,I,D_x,D_v,D_s,valid\n";
  char buf[64];
  const auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
  };
  for (const auto& curve : curves) {
    const std::string family = family_name(curve.family);
    for (const auto& point : curve.points) {
      out << fmt(point.rate_bits) << ',' << family << ','
          << curve.component_count << ',' << fmt(point.d_x) << ','
          << fmt(point.d_v) << ',' << fmt(point.d_s) << ','
          << (point.valid ? 1 : 0) << '\n';
    }
  }
}

}  // namespace vvq
