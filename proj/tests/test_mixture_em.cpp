#include "vvq/mixture_em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "vvq/errors.hpp"
#include "vvq/rng.hpp"
#include "vvq/vmf.hpp"

namespace {

vvq::SphereVector axis_vector(int dim, int axis) {
  vvq::SphereVector x;
  x.values.assign(dim, 0.0);
  x.values[axis] = 1.0;
  return x;
}

double angle_between(const std::vector<double>& a,
                     const std::vector<double>& b) {
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return std::acos(std::clamp(dot, -1.0, 1.0));
}

// Draws from a mixture by splitting the sample budget according to the
// weights, keeping per-component ground truth exact.
std::vector<vvq::SphereVector> sample_mixture(const vvq::VmfMixture& model,
                                              int n, vvq::Rng& rng) {
  std::vector<vvq::SphereVector> out;
  out.reserve(n);
  for (int i = 0; i < model.size(); ++i) {
    const int share = (i + 1 == model.size())
                          ? n - static_cast<int>(out.size())
                          : static_cast<int>(std::lround(n * model.weights[i]));
    auto chunk = vvq::sample_vmf(model.components[i], share, rng);
    out.insert(out.end(), chunk.begin(), chunk.end());
  }
  return out;
}

vvq::VmfMixture two_axis_mixture(int dim, double lambda) {
  vvq::VmfMixture truth;
  truth.weights = {0.5, 0.5};
  truth.components.resize(2);
  truth.components[0].mu = axis_vector(dim, 0).values;
  truth.components[0].lambda = lambda;
  truth.components[1].mu = axis_vector(dim, 1).values;
  truth.components[1].lambda = lambda;
  return truth;
}

}  // namespace

TEST_CASE("mixture validation enforces weights and component consistency") {
  vvq::VmfMixture m = two_axis_mixture(5, 10.0);
  CHECK_NOTHROW(vvq::validate_mixture(m));

  m.weights = {0.6, 0.6};
  CHECK_THROWS_AS(vvq::validate_mixture(m), vvq::DataError);

  m = two_axis_mixture(5, 10.0);
  m.weights = {1.0, 0.0};
  CHECK_THROWS_AS(vvq::validate_mixture(m), vvq::DataError);

  m = two_axis_mixture(5, 10.0);
  m.components[1].mu = axis_vector(7, 1).values;
  CHECK_THROWS_AS(vvq::validate_mixture(m), vvq::DataError);

  m = two_axis_mixture(5, 10.0);
  m.weights.pop_back();
  CHECK_THROWS_AS(vvq::validate_mixture(m), vvq::DataError);
}

TEST_CASE("posterior memberships are trivial for one component") {
  vvq::VmfMixture m;
  m.weights = {1.0};
  m.components.resize(1);
  m.components[0].mu = axis_vector(7, 0).values;
  m.components[0].lambda = 25.0;

  const auto x = vvq::sample_vmf(m.components[0], 200, 99u);
  const auto resp = vvq::e_step(x, m);
  REQUIRE(resp.rows == 200);
  REQUIRE(resp.cols == 1);
  for (std::size_t s = 0; s < resp.rows; ++s) CHECK(resp.at(s, 0) == 1.0);
}

TEST_CASE("identical components with equal weights split responsibility "
          "evenly") {
  vvq::VmfMixture m;
  m.weights = {0.5, 0.5};
  m.components.resize(2);
  m.components[0].mu = axis_vector(9, 3).values;
  m.components[0].lambda = 40.0;
  m.components[1] = m.components[0];

  const auto x = vvq::sample_vmf(m.components[0], 100, 7u);
  const auto resp = vvq::e_step(x, m);
  for (std::size_t s = 0; s < resp.rows; ++s) {
    CHECK(resp.at(s, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(resp.at(s, 1) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("posteriors match a direct density-ratio computation") {
  const int dim = 9;
  vvq::VmfMixture m;
  m.weights = {0.5, 0.5};
  m.components.resize(2);
  m.components[0].mu = axis_vector(dim, 0).values;
  m.components[0].lambda = 200.0;
  m.components[1].mu = axis_vector(dim, 1).values;
  m.components[1].lambda = 1.0;

  vvq::Rng rng(2024);
  auto x = vvq::sample_vmf(m.components[1], 50, rng);
  x.push_back(axis_vector(dim, 0));  // exactly at the concentrated mode
  const auto resp = vvq::e_step(x, m);

  for (std::size_t s = 0; s < x.size(); ++s) {
    const double l0 = vvq::log_pdf(x[s], m.components[0]);
    const double l1 = vvq::log_pdf(x[s], m.components[1]);
    const double expected = 1.0 / (1.0 + std::exp(l1 - l0));
    CHECK(resp.at(s, 0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(resp.at(s, 0) + resp.at(s, 1) == doctest::Approx(1.0).epsilon(1e-12));
  }
  // The sample placed on the concentrated mode is claimed almost entirely;
  // the density ratio there is exp(l1 - l0) ~ 3e-8.
  CHECK(resp.at(x.size() - 1, 0) > 1.0 - 1e-6);
}

TEST_CASE("a non-finite sample is reported by index") {
  vvq::VmfMixture m = two_axis_mixture(5, 10.0);
  auto x = vvq::sample_vmf(m.components[0], 4, 3u);
  x[2].values[0] = std::numeric_limits<double>::quiet_NaN();
  try {
    vvq::e_step(x, m);
    FAIL("expected a NumericError");
  } catch (const vvq::NumericError& err) {
    CHECK(std::string(err.what()).find("sample 2") != std::string::npos);
  }
}

TEST_CASE("concentration formula hits known limits") {
  CHECK(vvq::kappa_banerjee(17, 0.0) == 0.0);
  // Matches the algebra (r*d - r^3)/(1 - r^2) at a hand-computed point.
  const double r = 0.5;
  CHECK(vvq::kappa_banerjee(5, r) ==
        doctest::Approx((0.5 * 5 - 0.125) / 0.75).epsilon(1e-15));
  // The sphere-dimension variant replaces d by d-1.
  CHECK(vvq::kappa_banerjee(5, r, vvq::DimConvention::kLiteral) ==
        doctest::Approx((0.5 * 4 - 0.125) / 0.75).epsilon(1e-15));
  CHECK_THROWS_AS(vvq::kappa_banerjee(17, 1.0), vvq::DataError);
  CHECK_THROWS_AS(vvq::kappa_banerjee(17, -0.1), vvq::DataError);
}

TEST_CASE("exact concentration solve inverts the resultant curve") {
  CHECK(vvq::kappa_ml_oracle(17, 0.0) == 0.0);

  // d=3 closed form: A_3(lambda) = coth(lambda) - 1/lambda; at lambda = 2
  // the resultant is 0.537314...
  const double r2 = 1.0 / std::tanh(2.0) - 0.5;
  CHECK(vvq::kappa_ml_oracle(3, r2) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(vvq::kappa_ml_oracle(3, 0.53731) == doctest::Approx(2.0).epsilon(1e-3));

  for (int dim : {3, 5, 17}) {
    for (double r : {0.05, 0.2, 0.5, 0.8, 0.95, 0.999}) {
      const double lambda = vvq::kappa_ml_oracle(dim, r);
      CHECK(std::abs(vvq::mean_resultant(dim, lambda) - r) < 1e-9);
    }
  }

  // Extreme resultant lengths still bracket and solve.
  const double big = vvq::kappa_ml_oracle(17, 1.0 - 1e-6);
  CHECK(vvq::mean_resultant(17, big) == doctest::Approx(1.0 - 1e-6));
}

TEST_CASE("closed-form concentration stays within 5% of the exact solve") {
  double worst = 0.0;
  for (double r = 0.10; r <= 0.95 + 1e-12; r += 0.01) {
    const double approx = vvq::kappa_banerjee(17, r);
    const double exact = vvq::kappa_ml_oracle(17, r);
    worst = std::max(worst, std::abs(approx - exact) / exact);
  }
  CHECK(worst <= 0.05);
  MESSAGE("max relative concentration error on r in [0.10, 0.95]: " << worst);
}

TEST_CASE("maximization step closes the loop on synthetic resultants") {
  // Build responsibilities that put all mass on one component and check the
  // estimate chain r = A_d(lambda*) -> lambda-hat stays within 5%.
  for (double lambda_star : {1.0, 10.0, 100.0}) {
    const double r = vvq::mean_resultant(17, lambda_star);
    const double lambda_hat = vvq::kappa_banerjee(17, r);
    CHECK(std::abs(lambda_hat - lambda_star) / lambda_star <= 0.05);
  }
}

TEST_CASE("single-component maximization recovers the normalized mean") {
  vvq::Rng rng(515151);
  vvq::VmfComponent truth;
  truth.mu = axis_vector(7, 2).values;
  truth.lambda = 30.0;
  const auto x = vvq::sample_vmf(truth, 500, rng);

  vvq::Responsibilities resp;
  resp.rows = x.size();
  resp.cols = 1;
  resp.values.assign(x.size(), 1.0);
  const auto model = vvq::m_step(x, resp);

  REQUIRE(model.size() == 1);
  CHECK(model.weights[0] == 1.0);
  std::vector<double> mean(7, 0.0);
  for (const auto& v : x) {
    for (int j = 0; j < 7; ++j) mean[j] += v.values[j];
  }
  double norm = 0.0;
  for (double v : mean) norm += v * v;
  norm = std::sqrt(norm);
  for (int j = 0; j < 7; ++j) {
    CHECK(model.components[0].mu[j] ==
          doctest::Approx(mean[j] / norm).epsilon(1e-12));
  }
}

TEST_CASE("fit recovers a single generator") {
  vvq::VmfComponent truth;
  truth.mu = axis_vector(17, 5).values;
  truth.lambda = 50.0;
  const auto x = vvq::sample_vmf(truth, 50000, 31u);

  const auto report = vvq::fit_vmm(x, 1);
  CHECK(report.converged);
  REQUIRE(report.final_model.size() == 1);
  const auto& fit = report.final_model.components[0];
  CHECK(angle_between(fit.mu, truth.mu) < 0.02);
  CHECK(std::abs(fit.lambda - truth.lambda) / truth.lambda < 0.05);

  // Trace is monotone with the allowed slack.
  const auto& trace = report.log_likelihood_trace;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    CHECK(trace[i] >= trace[i - 1] - 1e-8);
  }
}

TEST_CASE("fit separates two distant components") {
  const auto truth = two_axis_mixture(17, 100.0);
  vvq::Rng rng(808);
  const auto x = sample_mixture(truth, 20000, rng);

  const auto report = vvq::fit_vmm(x, 2, vvq::VmmInit::kSphericalKmeans,
                                   1e-6, 500, 17u);
  CHECK(report.converged);
  const auto& model = report.final_model;
  REQUIRE(model.size() == 2);

  // Match components to ground truth by direction.
  const int first = angle_between(model.components[0].mu,
                                  truth.components[0].mu) < 1.0
                        ? 0
                        : 1;
  const int second = 1 - first;
  CHECK(angle_between(model.components[first].mu, truth.components[0].mu) <
        0.05);
  CHECK(angle_between(model.components[second].mu, truth.components[1].mu) <
        0.05);
  CHECK(std::abs(model.weights[first] - 0.5) < 0.02);
  CHECK(std::abs(model.weights[second] - 0.5) < 0.02);

  double weight_total = 0.0;
  for (double w : model.weights) weight_total += w;
  CHECK(weight_total == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& comp : model.components) {
    double norm = 0.0;
    for (double v : comp.mu) norm += v * v;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));
  }

  const auto& trace = report.log_likelihood_trace;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    CHECK(trace[i] >= trace[i - 1] - 1e-8);
  }
}

TEST_CASE("infinite tolerance performs exactly one iteration") {
  const auto truth = two_axis_mixture(5, 20.0);
  vvq::Rng rng(5);
  const auto x = sample_mixture(truth, 500, rng);
  const auto report =
      vvq::fit_vmm(x, 2, vvq::VmmInit::kSphericalKmeans,
                   std::numeric_limits<double>::infinity(), 500, 1u);
  CHECK(report.iterations == 1);
  CHECK(report.converged);
  CHECK(report.log_likelihood_trace.size() == 1);
}

TEST_CASE("fits are deterministic for a fixed seed") {
  const auto truth = two_axis_mixture(7, 30.0);
  vvq::Rng rng(12);
  const auto x = sample_mixture(truth, 2000, rng);

  const auto a = vvq::fit_vmm(x, 2, vvq::VmmInit::kSphericalKmeans, 1e-6,
                              500, 42u);
  const auto b = vvq::fit_vmm(x, 2, vvq::VmmInit::kSphericalKmeans, 1e-6,
                              500, 42u);
  REQUIRE(a.log_likelihood_trace.size() == b.log_likelihood_trace.size());
  for (std::size_t i = 0; i < a.log_likelihood_trace.size(); ++i) {
    CHECK(a.log_likelihood_trace[i] == b.log_likelihood_trace[i]);
  }
  for (int c = 0; c < 2; ++c) {
    CHECK(a.final_model.weights[c] == b.final_model.weights[c]);
    CHECK(a.final_model.components[c].lambda ==
          b.final_model.components[c].lambda);
    for (int j = 0; j < 7; ++j) {
      CHECK(a.final_model.components[c].mu[j] ==
            b.final_model.components[c].mu[j]);
    }
  }
}

TEST_CASE("permuting the starting components permutes the result") {
  const auto truth = two_axis_mixture(7, 40.0);
  vvq::Rng rng(77);
  const auto x = sample_mixture(truth, 2000, rng);

  vvq::VmfMixture start;
  start.weights = {0.3, 0.7};
  start.components.resize(2);
  start.components[0].mu = axis_vector(7, 0).values;
  start.components[0].lambda = 5.0;
  start.components[1].mu = axis_vector(7, 1).values;
  start.components[1].lambda = 8.0;

  vvq::VmfMixture swapped;
  swapped.weights = {0.7, 0.3};
  swapped.components = {start.components[1], start.components[0]};

  const auto a = vvq::fit_vmm(x, start, 1e-8, 200);
  const auto b = vvq::fit_vmm(x, swapped, 1e-8, 200);
  REQUIRE(a.final_model.size() == 2);
  REQUIRE(b.final_model.size() == 2);
  for (int c = 0; c < 2; ++c) {
    CHECK(a.final_model.weights[c] ==
          doctest::Approx(b.final_model.weights[1 - c]).epsilon(1e-9));
    CHECK(a.final_model.components[c].lambda ==
          doctest::Approx(b.final_model.components[1 - c].lambda)
              .epsilon(1e-9));
    for (int j = 0; j < 7; ++j) {
      CHECK(a.final_model.components[c].mu[j] ==
            doctest::Approx(b.final_model.components[1 - c].mu[j])
                .scale(1.0)
                .epsilon(1e-9));
    }
  }
}

TEST_CASE("sample floor of ten per component is enforced") {
  const auto truth = two_axis_mixture(5, 20.0);
  vvq::Rng rng(3);
  const auto x = sample_mixture(truth, 19, rng);
  CHECK_THROWS_AS(vvq::fit_vmm(x, 2), vvq::DataError);
  CHECK_NOTHROW(vvq::fit_vmm(sample_mixture(truth, 20, rng), 2));
}

TEST_CASE("responsibility rows sum to one on a live fit") {
  const auto truth = two_axis_mixture(9, 15.0);
  vvq::Rng rng(44);
  const auto x = sample_mixture(truth, 300, rng);
  const auto report = vvq::fit_vmm(x, 2, vvq::VmmInit::kRandomPoints, 1e-6,
                                   50, 9u);
  const auto resp = vvq::e_step(x, report.final_model);
  for (std::size_t s = 0; s < resp.rows; ++s) {
    double total = 0.0;
    for (std::size_t i = 0; i < resp.cols; ++i) {
      const double p = resp.at(s, i);
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
      total += p;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  }
}
