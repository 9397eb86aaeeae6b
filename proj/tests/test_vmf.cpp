#include "vvq/vmf.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "vvq/errors.hpp"
#include "vvq/rng.hpp"
#include "vvq/special_functions.hpp"

namespace {

// d = 3 closed forms: c_3(l) = l / (4 pi sinh l), A_3(l) = coth l - 1/l.
double log_c3(double lambda) {
  double log_sinh;
  if (lambda < 20.0) {
    log_sinh = std::log(std::sinh(lambda));
  } else {
    log_sinh = lambda - std::log(2.0) + std::log1p(-std::exp(-2.0 * lambda));
  }
  return std::log(lambda) - std::log(4.0 * M_PI) - log_sinh;
}

double a3(double lambda) { return 1.0 / std::tanh(lambda) - 1.0 / lambda; }

vvq::SphereVector axis_vector(int d, int axis) {
  vvq::SphereVector x;
  x.values.assign(d, 0.0);
  x.values[axis] = 1.0;
  return x;
}

// Independent Monte-Carlo estimate of ln integral_{S^{d-1}} e^{lambda mu'x} dS.
// The tangent directions integrate out exactly (area of S^{d-2}); the cosine
// integral J = int_{-1}^{1} e^{lambda t} (1-t^2)^{a-1} dt with a = (d-1)/2 is
// importance-sampled in s = lambda (1 - t) from a Gamma(a, theta) proposal
// whose mode matches the integrand, keeping weights near-constant for any
// concentration.
double mc_log_sphere_integral(int d, double lambda, int n, vvq::Rng& rng) {
  const double a = 0.5 * (d - 1);
  if (lambda <= 0.0) {
    return vvq::log_sphere_area(d);
  }
  double theta = 1.0;
  if (a > 1.0) {
    const double s_star =
        lambda + (a - 1.0) - std::sqrt(lambda * lambda + (a - 1.0) * (a - 1.0));
    theta = s_star / (a - 1.0);
  }
  double sum_w = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = theta * rng.gamma(a);
    if (s >= 2.0 * lambda) continue;  // t < -1: outside the domain
    const double log_w =
        -s * (1.0 - 1.0 / theta) + (a - 1.0) * std::log(2.0 - s / lambda);
    sum_w += std::exp(log_w);
  }
  const double log_mean_w = std::log(sum_w / n);
  const double log_j = lambda - a * std::log(lambda) + std::lgamma(a) +
                       a * std::log(theta) + log_mean_w;
  return vvq::log_sphere_area(d - 1) + log_j;
}

}  // namespace

TEST_CASE("log_norm_const: d=3 closed form") {
  for (double lambda : {0.5, 2.0, 10.0, 100.0, 700.0}) {
    CHECK(std::fabs(vvq::log_norm_const(3, lambda) - log_c3(lambda)) < 1e-12);
  }
  // Hand-computed spot values.
  CHECK(vvq::log_norm_const(3, 2.0) == doctest::Approx(-3.1265).epsilon(5e-4));
  CHECK(vvq::log_norm_const(3, 1e-12) ==
        doctest::Approx(-std::log(4.0 * M_PI)).epsilon(1e-12));
}

TEST_CASE("log_norm_const: uniform branch joins the formula smoothly") {
  // Just above the branch threshold the full formula must agree with the
  // uniform limit to the O(lambda^2) correction.
  const int d = 17;
  const double at_limit = -vvq::log_sphere_area(d);
  // The full formula cancels two ~1e2 logs, so allow ~ulp-level noise.
  CHECK(std::fabs(vvq::log_norm_const(d, 2e-8) - at_limit) < 1e-13);
  CHECK(std::fabs(vvq::log_norm_const(d, 1e-9) - at_limit) == 0.0);
}

TEST_CASE("log_norm_const: domain errors") {
  CHECK_THROWS_AS(vvq::log_norm_const(2, 1.0), vvq::DataError);
  CHECK_THROWS_AS(vvq::log_norm_const(3, -0.5), vvq::DataError);
}

TEST_CASE("log_norm_const: MC normalization oracle") {
  vvq::Rng rng(1234);
  for (int d : {3, 5, 17}) {
    for (double lambda : {0.1, 10.0, 500.0}) {
      const double log_integral = mc_log_sphere_integral(d, lambda, 100000, rng);
      const double total = std::exp(vvq::log_norm_const(d, lambda) + log_integral);
      CAPTURE(d);
      CAPTURE(lambda);
      CHECK(total == doctest::Approx(1.0).epsilon(0.02));
    }
  }
}

TEST_CASE("log_pdf: uniform case, mode value, dimension check") {
  vvq::VmfComponent uniform{{0.0, 0.0, 1.0}, 0.0};
  vvq::Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    auto x = vvq::sample_vmf(uniform, 1, rng)[0];
    CHECK(std::fabs(vvq::log_pdf(x, uniform) + std::log(4.0 * M_PI)) < 1e-12);
  }

  vvq::VmfComponent comp{{0.0, 0.0, 1.0}, 2.0};
  const double at_mode = vvq::log_pdf(axis_vector(3, 2), comp);
  CHECK(std::fabs(at_mode - (log_c3(2.0) + 2.0)) < 1e-12);
  CHECK(at_mode == doctest::Approx(-1.1265).epsilon(1e-3));

  // Maximized exactly at x = mu.
  for (int i = 0; i < 100; ++i) {
    auto x = vvq::sample_vmf(comp, 1, rng)[0];
    CHECK(vvq::log_pdf(x, comp) <= at_mode + 1e-12);
  }

  vvq::SphereVector wrong;
  wrong.values = {1.0, 0.0};
  CHECK_THROWS_AS(vvq::log_pdf(wrong, comp), vvq::DataError);
}

TEST_CASE("mean_resultant: d=3 closed form, monotonicity, bounds") {
  CHECK(std::fabs(vvq::mean_resultant(3, 2.0) - a3(2.0)) < 1e-12);
  CHECK(vvq::mean_resultant(3, 2.0) == doctest::Approx(0.53731).epsilon(1e-4));
  CHECK(vvq::mean_resultant(5, 0.0) == 0.0);

  for (int d : {3, 5, 17}) {
    double prev = -1.0;
    for (double lambda : {0.0, 0.01, 0.1, 1.0, 5.0, 20.0, 100.0, 1e3, 1e4}) {
      const double a = vvq::mean_resultant(d, lambda);
      CHECK(a >= 0.0);
      CHECK(a < 1.0);
      CHECK(a > prev);
      prev = a;
    }
  }
}

TEST_CASE("component_entropy: closed forms and ordering") {
  // lambda = 0: both conventions give the uniform entropy ln(area).
  CHECK(std::fabs(vvq::component_entropy(3, 0.0, vvq::EntropyForm::kPeak) -
                  std::log(4.0 * M_PI)) < 1e-12);
  CHECK(std::fabs(vvq::component_entropy(3, 0.0, vvq::EntropyForm::kExact) -
                  std::log(4.0 * M_PI)) < 1e-12);

  const double peak = vvq::component_entropy(3, 2.0, vvq::EntropyForm::kPeak);
  const double exact = vvq::component_entropy(3, 2.0, vvq::EntropyForm::kExact);
  CHECK(std::fabs(peak - (-log_c3(2.0) - 2.0)) < 1e-12);
  CHECK(std::fabs(exact - (-log_c3(2.0) - 2.0 * a3(2.0))) < 1e-12);
  CHECK(peak == doctest::Approx(1.1265).epsilon(1e-3));
  CHECK(exact == doctest::Approx(2.0519).epsilon(1e-3));

  // The peak convention drops lambda (1 - A) > 0, so it sits below kExact,
  // and both fall as the component concentrates.
  for (int d : {3, 17}) {
    double prev_peak = 1e300, prev_exact = 1e300;
    for (double lambda : {0.5, 2.0, 10.0, 50.0, 200.0}) {
      const double hp = vvq::component_entropy(d, lambda, vvq::EntropyForm::kPeak);
      const double he = vvq::component_entropy(d, lambda, vvq::EntropyForm::kExact);
      const double gap = lambda * (1.0 - vvq::mean_resultant(d, lambda));
      CHECK(he - hp == doctest::Approx(gap).epsilon(1e-12));
      CHECK(he > hp);
      CHECK(hp < prev_peak);
      CHECK(he < prev_exact);
      prev_peak = hp;
      prev_exact = he;
    }
  }
}

TEST_CASE("component_entropy: exact form matches MC -E[ln f]") {
  vvq::Rng rng(99);
  struct Case {
    int d;
    double lambda;
    double tol;
  };
  // Tolerances are ~4 MC standard errors at n = 2e5.
  for (const Case& c : {Case{3, 2.0, 0.008}, Case{5, 10.0, 0.013},
                        Case{17, 50.0, 0.026}}) {
    std::vector<double> mu(c.d, 0.0);
    mu[0] = 1.0;
    vvq::VmfComponent comp{mu, c.lambda};
    const auto sample = vvq::sample_vmf(comp, 200000, rng);
    double acc = 0.0;
    for (const auto& x : sample) acc -= vvq::log_pdf(x, comp);
    const double mc = acc / sample.size();
    const double exact =
        vvq::component_entropy(c.d, c.lambda, vvq::EntropyForm::kExact);
    const double peak =
        vvq::component_entropy(c.d, c.lambda, vvq::EntropyForm::kPeak);
    CAPTURE(c.d);
    CAPTURE(c.lambda);
    CHECK(std::fabs(mc - exact) < c.tol);
    // The peak convention misses by lambda (1 - A_d(lambda)).
    const double deviation = c.lambda * (1.0 - vvq::mean_resultant(c.d, c.lambda));
    CHECK(std::fabs((mc - peak) - deviation) < c.tol);
  }
}

TEST_CASE("sample_vmf: unit norm, determinism, uniform case") {
  vvq::VmfComponent comp{{0.0, 0.0, 0.0, 1.0}, 3.5};
  const auto a = vvq::sample_vmf(comp, 500, std::uint64_t{77});
  const auto b = vvq::sample_vmf(comp, 500, std::uint64_t{77});
  REQUIRE(a.size() == 500);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].values == b[i].values);  // bit-identical for equal seeds
    double norm2 = 0.0;
    for (double c : a[i].values) norm2 += c * c;
    CHECK(std::fabs(norm2 - 1.0) < 1e-12);
  }

  // lambda = 0: uniform on the sphere; CLT bound on the mean vector norm.
  vvq::VmfComponent uniform{{1.0, 0.0, 0.0, 0.0, 0.0}, 0.0};
  const int n = 40000;
  const auto u = vvq::sample_vmf(uniform, n, std::uint64_t{123});
  std::vector<double> mean(5, 0.0);
  for (const auto& x : u) {
    for (int k = 0; k < 5; ++k) mean[k] += x.values[k];
  }
  double norm = 0.0;
  for (int k = 0; k < 5; ++k) {
    mean[k] /= n;
    norm += mean[k] * mean[k];
  }
  CHECK(std::sqrt(norm) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("sample_vmf: empirical resultant matches A_d(lambda)") {
  const int d = 17, n = 50000;
  std::vector<double> mu(d, 0.0);
  mu[d - 1] = 1.0;
  vvq::VmfComponent comp{mu, 50.0};
  const auto sample = vvq::sample_vmf(comp, n, std::uint64_t{4242});
  std::vector<double> mean(d, 0.0);
  for (const auto& x : sample) {
    for (int k = 0; k < d; ++k) mean[k] += x.values[k];
  }
  double norm2 = 0.0, along_mu = 0.0;
  for (int k = 0; k < d; ++k) {
    mean[k] /= n;
    norm2 += mean[k] * mean[k];
    along_mu += mean[k] * mu[k];
  }
  const double resultant = std::sqrt(norm2);
  CHECK(std::fabs(resultant - vvq::mean_resultant(d, 50.0)) < 0.01);
  // Mean direction aligned with mu.
  CHECK(std::acos(along_mu / resultant) < 0.02);
}

TEST_CASE("sample_vmf: off-axis mean direction is honored") {
  // Householder rotation path: mu not equal to e_d.
  const int d = 5, n = 30000;
  std::vector<double> mu = {0.6, -0.3, 0.5, 0.2, -0.4};
  double norm = 0.0;
  for (double c : mu) norm += c * c;
  for (double& c : mu) c /= std::sqrt(norm);
  vvq::VmfComponent comp{mu, 20.0};
  const auto sample = vvq::sample_vmf(comp, n, std::uint64_t{9});
  std::vector<double> mean(d, 0.0);
  for (const auto& x : sample) {
    for (int k = 0; k < d; ++k) mean[k] += x.values[k];
  }
  double m2 = 0.0, dot = 0.0;
  for (int k = 0; k < d; ++k) {
    mean[k] /= n;
    m2 += mean[k] * mean[k];
    dot += mean[k] * mu[k];
  }
  CHECK(std::acos(dot / std::sqrt(m2)) < 0.02);
  CHECK(std::fabs(std::sqrt(m2) - vvq::mean_resultant(d, 20.0)) < 0.01);
}

TEST_CASE("vmf: finite up to extreme concentrations") {
  const int d = 17;
  for (double lambda : {1e3, 1e4}) {
    const double lc = vvq::log_norm_const(d, lambda);
    CHECK(std::isfinite(lc));
    CHECK(std::isfinite(vvq::component_entropy(d, lambda, vvq::EntropyForm::kPeak)));
    CHECK(std::isfinite(vvq::component_entropy(d, lambda, vvq::EntropyForm::kExact)));
    CHECK(std::isfinite(vvq::mean_resultant(d, lambda)));
    std::vector<double> mu(d, 0.0);
    mu[3] = 1.0;
    vvq::VmfComponent comp{mu, lambda};
    const auto s = vvq::sample_vmf(comp, 10, std::uint64_t{3});
    for (const auto& x : s) {
      CHECK(std::isfinite(vvq::log_pdf(x, comp)));
    }
  }
}

TEST_CASE("validate_component: rejects bad components") {
  CHECK_THROWS_AS(vvq::validate_component({{1.0, 0.0}, 1.0}), vvq::DataError);
  CHECK_THROWS_AS(vvq::validate_component({{0.5, 0.5, 0.5}, 1.0}),
                  vvq::DataError);
  CHECK_THROWS_AS(vvq::validate_component({{1.0, 0.0, 0.0}, -1.0}),
                  vvq::DataError);
  CHECK_NOTHROW(vvq::validate_component({{0.0, 1.0, 0.0}, 0.0}));
}
