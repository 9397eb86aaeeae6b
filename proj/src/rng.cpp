#include "vvq/rng.hpp"

#include <cmath>

#include "vvq/errors.hpp"

namespace vvq {

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw DataError("Rng::below: n must be positive");
  // Rejection to avoid modulo bias.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t u;
  do {
    u = engine_();
  } while (u >= limit);
  return u % n;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * m;
  have_spare_ = true;
  return u * m;
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw DataError("Rng::gamma: shape must be positive");
  if (shape < 1.0) {
    const double u = 1.0 - uniform();  // in (0, 1]
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, w;
    do {
      x = normal();
      w = 1.0 + c * x;
    } while (w <= 0.0);
    w = w * w * w;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * w;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - w + std::log(w))) return d * w;
  }
}

double Rng::beta(double a, double b) {
  const double x = gamma(a);
  const double y = gamma(b);
  const double s = x + y;
  return s > 0.0 ? x / s : 0.5;
}

std::vector<double> Rng::dirichlet(const std::vector<double>& alpha) {
  std::vector<double> out(alpha.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    out[i] = gamma(alpha[i]);
    sum += out[i];
  }
  if (sum <= 0.0) {
    const double u = 1.0 / static_cast<double>(alpha.size());
    for (double& x : out) x = u;
    return out;
  }
  for (double& x : out) x /= sum;
  return out;
}

void Rng::shuffle(std::vector<int>& items) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace vvq
