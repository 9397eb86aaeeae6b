#include "vvq/speech_frontend.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vvq/errors.hpp"
#include "vvq/transforms.hpp"

namespace vvq {

namespace {

constexpr int kRootGridPoints = 512;   // scan resolution in x = cos(omega)
constexpr double kBisectWidth = 1e-10;  // bracket width before Newton polish

// Evaluates a palindromic polynomial on the unit circle through its
// Chebyshev form. `half` holds c[0..m] of sum_i c_i z^{-i} with degree 2m
// and c_i = c_{2m-i}; the value at z = e^{j omega}, x = cos(omega), is
//   G(x) = c[m] + 2 sum_{j=1..m} c[m-j] T_j(x),
// computed with Clenshaw recurrence.
double cheb_eval(const std::vector<double>& half, double x) {
  const int m = static_cast<int>(half.size()) - 1;
  double y1 = 0.0, y2 = 0.0;
  for (int j = m; j >= 1; --j) {
    const double y0 = 2.0 * x * y1 - y2 + 2.0 * half[m - j];
    y2 = y1;
    y1 = y0;
  }
  return x * y1 - y2 + half[m];
}

// Same series as a function of omega, with its derivative. Used to polish
// bisection roots without the acos() sensitivity near x = +-1.
void trig_eval(const std::vector<double>& half, double omega, double* g,
               double* dg) {
  const int m = static_cast<int>(half.size()) - 1;
  double sum = half[m], dsum = 0.0;
  for (int j = 1; j <= m; ++j) {
    sum += 2.0 * half[m - j] * std::cos(j * omega);
    dsum -= 2.0 * j * half[m - j] * std::sin(j * omega);
  }
  *g = sum;
  *dg = dsum;
}

// All roots of the palindromic polynomial on the upper unit semicircle,
// returned as ascending omega in (0, pi). Grid scan in x plus bisection,
// then a short Newton refinement in omega.
std::vector<double> unit_circle_roots(const std::vector<double>& half) {
  std::vector<double> roots;
  double x_prev = 1.0;
  double g_prev = cheb_eval(half, x_prev);
  for (int i = 1; i < kRootGridPoints; ++i) {
    const double x = 1.0 - 2.0 * i / (kRootGridPoints - 1);
    const double g = cheb_eval(half, x);
    if (g_prev == 0.0) {
      if (x_prev < 1.0) roots.push_back(std::acos(x_prev));
    } else if (g == 0.0) {
      // handled as the left endpoint of the next interval
    } else if ((g_prev > 0.0) != (g > 0.0)) {
      double hi = x_prev, lo = x;  // g(hi) and g(lo) have opposite signs
      double g_hi = g_prev;
      while (hi - lo > kBisectWidth) {
        const double mid = 0.5 * (hi + lo);
        const double g_mid = cheb_eval(half, mid);
        if (g_mid == 0.0) {
          hi = lo = mid;
          break;
        }
        if ((g_mid > 0.0) == (g_hi > 0.0)) {
          hi = mid;
          g_hi = g_mid;
        } else {
          lo = mid;
        }
      }
      double omega = std::acos(0.5 * (hi + lo));
      for (int it = 0; it < 4; ++it) {
        double gv, dgv;
        trig_eval(half, omega, &gv, &dgv);
        if (dgv == 0.0) break;
        const double next = omega - gv / dgv;
        if (next <= 0.0 || next >= std::numbers::pi) break;
        omega = next;
      }
      roots.push_back(omega);
    }
    x_prev = x;
    g_prev = g;
  }
  if (g_prev == 0.0 && x_prev > -1.0) roots.push_back(std::acos(x_prev));
  std::sort(roots.begin(), roots.end());
  return roots;
}

// Divides a polynomial (coefficients in z^{-1}) by 1 + z^{-1} or 1 - z^{-1}
// (sign = -1 or +1 respectively) or 1 - z^{-2} (sign = +1, lag = 2),
// dropping the zero remainder. Returns the quotient of degree n - lag.
std::vector<double> deflate(const std::vector<double>& c, double sign,
                            int lag) {
  std::vector<double> out(c.size() - lag);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = c[i];
    if (i >= static_cast<std::size_t>(lag)) out[i] += sign * out[i - lag];
  }
  return out;
}

// Takes the first half of a palindromic coefficient vector of degree 2m,
// averaging mirrored entries to stay symmetric under roundoff.
std::vector<double> palindrome_half(const std::vector<double>& c) {
  const std::size_t m = (c.size() - 1) / 2;
  std::vector<double> half(m + 1);
  for (std::size_t i = 0; i <= m; ++i) {
    half[i] = 0.5 * (c[i] + c[c.size() - 1 - i]);
  }
  return half;
}

std::vector<double> poly_mul(const std::vector<double>& a,
                             const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

}  // namespace

int AnalysisConfig::window_samples() const {
  return static_cast<int>(std::lround(sample_rate_hz * window_ms / 1000.0));
}

int AnalysisConfig::step_samples() const {
  return static_cast<int>(std::lround(sample_rate_hz * step_ms / 1000.0));
}

void validate_config(const AnalysisConfig& config) {
  if (config.sample_rate_hz <= 0) {
    throw DataError("validate_config: sample rate must be > 0");
  }
  if (!(config.step_ms > 0.0) || !(config.window_ms >= config.step_ms)) {
    throw DataError("validate_config: need window_ms >= step_ms > 0");
  }
  if (config.lpc_order < 2) {
    throw DataError("validate_config: lpc_order must be >= 2");
  }
  if (!(config.preemphasis >= 0.0) || config.preemphasis >= 1.0) {
    throw DataError("validate_config: preemphasis must be in [0, 1)");
  }
  if (config.window_samples() <= config.lpc_order) {
    throw DataError("validate_config: window shorter than the LPC order");
  }
}

std::vector<double> pre_emphasize(const std::vector<double>& x, double alpha) {
  std::vector<double> y(x.size());
  double prev = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    y[n] = x[n] - alpha * prev;
    prev = x[n];
  }
  return y;
}

std::vector<double> make_window(WindowKind kind, int length) {
  if (length <= 0) throw DataError("make_window: length must be > 0");
  std::vector<double> w(length, 1.0);
  if (kind == WindowKind::kRectangular || length == 1) return w;
  const double step = 2.0 * std::numbers::pi / (length - 1);
  for (int n = 0; n < length; ++n) {
    const double c = std::cos(step * n);
    w[n] = (kind == WindowKind::kHamming) ? 0.54 - 0.46 * c : 0.5 * (1.0 - c);
  }
  return w;
}

std::vector<std::vector<double>> frame_signal(const std::vector<double>& x,
                                              int window, int step) {
  if (window <= 0 || step <= 0) {
    throw DataError("frame_signal: window and step must be > 0");
  }
  const std::size_t n = x.size();
  if (n < static_cast<std::size_t>(window)) {
    throw DataError("frame_signal: signal shorter than one analysis window");
  }
  const std::size_t count = (n - window) / step + 1;
  std::vector<std::vector<double>> frames(count);
  for (std::size_t f = 0; f < count; ++f) {
    const std::size_t start = f * step;
    frames[f].assign(x.begin() + start, x.begin() + start + window);
  }
  return frames;
}

std::vector<double> autocorrelation(const std::vector<double>& frame,
                                    int max_lag) {
  const int n = static_cast<int>(frame.size());
  if (max_lag < 0 || max_lag >= n) {
    throw DataError("autocorrelation: max_lag must be in [0, frame size)");
  }
  std::vector<double> r(max_lag + 1, 0.0);
  for (int k = 0; k <= max_lag; ++k) {
    double acc = 0.0;
    for (int i = k; i < n; ++i) acc += frame[i] * frame[i - k];
    r[k] = acc;
  }
  return r;
}

LpcVector levinson_durbin(const std::vector<double>& r, int order) {
  if (order < 1 || static_cast<int>(r.size()) < order + 1) {
    throw DataError("levinson_durbin: need autocorrelation lags 0..order");
  }
  if (r[0] == 0.0) {
    throw NumericError("levinson_durbin: zero-energy frame");
  }
  // Small diagonal load on the zero lag keeps near-singular frames tame.
  const double r0 = r[0] + 1e-6 * r[0];

  std::vector<double> a(order + 1, 0.0);  // a[1..m] at stage m
  std::vector<double> prev(order + 1, 0.0);
  double err = r0;
  for (int m = 1; m <= order; ++m) {
    double acc = r[m];
    for (int k = 1; k < m; ++k) acc -= a[k] * r[m - k];
    const double refl = acc / err;
    if (!(std::abs(refl) < 1.0)) {
      throw NumericError("levinson_durbin: unstable frame (|k| >= 1)");
    }
    prev = a;
    a[m] = refl;
    for (int k = 1; k < m; ++k) a[k] = prev[k] - refl * prev[m - k];
    err *= 1.0 - refl * refl;
    if (!(err > 0.0)) {
      throw NumericError("levinson_durbin: prediction error collapsed");
    }
  }

  LpcVector lpc;
  lpc.coeffs.assign(a.begin() + 1, a.end());
  lpc.gain = err;
  return lpc;
}

LsfVector lpc_to_lsf(const LpcVector& lpc) {
  const int order = lpc.order();
  if (order < 1) throw DataError("lpc_to_lsf: empty predictor");

  // Error-filter coefficients A(z) = 1 - sum_k a_k z^{-k}, zero-padded so
  // the symmetric/antisymmetric pair below has degree order + 1.
  std::vector<double> ahat(order + 2, 0.0);
  ahat[0] = 1.0;
  for (int k = 1; k <= order; ++k) ahat[k] = -lpc.coeffs[k - 1];

  std::vector<double> p(order + 2), q(order + 2);
  for (int i = 0; i <= order + 1; ++i) {
    p[i] = ahat[i] + ahat[order + 1 - i];
    q[i] = ahat[i] - ahat[order + 1 - i];
  }

  // Remove the fixed roots at z = -1 / z = +1 so both factors become
  // palindromic polynomials of even degree with all roots on the circle.
  std::vector<double> p_half, q_half;
  if (order % 2 == 0) {
    p_half = palindrome_half(deflate(p, -1.0, 1));
    q_half = palindrome_half(deflate(q, +1.0, 1));
  } else {
    p_half = palindrome_half(p);
    q_half = palindrome_half(deflate(q, +1.0, 2));
  }

  const auto omega_p = unit_circle_roots(p_half);
  const auto omega_q = unit_circle_roots(q_half);
  if (omega_p.size() != p_half.size() - 1 ||
      omega_q.size() != q_half.size() - 1) {
    throw DataError("lpc_to_lsf: root search lost line spectral roots");
  }

  // Frequencies must interlace starting from the symmetric factor.
  LsfVector lsf;
  lsf.values.resize(order);
  for (int i = 0; i < order; ++i) {
    lsf.values[i] = (i % 2 == 0) ? omega_p[i / 2] : omega_q[i / 2];
  }
  for (int i = 0; i < order; ++i) {
    const double lo = (i == 0) ? 0.0 : lsf.values[i - 1];
    if (!(lsf.values[i] > lo) || !(lsf.values[i] < std::numbers::pi)) {
      throw DataError("lpc_to_lsf: line spectral roots failed to interlace");
    }
  }
  return lsf;
}

LpcVector lsf_to_lpc(const LsfVector& lsf) {
  validate_lsf(lsf);
  const int order = static_cast<int>(lsf.values.size());

  std::vector<double> p{1.0}, q{1.0};
  for (int i = 0; i < order; ++i) {
    const std::vector<double> quad{1.0, -2.0 * std::cos(lsf.values[i]), 1.0};
    if (i % 2 == 0) {
      p = poly_mul(p, quad);
    } else {
      q = poly_mul(q, quad);
    }
  }
  if (order % 2 == 0) {
    p = poly_mul(p, {1.0, 1.0});
    q = poly_mul(q, {1.0, -1.0});
  } else {
    q = poly_mul(q, {1.0, 0.0, -1.0});
  }

  LpcVector lpc;
  lpc.coeffs.resize(order);
  for (int k = 1; k <= order; ++k) {
    lpc.coeffs[k - 1] = -0.5 * (p[k] + q[k]);
  }
  lpc.gain = 1.0;
  return lpc;
}

std::vector<LsfVector> extract_lsf(const std::vector<double>& samples,
                                   const AnalysisConfig& config,
                                   ExtractionStats* stats) {
  validate_config(config);
  const auto emphasized = pre_emphasize(samples, config.preemphasis);
  const auto frames = frame_signal(emphasized, config.window_samples(),
                                   config.step_samples());
  const auto window = make_window(config.window_kind, config.window_samples());

  std::vector<LsfVector> out;
  out.reserve(frames.size());
  std::size_t skipped = 0;
  std::vector<double> buf(window.size());
  for (const auto& frame : frames) {
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = frame[i] * window[i];
    try {
      const auto r = autocorrelation(buf, config.lpc_order);
      const auto lpc = levinson_durbin(r, config.lpc_order);
      out.push_back(lpc_to_lsf(lpc));
    } catch (const NumericError&) {
      ++skipped;
    } catch (const DataError&) {
      ++skipped;
    }
  }
  if (stats != nullptr) {
    stats->frames_total = frames.size();
    stats->frames_skipped = skipped;
  }
  return out;
}

}  // namespace vvq
