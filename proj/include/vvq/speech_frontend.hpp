#pragma once

#include <cstddef>
#include <vector>

#include "vvq/types.hpp"

namespace vvq {

enum class WindowKind { kHamming, kHann, kRectangular };

// Frame-level analysis settings. Defaults give 25 ms windows with a 20 ms
// hop at 16 kHz and an order-16 predictor.
struct AnalysisConfig {
  int sample_rate_hz = 16000;
  double window_ms = 25.0;
  double step_ms = 20.0;
  int lpc_order = 16;
  double preemphasis = 0.97;
  WindowKind window_kind = WindowKind::kHamming;

  int window_samples() const;
  int step_samples() const;
};

// Throws DataError if the configuration is unusable (non-positive sizes,
// step larger than window, order < 2).
void validate_config(const AnalysisConfig& config);

// y[n] = x[n] - alpha * x[n-1], with x[-1] = 0.
std::vector<double> pre_emphasize(const std::vector<double>& x, double alpha);

// Analysis window of the given length (amplitude taper, not normalized).
std::vector<double> make_window(WindowKind kind, int length);

// Splits the signal into overlapping frames of `window` samples advanced by
// `step`. Yields floor((N - window) / step) + 1 frames; throws DataError if
// the signal is shorter than one window.
std::vector<std::vector<double>> frame_signal(const std::vector<double>& x,
                                              int window, int step);

// Biased autocorrelation r[0..max_lag] of one frame.
std::vector<double> autocorrelation(const std::vector<double>& frame,
                                    int max_lag);

// Forward linear predictor: coeffs a_1..a_K predict x[n] as
// sum_k a_k x[n-k]; `gain` is the final prediction-error energy.
struct LpcVector {
  std::vector<double> coeffs;
  double gain = 0.0;

  int order() const { return static_cast<int>(coeffs.size()); }
};

// Levinson-Durbin recursion on r[0..K]. r[0] is floored upward by a factor
// 1e-6 of itself for conditioning. Throws NumericError if r[0] == 0 or a
// reflection coefficient reaches magnitude 1 (unstable frame).
LpcVector levinson_durbin(const std::vector<double>& r, int order);

// Line spectral frequencies (ascending, in (0, pi)) of a stable predictor.
// Roots are located with a Chebyshev-domain grid scan plus bisection.
// Throws DataError if root finding cannot produce K interlaced frequencies.
LsfVector lpc_to_lsf(const LpcVector& lpc);

// Inverse map; the returned gain is 1.
LpcVector lsf_to_lpc(const LsfVector& lsf);

struct ExtractionStats {
  std::size_t frames_total = 0;
  std::size_t frames_skipped = 0;
};

// Full front end: pre-emphasis, framing, windowing, autocorrelation,
// Levinson-Durbin, LSF conversion. Frames that fail (unstable predictor or
// failed root search) are skipped and counted.
std::vector<LsfVector> extract_lsf(const std::vector<double>& samples,
                                   const AnalysisConfig& config,
                                   ExtractionStats* stats = nullptr);

}  // namespace vvq
