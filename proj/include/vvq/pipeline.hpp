#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vvq/model_io.hpp"
#include "vvq/rate_allocation.hpp"
#include "vvq/speech_frontend.hpp"
#include "vvq/vmf.hpp"

namespace vvq {

// Combined settings for the command-line front end. Loadable from a
// line-oriented `key=value` file; '#' starts a comment, unknown keys raise
// DataError.
struct PipelineConfig {
  AnalysisConfig analysis;
  RateConfig rate;
  EntropyForm entropy_form = EntropyForm::kPeak;
  double em_tol = 1e-6;
  int em_max_iter = 500;
  double train_fraction = 0.9;
};

PipelineConfig parse_pipeline_config(const std::string& text);
PipelineConfig load_pipeline_config(const std::string& path);

// The config snapshot recorded in every run manifest.
std::map<std::string, std::string> config_snapshot(const PipelineConfig& cfg);

// ---------------------------------------------------------------------------
// Corpus handling
// ---------------------------------------------------------------------------

struct Corpus {
  int order = 0;
  int sample_rate = 0;
  std::vector<LsfVector> train;
  std::vector<LsfVector> test;
};

// Reads an LSF text file, validates every vector, and splits it into
// disjoint train/test subsets by a seeded shuffle.
Corpus load_corpus(const std::string& lsf_path, double train_fraction,
                   std::uint64_t seed);

// Evenly spaced grid from min to max inclusive; throws DataError unless
// step > 0 and max >= min.
std::vector<double> make_rate_grid(double min_rate, double max_rate,
                                   double step);

// ---------------------------------------------------------------------------
// Subcommand bodies. Each writes its data output plus a sidecar manifest
// `<out>.manifest.json`; data outputs carry no timestamps, so a rerun with
// the same inputs, config, and seed is byte-identical.
// ---------------------------------------------------------------------------

struct ExtractResult {
  std::size_t files = 0;
  std::size_t vectors = 0;
  std::size_t frames_skipped = 0;
};

// Runs the analysis front end over every .wav in `in_dir` (sorted by name)
// and writes one LSF text file. Throws DataError if the directory holds no
// WAV files or a file's sample rate disagrees with the config.
ExtractResult run_extract(const std::string& in_dir,
                          const std::string& out_file,
                          const PipelineConfig& cfg, std::uint64_t seed,
                          std::ostream& log);

struct FitResult {
  ModelFamily family = ModelFamily::kVmm;
  int components = 0;
  int iterations = 0;
  bool converged = false;
  double loglik = 0.0;
  std::size_t train_count = 0;
};

// Loads a corpus, applies the family's representation transform (raw LSF
// vectors, completed spectral-gap simplex, or unit-sphere coordinates),
// fits on the training split, and writes the model JSON.
FitResult run_fit(const std::string& lsf_path, ModelFamily family,
                  int components, const std::string& out_file,
                  const PipelineConfig& cfg, std::uint64_t seed,
                  std::ostream& log);

// Evaluates a fitted model's distortion-rate curve over a grid in
// cfg.rate.rate_unit and writes the CSV.
DrCurve run_drcurve(const std::string& model_path, double min_rate,
                    double max_rate, double step,
                    const std::string& out_file, const PipelineConfig& cfg,
                    std::uint64_t seed, std::ostream& log);

struct CompareOptions {
  std::vector<std::string> model_paths;  // >= 2, common LSF order
  std::string data_path;      // LSF corpus; required when rounds > 1
  double min_rate = 20.0;
  double max_rate = 60.0;
  double step = 1.0;
  int rounds = 1;             // > 1 refits each model with per-round seeds
  bool bootstrap = false;     // resample the training split per round
};

struct CompareResult {
  std::vector<std::string> labels;          // "family[I=n]" per model
  std::vector<DrCurve> curves;              // per-rate means over rounds
  std::vector<std::vector<double>> ratios;  // ratios[a][b]: mean D_s a / b
};

// Merges the models' curves into one CSV and reports the pairwise mean
// frequency-domain distortion ratio over the grid. With rounds > 1 each
// model is refitted per round (fresh EM seed, optionally a bootstrap
// resample of the training split) and per-rate means are reported.
CompareResult run_compare(const CompareOptions& options,
                          const std::string& out_file,
                          const PipelineConfig& cfg, std::uint64_t seed,
                          std::ostream& log);

// Entropy-gap diagnostic for a fitted sphere-domain mixture; writes a small
// JSON report when out_file is nonempty.
GapReport run_gap(const std::string& model_path, int mc_samples,
                  const std::string& out_file, const PipelineConfig& cfg,
                  std::uint64_t seed, std::ostream& log);

// Writes `files` WAV files of synthetic speech-like audio (a sum of
// AR-filtered noise layers with piecewise-constant filters) into out_dir,
// named synth_000.wav onward, at the configured sample rate.
void run_synth(const std::string& out_dir, int files, double seconds,
               const PipelineConfig& cfg, std::uint64_t seed,
               std::ostream& log);

}  // namespace vvq
