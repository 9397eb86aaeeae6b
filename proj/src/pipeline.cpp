#include "vvq/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <numbers>
#include <ostream>
#include <sstream>

#include "vvq/baselines.hpp"
#include "vvq/errors.hpp"
#include "vvq/mixture_em.hpp"
#include "vvq/rng.hpp"
#include "vvq/transforms.hpp"
#include "vvq/wav.hpp"

namespace fs = std::filesystem;

namespace vvq {

namespace {

std::string fmt6(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.empty()) {
    throw DataError("config: " + key + " needs a number, got '" + value + "'");
  }
  return out;
}

int to_int(const std::string& key, const std::string& value) {
  const double v = to_double(key, value);
  const int out = static_cast<int>(v);
  if (static_cast<double>(out) != v) {
    throw DataError("config: " + key + " needs an integer, got '" + value +
                    "'");
  }
  return out;
}

std::string window_name(WindowKind kind) {
  switch (kind) {
    case WindowKind::kHamming:
      return "hamming";
    case WindowKind::kHann:
      return "hann";
    case WindowKind::kRectangular:
      return "rectangular";
  }
  return "hamming";
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + path + "'");
}

void emit_manifest(const std::string& data_path, const std::string& command,
                   const PipelineConfig& cfg, std::uint64_t seed,
                   const std::string& input_digest,
                   std::map<std::string, std::string> extra) {
  RunManifest manifest;
  manifest.command = command;
  manifest.seed = seed;
  manifest.input_digest = input_digest;
  manifest.config = config_snapshot(cfg);
  manifest.config.merge(extra);
  write_manifest(data_path + ".manifest.json", manifest);
}

// Fits the requested family on the training vectors after the family's
// representation transform, recording everything the model file needs.
LoadedModel fit_family(ModelFamily family, int components,
                       const std::vector<LsfVector>& train,
                       const PipelineConfig& cfg, std::uint64_t seed) {
  std::vector<DeltaLsf> deltas;
  deltas.reserve(train.size());
  double sum_v = 0.0;
  for (const auto& row : train) {
    deltas.push_back(lsf_to_delta(row));
    for (double v : deltas.back().values) sum_v += v;
  }

  LoadedModel out;
  out.family = family;
  out.meta.seed = seed;
  out.meta.train_count = train.size();
  out.meta.mean_sum_v = train.empty() ? 0.0 : sum_v / train.size();

  const auto record = [&out](const auto& report) {
    out.meta.iterations = report.iterations;
    out.meta.converged = report.converged;
    out.meta.loglik = report.log_likelihood_trace.empty()
                          ? 0.0
                          : report.log_likelihood_trace.back();
  };

  switch (family) {
    case ModelFamily::kVmm: {
      std::vector<SphereVector> rows;
      rows.reserve(deltas.size());
      for (const auto& d : deltas) rows.push_back(delta_to_srdlsf(d));
      const EmReport report =
          fit_vmm(rows, components, VmmInit::kSphericalKmeans, cfg.em_tol,
                  cfg.em_max_iter, seed);
      out.vmm = report.final_model;
      record(report);
      break;
    }
    case ModelFamily::kGmm: {
      std::vector<std::vector<double>> rows;
      rows.reserve(train.size());
      for (const auto& row : train) rows.push_back(row.values);
      const GmmReport report =
          fit_gmm(rows, components, cfg.em_tol, cfg.em_max_iter, seed);
      out.gmm = report.final_model;
      record(report);
      break;
    }
    case ModelFamily::kDmm: {
      std::vector<std::vector<double>> rows;
      rows.reserve(deltas.size());
      for (const auto& d : deltas) rows.push_back(complete_simplex(d));
      const DmmReport report =
          fit_dmm(rows, components, cfg.em_tol, cfg.em_max_iter, seed);
      out.dmm = report.final_model;
      record(report);
      break;
    }
  }
  return out;
}

void write_model_file(const std::string& path, const LoadedModel& model) {
  switch (model.family) {
    case ModelFamily::kVmm:
      write_model_json(path, model.vmm, model.meta);
      return;
    case ModelFamily::kGmm:
      write_model_json(path, model.gmm, model.meta);
      return;
    case ModelFamily::kDmm:
      write_model_json(path, model.dmm, model.meta);
      return;
  }
}

DrCurve curve_for(const LoadedModel& model, const std::vector<double>& grid,
                  const PipelineConfig& cfg) {
  RateConfig rc = cfg.rate;
  rc.dimension = model.lsf_order();
  MixtureSummary summary;
  switch (model.family) {
    case ModelFamily::kVmm:
      summary = summarize(model.vmm, cfg.entropy_form);
      break;
    case ModelFamily::kGmm:
      summary = summarize(model.gmm);
      break;
    case ModelFamily::kDmm:
      summary = summarize(model.dmm);
      break;
  }
  return dr_curve(summary, grid, rc, model.meta.mean_sum_v);
}

// Strictly increasing LSF vector with a guaranteed inter-frequency margin;
// the resulting predictor is stable with well-separated resonances.
LsfVector random_stable_lsf(int order, Rng& rng) {
  constexpr double kMinGap = 0.03;
  const double spread = std::numbers::pi - (order + 1) * kMinGap;
  if (spread <= 0.0) {
    throw DataError("synth: LPC order too high for stable filter margins");
  }
  std::vector<double> gaps(order + 1);
  double total = 0.0;
  for (auto& g : gaps) {
    g = -std::log(1.0 - rng.uniform());
    total += g;
  }
  LsfVector lsf;
  lsf.values.resize(order);
  double s = 0.0;
  for (int k = 0; k < order; ++k) {
    s += kMinGap + spread * gaps[k] / total;
    lsf.values[k] = s;
  }
  return lsf;
}

// Adds one all-pole layer: white noise driven through a piecewise-constant
// random stable filter, with filter state carried across segment boundaries
// so the output stays continuous.
void add_ar_layer(std::vector<double>& mix, int order, double min_len_s,
                  double max_len_s, int sample_rate, Rng& rng) {
  std::vector<double> hist(order, 0.0);  // y[n-1] .. y[n-order]
  std::size_t pos = 0;
  while (pos < mix.size()) {
    const auto seg_len = static_cast<std::size_t>(
        std::lround(rng.uniform(min_len_s, max_len_s) * sample_rate));
    const std::size_t seg = std::min(mix.size() - pos, std::max<std::size_t>(seg_len, 1));
    const LpcVector lpc = lsf_to_lpc(random_stable_lsf(order, rng));
    const double amp = rng.uniform(0.2, 1.0);
    for (std::size_t i = 0; i < seg; ++i) {
      double y = amp * rng.normal();
      for (int k = 0; k < order; ++k) y += lpc.coeffs[k] * hist[k];
      for (int k = order - 1; k > 0; --k) hist[k] = hist[k - 1];
      hist[0] = y;
      mix[pos + i] += y;
    }
    pos += seg;
  }
}

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& text) {
  PipelineConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("config line " + std::to_string(line_no) +
                      ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "sample_rate_hz") {
      cfg.analysis.sample_rate_hz = to_int(key, value);
    } else if (key == "window_ms") {
      cfg.analysis.window_ms = to_double(key, value);
    } else if (key == "step_ms") {
      cfg.analysis.step_ms = to_double(key, value);
    } else if (key == "lpc_order") {
      cfg.analysis.lpc_order = to_int(key, value);
    } else if (key == "preemphasis") {
      cfg.analysis.preemphasis = to_double(key, value);
    } else if (key == "window") {
      if (value == "hamming") {
        cfg.analysis.window_kind = WindowKind::kHamming;
      } else if (value == "hann") {
        cfg.analysis.window_kind = WindowKind::kHann;
      } else if (value == "rectangular") {
        cfg.analysis.window_kind = WindowKind::kRectangular;
      } else {
        throw DataError("config: unknown window '" + value + "'");
      }
    } else if (key == "rate_unit") {
      if (value == "bits") {
        cfg.rate.rate_unit = RateUnit::kBits;
      } else if (value == "nats") {
        cfg.rate.rate_unit = RateUnit::kNats;
      } else {
        throw DataError("config: unknown rate_unit '" + value + "'");
      }
    } else if (key == "r_exponent") {
      cfg.rate.r_exponent = to_double(key, value);
    } else if (key == "c_mode") {
      if (value == "unity") {
        cfg.rate.c_mode = CMode::kUnity;
      } else if (value == "sphere_bound") {
        cfg.rate.c_mode = CMode::kSphereBound;
      } else if (value == "zador_gaussian") {
        cfg.rate.c_mode = CMode::kZadorGaussian;
      } else {
        throw DataError("config: unknown c_mode '" + value + "'");
      }
    } else if (key == "entropy_form") {
      if (value == "peak") {
        cfg.entropy_form = EntropyForm::kPeak;
      } else if (value == "exact") {
        cfg.entropy_form = EntropyForm::kExact;
      } else {
        throw DataError("config: unknown entropy_form '" + value + "'");
      }
    } else if (key == "em_tol") {
      cfg.em_tol = to_double(key, value);
    } else if (key == "em_max_iter") {
      cfg.em_max_iter = to_int(key, value);
    } else if (key == "train_fraction") {
      cfg.train_fraction = to_double(key, value);
    } else {
      throw DataError("config: unknown key '" + key + "'");
    }
  }
  return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_pipeline_config(buf.str());
}

std::map<std::string, std::string> config_snapshot(const PipelineConfig& cfg) {
  std::map<std::string, std::string> out;
  out["sample_rate_hz"] = std::to_string(cfg.analysis.sample_rate_hz);
  out["window_ms"] = format_double(cfg.analysis.window_ms);
  out["step_ms"] = format_double(cfg.analysis.step_ms);
  out["lpc_order"] = std::to_string(cfg.analysis.lpc_order);
  out["preemphasis"] = format_double(cfg.analysis.preemphasis);
  out["window"] = window_name(cfg.analysis.window_kind);
  out["rate_unit"] = cfg.rate.rate_unit == RateUnit::kBits ? "bits" : "nats";
  out["r_exponent"] = format_double(cfg.rate.r_exponent);
  switch (cfg.rate.c_mode) {
    case CMode::kUnity:
      out["c_mode"] = "unity";
      break;
    case CMode::kSphereBound:
      out["c_mode"] = "sphere_bound";
      break;
    case CMode::kZadorGaussian:
      out["c_mode"] = "zador_gaussian";
      break;
  }
  out["entropy_form"] =
      cfg.entropy_form == EntropyForm::kPeak ? "peak" : "exact";
  out["em_tol"] = format_double(cfg.em_tol);
  out["em_max_iter"] = std::to_string(cfg.em_max_iter);
  out["train_fraction"] = format_double(cfg.train_fraction);
  return out;
}

Corpus load_corpus(const std::string& lsf_path, double train_fraction,
                   std::uint64_t seed) {
  if (!(train_fraction > 0.0) || train_fraction > 1.0) {
    throw DataError("corpus: train fraction must lie in (0, 1]");
  }
  const LsfFile file = read_lsf_text(lsf_path);
  for (std::size_t i = 0; i < file.rows.size(); ++i) {
    try {
      validate_lsf(file.rows[i]);
    } catch (const DataError& err) {
      throw DataError("corpus row " + std::to_string(i + 1) + ": " +
                      err.what());
    }
  }

  std::vector<int> order(file.rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  Rng rng(seed);
  rng.shuffle(order);

  auto n_train = static_cast<std::size_t>(train_fraction *
                                          static_cast<double>(order.size()));
  n_train = std::clamp<std::size_t>(n_train, 1, order.size());

  Corpus corpus;
  corpus.order = file.order;
  corpus.sample_rate = file.sample_rate;
  corpus.train.reserve(n_train);
  corpus.test.reserve(order.size() - n_train);
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto& dst = i < n_train ? corpus.train : corpus.test;
    dst.push_back(file.rows[order[i]]);
  }
  return corpus;
}

std::vector<double> make_rate_grid(double min_rate, double max_rate,
                                   double step) {
  if (!(step > 0.0)) throw DataError("rate grid: step must be positive");
  if (max_rate < min_rate) {
    throw DataError("rate grid: max rate below min rate");
  }
  const auto count =
      static_cast<std::size_t>(std::floor((max_rate - min_rate) / step + 1e-9));
  std::vector<double> grid;
  grid.reserve(count + 1);
  for (std::size_t i = 0; i <= count; ++i) {
    grid.push_back(min_rate + static_cast<double>(i) * step);
  }
  return grid;
}

ExtractResult run_extract(const std::string& in_dir,
                          const std::string& out_file,
                          const PipelineConfig& cfg, std::uint64_t seed,
                          std::ostream& log) {
  validate_config(cfg.analysis);

  std::vector<fs::path> wavs;
  try {
    for (const auto& entry : fs::directory_iterator(in_dir)) {
      if (!entry.is_regular_file()) continue;
      std::string ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      if (ext == ".wav") wavs.push_back(entry.path());
    }
  } catch (const fs::filesystem_error& err) {
    throw DataError("extract: cannot scan '" + in_dir + "': " + err.what());
  }
  if (wavs.empty()) {
    throw DataError("extract: no WAV files in '" + in_dir + "'");
  }
  std::sort(wavs.begin(), wavs.end());

  struct FileOut {
    std::vector<LsfVector> rows;
    ExtractionStats stats;
    std::string digest;
  };
  std::vector<std::future<FileOut>> jobs;
  jobs.reserve(wavs.size());
  for (const auto& path : wavs) {
    jobs.push_back(std::async(std::launch::async, [&cfg, path] {
      FileOut out;
      out.digest = file_digest(path.string());
      const WavData wav = read_wav(path.string());
      if (wav.sample_rate != cfg.analysis.sample_rate_hz) {
        throw DataError("extract: '" + path.filename().string() + "' is " +
                        std::to_string(wav.sample_rate) +
                        " Hz but the config expects " +
                        std::to_string(cfg.analysis.sample_rate_hz));
      }
      out.rows = extract_lsf(wav.samples, cfg.analysis, &out.stats);
      return out;
    }));
  }

  ExtractResult result;
  result.files = wavs.size();
  std::vector<LsfVector> rows;
  std::string digest_feed;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    FileOut out = jobs[i].get();
    rows.insert(rows.end(), std::make_move_iterator(out.rows.begin()),
                std::make_move_iterator(out.rows.end()));
    result.frames_skipped += out.stats.frames_skipped;
    digest_feed += wavs[i].filename().string() + ":" + out.digest + "\n";
  }
  result.vectors = rows.size();

  if (rows.empty()) {
    log << "warning: no vectors extracted (all frames skipped); writing a "
           "header-only file\n";
    write_text_file(out_file,
                    "#K=" + std::to_string(cfg.analysis.lpc_order) +
                        " sample_rate=" +
                        std::to_string(cfg.analysis.sample_rate_hz) + "\n");
  } else {
    write_lsf_text(out_file, rows, cfg.analysis.sample_rate_hz);
  }

  emit_manifest(out_file, "extract", cfg, seed, content_digest(digest_feed),
                {{"in_dir", in_dir}, {"files", std::to_string(result.files)}});
  log << "extract: " << result.files << " files -> " << result.vectors
      << " vectors (" << result.frames_skipped << " frames skipped)\n";
  return result;
}

FitResult run_fit(const std::string& lsf_path, ModelFamily family,
                  int components, const std::string& out_file,
                  const PipelineConfig& cfg, std::uint64_t seed,
                  std::ostream& log) {
  const Corpus corpus = load_corpus(lsf_path, cfg.train_fraction, seed);
  const LoadedModel model =
      fit_family(family, components, corpus.train, cfg, seed);
  write_model_file(out_file, model);
  emit_manifest(out_file, "fit", cfg, seed, file_digest(lsf_path),
                {{"family", family_name(family)},
                 {"components", std::to_string(components)}});

  FitResult result;
  result.family = family;
  result.components = components;
  result.iterations = model.meta.iterations;
  result.converged = model.meta.converged;
  result.loglik = model.meta.loglik;
  result.train_count = model.meta.train_count;
  log << "fit: " << family_name(family) << " I=" << components << " on "
      << result.train_count << " vectors: " << result.iterations
      << " iterations, " << (result.converged ? "converged" : "not converged")
      << ", loglik " << fmt6(result.loglik) << "\n";
  return result;
}

DrCurve run_drcurve(const std::string& model_path, double min_rate,
                    double max_rate, double step,
                    const std::string& out_file, const PipelineConfig& cfg,
                    std::uint64_t seed, std::ostream& log) {
  const LoadedModel model = read_model_json(model_path);
  const std::vector<double> grid = make_rate_grid(min_rate, max_rate, step);
  const DrCurve curve = curve_for(model, grid, cfg);

  std::ostringstream csv;
  write_dr_csv(csv, {curve});
  write_text_file(out_file, csv.str());
  emit_manifest(out_file, "drcurve", cfg, seed, file_digest(model_path),
                {{"rate_min", format_double(min_rate)},
                 {"rate_max", format_double(max_rate)},
                 {"rate_step", format_double(step)}});

  log << "drcurve: " << family_name(curve.family)
      << " I=" << curve.component_count << ", " << curve.points.size()
      << " rates in [" << fmt6(min_rate) << ", " << fmt6(max_rate) << "]\n";
  return curve;
}

CompareResult run_compare(const CompareOptions& options,
                          const std::string& out_file,
                          const PipelineConfig& cfg, std::uint64_t seed,
                          std::ostream& log) {
  if (options.model_paths.size() < 2) {
    throw DataError("compare: need at least two models");
  }
  if (options.rounds < 1) throw DataError("compare: rounds must be >= 1");

  std::vector<LoadedModel> models;
  models.reserve(options.model_paths.size());
  for (const auto& path : options.model_paths) {
    models.push_back(read_model_json(path));
    if (models.back().lsf_order() != models.front().lsf_order()) {
      throw DataError("compare: models disagree on the LSF order (" +
                      std::to_string(models.back().lsf_order()) + " vs " +
                      std::to_string(models.front().lsf_order()) + ")");
    }
  }
  const std::vector<double> grid =
      make_rate_grid(options.min_rate, options.max_rate, options.step);

  CompareResult result;
  for (const auto& model : models) {
    result.labels.push_back(family_name(model.family) + "[I=" +
                            std::to_string(model.component_count()) + "]");
  }

  if (options.rounds == 1) {
    for (const auto& model : models) {
      result.curves.push_back(curve_for(model, grid, cfg));
    }
  } else {
    if (options.data_path.empty()) {
      throw DataError("compare: --rounds needs a data corpus to refit from");
    }
    const Corpus corpus =
        load_corpus(options.data_path, cfg.train_fraction, seed);
    if (corpus.order != models.front().lsf_order()) {
      throw DataError("compare: corpus order " +
                      std::to_string(corpus.order) +
                      " does not match the models");
    }
    for (const auto& model : models) {
      const ModelFamily family = model.family;
      const int components = model.component_count();
      std::vector<std::future<DrCurve>> rounds;
      rounds.reserve(options.rounds);
      for (int r = 0; r < options.rounds; ++r) {
        rounds.push_back(std::async(
            std::launch::async, [&corpus, &grid, &cfg, &options, family,
                                 components, seed, r] {
              const std::uint64_t round_seed = seed + static_cast<std::uint64_t>(r);
              std::vector<LsfVector> rows;
              if (options.bootstrap) {
                Rng boot(round_seed);
                rows.reserve(corpus.train.size());
                for (std::size_t j = 0; j < corpus.train.size(); ++j) {
                  rows.push_back(
                      corpus.train[boot.below(corpus.train.size())]);
                }
              } else {
                rows = corpus.train;
              }
              const LoadedModel fitted =
                  fit_family(family, components, rows, cfg, round_seed);
              return curve_for(fitted, grid, cfg);
            }));
      }
      DrCurve mean = rounds.front().get();
      for (int r = 1; r < options.rounds; ++r) {
        const DrCurve curve = rounds[r].get();
        for (std::size_t g = 0; g < mean.points.size(); ++g) {
          mean.points[g].d_x += curve.points[g].d_x;
          mean.points[g].d_v += curve.points[g].d_v;
          mean.points[g].d_s += curve.points[g].d_s;
          mean.points[g].valid = mean.points[g].valid && curve.points[g].valid;
        }
      }
      for (auto& point : mean.points) {
        point.d_x /= options.rounds;
        point.d_v /= options.rounds;
        point.d_s /= options.rounds;
      }
      result.curves.push_back(std::move(mean));
    }
  }

  const std::size_t m = result.curves.size();
  result.ratios.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      double sum = 0.0;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        sum += result.curves[a].points[g].d_s / result.curves[b].points[g].d_s;
      }
      result.ratios[a][b] = sum / static_cast<double>(grid.size());
    }
  }

  std::ostringstream csv;
  write_dr_csv(csv, result.curves);
  write_text_file(out_file, csv.str());

  std::string digest_feed;
  for (const auto& path : options.model_paths) {
    digest_feed += file_digest(path) + "\n";
  }
  if (!options.data_path.empty()) {
    digest_feed += file_digest(options.data_path) + "\n";
  }
  emit_manifest(out_file, "compare", cfg, seed, content_digest(digest_feed),
                {{"models", std::to_string(m)},
                 {"rate_min", format_double(options.min_rate)},
                 {"rate_max", format_double(options.max_rate)},
                 {"rate_step", format_double(options.step)},
                 {"rounds", std::to_string(options.rounds)},
                 {"bootstrap", options.bootstrap ? "1" : "0"}});

  log << "compare: mean frequency-domain distortion ratios over "
      << grid.size() << " rates"
      << (options.rounds > 1
              ? " (" + std::to_string(options.rounds) + " rounds)"
              : "")
      << "\n";
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      log << "  " << result.labels[a] << " / " << result.labels[b] << " = "
          << fmt6(result.ratios[a][b]) << "\n";
    }
  }
  return result;
}

GapReport run_gap(const std::string& model_path, int mc_samples,
                  const std::string& out_file, const PipelineConfig& cfg,
                  std::uint64_t seed, std::ostream& log) {
  const LoadedModel model = read_model_json(model_path);
  if (model.family != ModelFamily::kVmm) {
    throw DataError("gap: the entropy-gap diagnostic needs a vmm model");
  }
  const GapReport report = entropy_gap(model.vmm, mc_samples, seed);

  if (!out_file.empty()) {
    std::string body = "{\n";
    body += "  \"lhs\": " + format_double(report.lhs) + ",\n";
    body += "  \"mc_entropy\": " + format_double(report.mc_entropy) + ",\n";
    body += "  \"gap\": " + format_double(report.gap) + ",\n";
    body += "  \"std_error\": " + format_double(report.std_error) + ",\n";
    body += "  \"samples\": " + std::to_string(mc_samples) + "\n";
    body += "}\n";
    write_text_file(out_file, body);
    emit_manifest(out_file, "gap", cfg, seed, file_digest(model_path),
                  {{"samples", std::to_string(mc_samples)}});
  }

  log << "gap: ln I + sum pi h = " << fmt6(report.lhs)
      << ", MC entropy = " << fmt6(report.mc_entropy) << ", gap = "
      << fmt6(report.gap) << " +- " << fmt6(report.std_error) << " nats\n";
  return report;
}

void run_synth(const std::string& out_dir, int files, double seconds,
               const PipelineConfig& cfg, std::uint64_t seed,
               std::ostream& log) {
  if (files < 1) throw DataError("synth: files must be >= 1");
  if (!(seconds > 0.0)) throw DataError("synth: seconds must be positive");
  validate_config(cfg.analysis);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw DataError("synth: cannot create '" + out_dir + "': " + ec.message());
  }

  const int sr = cfg.analysis.sample_rate_hz;
  const auto n = static_cast<std::size_t>(std::lround(seconds * sr));
  Rng rng(seed);
  for (int f = 0; f < files; ++f) {
    std::vector<double> mix(n, 0.0);
    add_ar_layer(mix, cfg.analysis.lpc_order, 0.12, 0.25, sr, rng);
    add_ar_layer(mix, cfg.analysis.lpc_order, 0.20, 0.40, sr, rng);

    double peak = 0.0;
    for (double v : mix) peak = std::max(peak, std::abs(v));
    if (peak > 0.0) {
      for (double& v : mix) v *= 0.8 / peak;
    }
    char name[32];
    std::snprintf(name, sizeof(name), "synth_%03d.wav", f);
    write_wav((fs::path(out_dir) / name).string(), mix, sr);
  }

  emit_manifest((fs::path(out_dir) / "synth").string(), "synth", cfg, seed,
                content_digest("files=" + std::to_string(files) +
                               " seconds=" + format_double(seconds)),
                {{"files", std::to_string(files)},
                 {"seconds", format_double(seconds)}});
  log << "synth: wrote " << files << " files x " << fmt6(seconds) << " s @ "
      << sr << " Hz into " << out_dir << "\n";
}

}  // namespace vvq
