#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vvq/errors.hpp"
#include "vvq/pipeline.hpp"

namespace {

vvq::ModelFamily parse_family(const std::string& name) {
  if (name == "vmm") return vvq::ModelFamily::kVmm;
  if (name == "gmm") return vvq::ModelFamily::kGmm;
  return vvq::ModelFamily::kDmm;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PDF-optimized vector quantization analysis of LSF parameters"};
  app.require_subcommand(1);
  app.set_version_flag("--version", vvq::kToolVersion);

  std::uint64_t seed = 0;
  std::string config_path;
  std::string out_path;
  app.add_option("--seed", seed, "seed for every random choice");
  app.add_option("--config", config_path, "key=value settings file");
  app.add_option("--out", out_path, "output file (or directory for synth)");

  auto* extract = app.add_subcommand(
      "extract", "WAV directory -> LSF text file");
  extract->fallthrough();
  std::string in_dir;
  extract->add_option("dir", in_dir, "directory of WAV files")->required();

  auto* fit = app.add_subcommand("fit", "LSF corpus -> mixture model JSON");
  fit->fallthrough();
  std::string fit_data;
  std::string family = "vmm";
  int components = 16;
  fit->add_option("data", fit_data, "LSF text file")->required();
  fit->add_option("--family", family, "vmm, gmm, or dmm")
      ->check(CLI::IsMember({"vmm", "gmm", "dmm"}));
  fit->add_option("--components", components, "mixture components")
      ->check(CLI::PositiveNumber);

  auto* drcurve =
      app.add_subcommand("drcurve", "model JSON -> distortion-rate CSV");
  drcurve->fallthrough();
  std::string curve_model;
  double rate_min = 20.0;
  double rate_max = 60.0;
  double rate_step = 1.0;
  drcurve->add_option("model", curve_model, "model JSON file")->required();
  drcurve->add_option("--rate-min", rate_min, "grid start");
  drcurve->add_option("--rate-max", rate_max, "grid end (inclusive)");
  drcurve->add_option("--rate-step", rate_step, "grid spacing");

  auto* compare = app.add_subcommand(
      "compare", "two or more models -> merged CSV + ratio table");
  compare->fallthrough();
  vvq::CompareOptions copts;
  compare->add_option("models", copts.model_paths, "model JSON files")
      ->required()
      ->expected(2, -1);
  compare->add_option("--rate-min", copts.min_rate, "grid start");
  compare->add_option("--rate-max", copts.max_rate, "grid end (inclusive)");
  compare->add_option("--rate-step", copts.step, "grid spacing");
  compare->add_option("--rounds", copts.rounds,
                      "refit rounds with per-round seeds");
  compare->add_option("--data", copts.data_path,
                      "LSF corpus for refits (needed when --rounds > 1)");
  compare->add_flag("--bootstrap", copts.bootstrap,
                    "resample the training split each round");

  auto* gap =
      app.add_subcommand("gap", "independence-approximation entropy gap");
  gap->fallthrough();
  std::string gap_model;
  int gap_samples = 200000;
  gap->add_option("model", gap_model, "vmm model JSON file")->required();
  gap->add_option("--samples", gap_samples, "Monte Carlo sample count");

  auto* synth =
      app.add_subcommand("synth", "generate a synthetic WAV corpus");
  synth->fallthrough();
  int synth_files = 4;
  double synth_seconds = 2.0;
  synth->add_option("--files", synth_files, "number of files");
  synth->add_option("--seconds", synth_seconds, "duration per file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? vvq::kExitOk : vvq::kExitUsage;
  }

  try {
    const vvq::PipelineConfig cfg = config_path.empty()
                                        ? vvq::PipelineConfig{}
                                        : vvq::load_pipeline_config(config_path);
    if (out_path.empty() && !gap->parsed()) {
      std::cerr << app.get_name() << ": --out is required\n";
      return vvq::kExitUsage;
    }
    if (extract->parsed()) {
      vvq::run_extract(in_dir, out_path, cfg, seed, std::cout);
    } else if (fit->parsed()) {
      vvq::run_fit(fit_data, parse_family(family), components, out_path, cfg,
                   seed, std::cout);
    } else if (drcurve->parsed()) {
      vvq::run_drcurve(curve_model, rate_min, rate_max, rate_step, out_path,
                       cfg, seed, std::cout);
    } else if (compare->parsed()) {
      vvq::run_compare(copts, out_path, cfg, seed, std::cout);
    } else if (gap->parsed()) {
      vvq::run_gap(gap_model, gap_samples, out_path, cfg, seed, std::cout);
    } else if (synth->parsed()) {
      vvq::run_synth(out_path, synth_files, synth_seconds, cfg, seed,
                     std::cout);
    }
  } catch (const vvq::DataError& err) {
    std::cerr << "data error: " << err.what() << "\n";
    return vvq::kExitData;
  } catch (const vvq::NumericError& err) {
    std::cerr << "numeric error: " << err.what() << "\n";
    return vvq::kExitNumeric;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return vvq::kExitNumeric;
  }
  return vvq::kExitOk;
}
