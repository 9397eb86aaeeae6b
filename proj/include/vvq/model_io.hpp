#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vvq/baselines.hpp"
#include "vvq/mixture_em.hpp"
#include "vvq/rate_allocation.hpp"
#include "vvq/types.hpp"

namespace vvq {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kModelSchemaVersion = 1;

// Decimal text with 17 significant digits: every double round-trips to the
// identical bit pattern.
std::string format_double(double value);

// FNV-1a 64-bit digest as a fixed-width hex string.
std::string content_digest(const std::string& bytes);
std::string file_digest(const std::string& path);

// ---------------------------------------------------------------------------
// LSF text files: header line `#K=<order> sample_rate=<hz>`, then one
// space-separated vector per line.
// ---------------------------------------------------------------------------

struct LsfFile {
  int order = 0;
  int sample_rate = 0;
  std::vector<LsfVector> rows;
};

void write_lsf_text(const std::string& path,
                    const std::vector<LsfVector>& rows, int sample_rate);
LsfFile read_lsf_text(const std::string& path);

// ---------------------------------------------------------------------------
// Model JSON: one schema for the three families, tagged by `family`.
// Numbers are written with 17 significant digits so reload is bit-stable.
// ---------------------------------------------------------------------------

struct ModelMeta {
  std::uint64_t seed = 0;
  int iterations = 0;
  double loglik = 0.0;
  bool converged = false;
  double mean_sum_v = 0.0;  // empirical mean summed spectral gap of the
                            // training vectors, needed for domain mapping
  std::size_t train_count = 0;
};

struct LoadedModel {
  ModelFamily family = ModelFamily::kVmm;
  VmfMixture vmm;
  GaussMixture gmm;
  DirichletMixture dmm;
  ModelMeta meta;

  int component_count() const;
  int lsf_order() const;  // K, regardless of the native parameter dimension
};

void write_model_json(const std::string& path, const VmfMixture& model,
                      const ModelMeta& meta);
void write_model_json(const std::string& path, const GaussMixture& model,
                      const ModelMeta& meta);
void write_model_json(const std::string& path, const DirichletMixture& model,
                      const ModelMeta& meta);

LoadedModel read_model_json(const std::string& path);

// ---------------------------------------------------------------------------
// Run manifests: reproducibility sidecars. Two runs whose manifests agree on
// everything except the timestamp produce byte-identical data outputs.
// ---------------------------------------------------------------------------

struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string command;
  std::uint64_t seed = 0;
  std::string input_digest;
  std::map<std::string, std::string> config;
  std::string timestamp;  // ISO-8601 UTC, filled at write time if empty
};

void write_manifest(const std::string& path, const RunManifest& manifest);
RunManifest read_manifest(const std::string& path);

}  // namespace vvq
