#include "vvq/model_io.hpp"

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "vvq/errors.hpp"

namespace vvq {

namespace {

using nlohmann::json;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + path + "'");
}

void append_array(std::string* out, const std::vector<double>& values) {
  out->push_back('[');
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out->push_back(',');
    *out += format_double(values[i]);
  }
  out->push_back(']');
}

// Shared JSON assembly: `dim` is the native parameter dimension and
// `body(i)` renders component i's parameter fields.
template <typename Body>
std::string render_model(const std::string& family, int dim,
                         const std::vector<double>& weights,
                         const ModelMeta& meta, Body&& body) {
  std::string out;
  out += "{\n";
  out += "  \"version\": " + std::to_string(kModelSchemaVersion) + ",\n";
  out += "  \"family\": \"" + family + "\",\n";
  out += "  \"dim\": " + std::to_string(dim) + ",\n";
  out += "  \"weights\": ";
  append_array(&out, weights);
  out += ",\n  \"components\": [\n";
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out += "    {";
    out += body(i);
    out += (i + 1 < weights.size()) ? "},\n" : "}\n";
  }
  out += "  ],\n";
  out += "  \"meta\": {\n";
  out += "    \"seed\": " + std::to_string(meta.seed) + ",\n";
  out += "    \"iterations\": " + std::to_string(meta.iterations) + ",\n";
  out += "    \"loglik\": " + format_double(meta.loglik) + ",\n";
  out += "    \"converged\": " + std::string(meta.converged ? "true" : "false") + ",\n";
  out += "    \"mean_sum_v\": " + format_double(meta.mean_sum_v) + ",\n";
  out += "    \"train_count\": " + std::to_string(meta.train_count) + "\n";
  out += "  }\n";
  out += "}\n";
  return out;
}

std::vector<double> to_doubles(const json& node, const char* what) {
  if (!node.is_array()) {
    throw DataError(std::string("model JSON: ") + what + " must be an array");
  }
  std::vector<double> out;
  out.reserve(node.size());
  for (const auto& v : node) {
    if (!v.is_number()) {
      throw DataError(std::string("model JSON: ") + what +
                      " holds a non-numeric entry");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

ModelMeta parse_meta(const json& doc) {
  ModelMeta meta;
  if (!doc.contains("meta")) return meta;
  const auto& m = doc["meta"];
  meta.seed = m.value("seed", std::uint64_t{0});
  meta.iterations = m.value("iterations", 0);
  meta.loglik = m.value("loglik", 0.0);
  meta.converged = m.value("converged", false);
  meta.mean_sum_v = m.value("mean_sum_v", 0.0);
  meta.train_count = m.value("train_count", std::size_t{0});
  return meta;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string content_digest(const std::string& bytes) {
  std::uint64_t hash = 14695981039346656037ull;  // FNV offset basis
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;  // FNV prime
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

std::string file_digest(const std::string& path) {
  return content_digest(slurp(path));
}

void write_lsf_text(const std::string& path,
                    const std::vector<LsfVector>& rows, int sample_rate) {
  if (rows.empty()) throw DataError("write_lsf_text: no vectors to write");
  const std::size_t order = rows[0].values.size();
  std::string out;
  out += "#K=" + std::to_string(order) +
         " sample_rate=" + std::to_string(sample_rate) + "\n";
  for (const auto& row : rows) {
    if (row.values.size() != order) {
      throw DataError("write_lsf_text: rows have inconsistent orders");
    }
    for (std::size_t i = 0; i < order; ++i) {
      if (i > 0) out.push_back(' ');
      out += format_double(row.values[i]);
    }
    out.push_back('\n');
  }
  spit(path, out);
}

LsfFile read_lsf_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("read_lsf_text: cannot open '" + path + "'");

  LsfFile file;
  std::string line;
  if (!std::getline(in, line) ||
      std::sscanf(line.c_str(), "#K=%d sample_rate=%d", &file.order,
                  &file.sample_rate) != 2) {
    throw DataError("read_lsf_text: missing '#K=<order> sample_rate=<hz>' "
                    "header in '" + path + "'");
  }
  if (file.order < 1 || file.sample_rate < 1) {
    throw DataError("read_lsf_text: nonsensical header in '" + path + "'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    LsfVector row;
    row.values.reserve(file.order);
    double v;
    while (fields >> v) row.values.push_back(v);
    if (static_cast<int>(row.values.size()) != file.order) {
      throw DataError("read_lsf_text: line " + std::to_string(line_no) +
                      " of '" + path + "' does not hold " +
                      std::to_string(file.order) + " values");
    }
    file.rows.push_back(std::move(row));
  }
  if (file.rows.empty()) {
    throw DataError("read_lsf_text: '" + path + "' holds no vectors");
  }
  return file;
}

int LoadedModel::component_count() const {
  switch (family) {
    case ModelFamily::kVmm:
      return vmm.size();
    case ModelFamily::kGmm:
      return gmm.size();
    case ModelFamily::kDmm:
      return dmm.size();
  }
  return 0;
}

int LoadedModel::lsf_order() const {
  switch (family) {
    case ModelFamily::kVmm:
      return vmm.dim() - 1;  // sphere coordinates carry one extra dimension
    case ModelFamily::kGmm:
      return gmm.dim();
    case ModelFamily::kDmm:
      return dmm.dim() - 1;  // simplex carries the residual cell
  }
  return 0;
}

void write_model_json(const std::string& path, const VmfMixture& model,
                      const ModelMeta& meta) {
  validate_mixture(model);
  spit(path, render_model("vmm", model.dim(), model.weights, meta,
                          [&](std::size_t i) {
                            std::string body = "\"mu\": ";
                            append_array(&body, model.components[i].mu);
                            body += ", \"lambda\": " +
                                    format_double(model.components[i].lambda);
                            return body;
                          }));
}

void write_model_json(const std::string& path, const GaussMixture& model,
                      const ModelMeta& meta) {
  spit(path, render_model("gmm", model.dim(), model.weights, meta,
                          [&](std::size_t i) {
                            const auto& comp = model.components[i];
                            std::string body = "\"mean\": ";
                            append_array(&body, comp.mean);
                            body += ", \"covariance\": [";
                            for (std::size_t r = 0; r < comp.covariance.size();
                                 ++r) {
                              if (r > 0) body.push_back(',');
                              append_array(&body, comp.covariance[r]);
                            }
                            body += "]";
                            return body;
                          }));
}

void write_model_json(const std::string& path, const DirichletMixture& model,
                      const ModelMeta& meta) {
  spit(path, render_model("dmm", model.dim(), model.weights, meta,
                          [&](std::size_t i) {
                            std::string body = "\"alpha\": ";
                            append_array(&body, model.components[i].alpha);
                            return body;
                          }));
}

LoadedModel read_model_json(const std::string& path) {
  json doc;
  try {
    doc = json::parse(slurp(path));
  } catch (const json::parse_error& err) {
    throw DataError("model JSON: cannot parse '" + path + "': " + err.what());
  }

  if (!doc.contains("family") || !doc.contains("weights") ||
      !doc.contains("components") || !doc.contains("dim")) {
    throw DataError("model JSON: '" + path +
                    "' is missing family/dim/weights/components");
  }
  const std::string family = doc["family"].get<std::string>();
  const int dim = doc["dim"].get<int>();
  const auto weights = to_doubles(doc["weights"], "weights");
  const auto& comps = doc["components"];
  if (!comps.is_array() || comps.size() != weights.size() || weights.empty()) {
    throw DataError("model JSON: components do not match weights");
  }

  LoadedModel out;
  out.meta = parse_meta(doc);
  if (family == "vmm") {
    out.family = ModelFamily::kVmm;
    out.vmm.weights = weights;
    out.vmm.components.resize(comps.size());
    for (std::size_t i = 0; i < comps.size(); ++i) {
      out.vmm.components[i].mu = to_doubles(comps[i].at("mu"), "mu");
      out.vmm.components[i].lambda = comps[i].at("lambda").get<double>();
      if (out.vmm.components[i].dim() != dim) {
        throw DataError("model JSON: component dimension mismatch");
      }
    }
    validate_mixture(out.vmm);
  } else if (family == "gmm") {
    out.family = ModelFamily::kGmm;
    out.gmm.weights = weights;
    out.gmm.components.resize(comps.size());
    for (std::size_t i = 0; i < comps.size(); ++i) {
      auto& comp = out.gmm.components[i];
      comp.mean = to_doubles(comps[i].at("mean"), "mean");
      const auto& cov = comps[i].at("covariance");
      if (!cov.is_array() || static_cast<int>(cov.size()) != dim ||
          comp.dim() != dim) {
        throw DataError("model JSON: covariance dimension mismatch");
      }
      comp.covariance.resize(dim);
      for (int r = 0; r < dim; ++r) {
        comp.covariance[r] = to_doubles(cov[r], "covariance row");
        if (static_cast<int>(comp.covariance[r].size()) != dim) {
          throw DataError("model JSON: covariance is not square");
        }
      }
    }
  } else if (family == "dmm") {
    out.family = ModelFamily::kDmm;
    out.dmm.weights = weights;
    out.dmm.components.resize(comps.size());
    for (std::size_t i = 0; i < comps.size(); ++i) {
      out.dmm.components[i].alpha = to_doubles(comps[i].at("alpha"), "alpha");
      if (out.dmm.components[i].dim() != dim) {
        throw DataError("model JSON: alpha dimension mismatch");
      }
    }
  } else {
    throw DataError("model JSON: unknown family '" + family + "'");
  }
  return out;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
  json doc;
  doc["tool_version"] = manifest.tool_version;
  doc["command"] = manifest.command;
  doc["seed"] = manifest.seed;
  doc["input_digest"] = manifest.input_digest;
  doc["config"] = manifest.config;
  if (manifest.timestamp.empty()) {
    char stamp[32];
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &utc);
    doc["timestamp"] = stamp;
  } else {
    doc["timestamp"] = manifest.timestamp;
  }
  spit(path, doc.dump(2) + "\n");
}

RunManifest read_manifest(const std::string& path) {
  json doc;
  try {
    doc = json::parse(slurp(path));
  } catch (const json::parse_error& err) {
    throw DataError("manifest: cannot parse '" + path + "': " + err.what());
  }
  RunManifest out;
  out.tool_version = doc.value("tool_version", std::string());
  out.command = doc.value("command", std::string());
  out.seed = doc.value("seed", std::uint64_t{0});
  out.input_digest = doc.value("input_digest", std::string());
  out.timestamp = doc.value("timestamp", std::string());
  if (doc.contains("config")) {
    for (const auto& [key, value] : doc["config"].items()) {
      out.config[key] = value.get<std::string>();
    }
  }
  return out;
}

}  // namespace vvq
