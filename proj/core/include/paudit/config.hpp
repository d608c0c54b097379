#pragma once

#include <map>
#include <string>
#include <vector>

#include "paudit/analysis.hpp"
#include "paudit/persona.hpp"
#include "paudit/probe.hpp"

namespace paudit {

struct ConfigError : std::runtime_error {
  // json_path points at the offending field, e.g. "/backend/max_parallel".
  ConfigError(const std::string& json_path, const std::string& message)
      : std::runtime_error(json_path + ": " + message), path(json_path) {}
  std::string path;
};

struct RunConfig {
  PopulationSpec population;
  BackendConfig backend;
  BackendConfig judge;  // defaults to `backend` when absent
  std::vector<std::string> studies;
  std::vector<Domain> domains;
  std::vector<FactorId> factors;
  std::vector<PromptMode> modes;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int reference_year = 2024;
  std::string cache_dir = "cache";
  std::string results_dir = "results";
  std::string name_table_path;  // empty -> bundled illustrative table
  std::map<std::string, std::string> lexica;  // name -> file path
  std::string vignettes_path;   // optional JSON overrides
  std::string beliefs_path;
  std::string validation_path;
  FeatureParams features;
  Alignment alignment = Alignment::intersection;
  int wordcloud_max_terms = 25;

  static RunConfig from_json(const std::string& content);
  static RunConfig from_json_file(const std::string& path);

  // Canonicalized (sorted-key) JSON of every analysis-relevant field.
  std::string canonical_json() const;
  // Stable hash of canonical_json(), hex-encoded.
  std::string fingerprint() const;
};

}  // namespace paudit
