#include "paudit/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "paudit/rng.hpp"

namespace paudit {

using nlohmann::json;

namespace {

void require_file(const std::string& path, const std::string& json_path) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError(json_path, "referenced file does not exist: " + path);
  }
}

template <typename T>
T get_field(const json& j, const std::string& parent, const char* key,
            const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(parent + "/" + key, e.what());
  }
}

BackendConfig parse_backend(const json& j, const std::string& path,
                            const BackendConfig& defaults) {
  BackendConfig b = defaults;
  const std::string kind = get_field<std::string>(j, path, "kind", "synthetic");
  if (kind == "http_chat") {
    b.kind = BackendConfig::Kind::http_chat;
  } else if (kind == "synthetic") {
    b.kind = BackendConfig::Kind::synthetic;
  } else {
    throw ConfigError(path + "/kind", "must be http_chat or synthetic");
  }
  b.endpoint = get_field<std::string>(j, path, "endpoint", b.endpoint);
  b.model = get_field<std::string>(j, path, "model", b.model);
  b.auth_env = get_field<std::string>(j, path, "auth_env", b.auth_env);
  b.temperature = get_field<double>(j, path, "temperature", b.temperature);
  b.max_tokens = get_field<int>(j, path, "max_tokens", b.max_tokens);
  b.timeout_seconds =
      get_field<double>(j, path, "timeout_seconds", b.timeout_seconds);
  b.max_parallel = get_field<int>(j, path, "max_parallel", b.max_parallel);
  b.retry.count = get_field<int>(j, path, "retry_count", b.retry.count);
  b.retry.backoff_seconds =
      get_field<double>(j, path, "retry_backoff_seconds",
                        b.retry.backoff_seconds);
  b.seed = get_field<std::uint64_t>(j, path, "seed", b.seed);
  try {
    b.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  return b;
}

}  // namespace

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return from_json(os.str());
}

RunConfig RunConfig::from_json(const std::string& content) {
  json j;
  try {
    j = json::parse(content);
  } catch (const json::exception& e) {
    throw ConfigError("/", std::string("invalid JSON: ") + e.what());
  }
  RunConfig cfg;

  if (j.contains("population")) {
    const json& p = j["population"];
    const std::string path = "/population";
    cfg.population.size = get_field<int>(p, path, "size", cfg.population.size);
    cfg.population.age_mean =
        get_field<double>(p, path, "age_mean", cfg.population.age_mean);
    cfg.population.age_sd =
        get_field<double>(p, path, "age_sd", cfg.population.age_sd);
    cfg.population.age_min =
        get_field<int>(p, path, "age_min", cfg.population.age_min);
    cfg.population.age_max =
        get_field<int>(p, path, "age_max", cfg.population.age_max);
    if (p.contains("proportions")) {
      for (const auto& [key, value] : p["proportions"].items()) {
        FactorId f;
        try {
          f = factor_from_name(key);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(path + "/proportions/" + key, e.what());
        }
        cfg.population.binary_proportions[f] = value.get<double>();
      }
    }
    try {
      cfg.population.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path, e.what());
    }
  }

  if (j.contains("backend")) {
    cfg.backend = parse_backend(j["backend"], "/backend", BackendConfig{});
  }
  cfg.judge = j.contains("judge")
                  ? parse_backend(j["judge"], "/judge", cfg.backend)
                  : cfg.backend;

  cfg.studies =
      get_field<std::vector<std::string>>(j, "", "studies", cfg.studies);
  for (const auto& name :
       get_field<std::vector<std::string>>(j, "", "domains", {})) {
    try {
      cfg.domains.push_back(domain_from_name(name));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("/domains", e.what());
    }
  }
  for (const auto& name :
       get_field<std::vector<std::string>>(j, "", "factors", {})) {
    try {
      cfg.factors.push_back(factor_from_name(name));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("/factors", e.what());
    }
  }
  for (const auto& name :
       get_field<std::vector<std::string>>(j, "", "modes", {})) {
    try {
      cfg.modes.push_back(mode_from_name(name));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("/modes", e.what());
    }
  }

  cfg.alpha = get_field<double>(j, "", "alpha", cfg.alpha);
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw ConfigError("/alpha", "must be in (0, 1)");
  }
  cfg.seed = get_field<std::uint64_t>(j, "", "seed", cfg.seed);
  cfg.population.seed = cfg.seed;
  cfg.reference_year =
      get_field<int>(j, "", "reference_year", cfg.reference_year);
  cfg.cache_dir = get_field<std::string>(j, "", "cache_dir", cfg.cache_dir);
  cfg.results_dir =
      get_field<std::string>(j, "", "results_dir", cfg.results_dir);

  cfg.name_table_path = get_field<std::string>(j, "", "name_table", "");
  if (!cfg.name_table_path.empty()) {
    require_file(cfg.name_table_path, "/name_table");
  }
  if (j.contains("lexica")) {
    for (const auto& [name, path] : j["lexica"].items()) {
      const std::string p = path.get<std::string>();
      require_file(p, "/lexica/" + name);
      cfg.lexica[name] = p;
    }
  }
  cfg.vignettes_path = get_field<std::string>(j, "", "vignettes", "");
  if (!cfg.vignettes_path.empty()) require_file(cfg.vignettes_path, "/vignettes");
  cfg.beliefs_path = get_field<std::string>(j, "", "beliefs", "");
  if (!cfg.beliefs_path.empty()) require_file(cfg.beliefs_path, "/beliefs");
  cfg.validation_path = get_field<std::string>(j, "", "validation", "");
  if (!cfg.validation_path.empty()) {
    require_file(cfg.validation_path, "/validation");
  }

  if (j.contains("features")) {
    const json& f = j["features"];
    cfg.features.orders = get_field<std::vector<int>>(f, "/features", "orders",
                                                      cfg.features.orders);
    cfg.features.min_doc_count = get_field<int>(f, "/features", "min_doc_count",
                                                cfg.features.min_doc_count);
  }
  const std::string alignment =
      get_field<std::string>(j, "", "alignment", "intersection");
  if (alignment == "intersection") {
    cfg.alignment = Alignment::intersection;
  } else if (alignment == "union_zero_fill") {
    cfg.alignment = Alignment::union_zero_fill;
  } else {
    throw ConfigError("/alignment", "must be intersection or union_zero_fill");
  }
  cfg.wordcloud_max_terms =
      get_field<int>(j, "", "wordcloud_max_terms", cfg.wordcloud_max_terms);
  return cfg;
}

std::string RunConfig::canonical_json() const {
  json j;
  j["alpha"] = alpha;
  j["seed"] = seed;
  j["reference_year"] = reference_year;
  j["alignment"] =
      alignment == Alignment::intersection ? "intersection" : "union_zero_fill";
  j["wordcloud_max_terms"] = wordcloud_max_terms;
  json pop;
  pop["size"] = population.size;
  pop["age_mean"] = population.age_mean;
  pop["age_sd"] = population.age_sd;
  pop["age_min"] = population.age_min;
  pop["age_max"] = population.age_max;
  json proportions;
  for (const auto& [f, p] : population.binary_proportions) {
    proportions[factor_name(f)] = p;
  }
  pop["proportions"] = std::move(proportions);
  j["population"] = std::move(pop);
  j["backend"] = backend.fingerprint();
  j["judge"] = judge.fingerprint();
  j["studies"] = studies;
  json domain_names = json::array();
  for (Domain d : domains) domain_names.push_back(domain_name(d));
  j["domains"] = std::move(domain_names);
  json factor_names = json::array();
  for (FactorId f : factors) factor_names.push_back(factor_name(f));
  j["factors"] = std::move(factor_names);
  json mode_names = json::array();
  for (PromptMode m : modes) mode_names.push_back(mode_name(m));
  j["modes"] = std::move(mode_names);
  json feat;
  feat["orders"] = features.orders;
  feat["min_doc_count"] = features.min_doc_count;
  j["features"] = std::move(feat);
  j["name_table"] = name_table_path;
  j["lexica"] = lexica;
  // nlohmann::json objects iterate in sorted key order, so dump() is canonical.
  return j.dump();
}

std::string RunConfig::fingerprint() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash64(canonical_json())));
  return buf;
}

}  // namespace paudit
