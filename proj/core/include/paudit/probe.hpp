#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "paudit/features.hpp"
#include "paudit/persona.hpp"

namespace paudit {

enum class Domain { palestine, parenting, immigration, policing, legalization };
enum class Construct { offensive, stigmatizing };

std::string domain_name(Domain d);
Domain domain_from_name(const std::string& name);
std::string construct_name(Construct c);
Construct construct_from_name(const std::string& name);
FactorId domain_factor(Domain d);

struct RetryPolicy {
  int count = 3;
  double backoff_seconds = 0.5;
};

struct BackendConfig {
  enum class Kind { http_chat, synthetic };
  Kind kind = Kind::synthetic;
  std::string endpoint;  // full chat-completions URL (http_chat)
  std::string model;
  std::string auth_env = "OPENAI_API_KEY";
  double temperature = 0.7;
  int max_tokens = 512;
  double timeout_seconds = 30.0;
  int max_parallel = 4;
  RetryPolicy retry;
  std::uint64_t seed = 0;

  void validate() const;
  // Stable identity of (backend kind, model, decoding params).
  std::string fingerprint() const;
};

struct Vignette {
  std::string id;
  Construct construct = Construct::offensive;
  std::vector<std::string> posts;  // exactly 5
  // Rating question; `{post}` is replaced with the post text.
  std::string question_template;

  void validate() const;
};

struct BeliefQuestion {
  std::string id;
  Domain domain = Domain::palestine;
  FactorId factor = FactorId::age;
  std::string text;
};

struct ValidationQuestion {
  std::string id;
  Domain domain = Domain::palestine;
  FactorId factor = FactorId::age;
  // Question following the -1/0/1 answer convention; the generation text is
  // appended after it.
  std::string text;
};

std::vector<Vignette> vignettes_from_json(const std::string& content);
std::vector<BeliefQuestion> belief_questions_from_json(
    const std::string& content);
std::vector<ValidationQuestion> validation_questions_from_json(
    const std::string& content);

struct GenerationRecord {
  int persona_id = 0;
  std::string prompt;
  std::string response;
  std::string timestamp;
  std::uint64_t cache_key = 0;
  bool missing = false;
};

struct Corpus {
  Domain domain = Domain::palestine;
  FactorId factor = FactorId::age;
  PromptMode mode = PromptMode::explicit_persona;
  std::vector<FactorId> prompt_factors;
  std::string backend_fingerprint;
  std::vector<GenerationRecord> records;

  // Non-missing responses as documents keyed by persona id.
  std::vector<Document> documents() const;
  // Factor values aligned with documents().
  std::vector<double> factor_values(const PersonaSet& personas) const;

  std::string to_jsonl() const;
  static Corpus from_jsonl(const std::string& content);
};

struct AnnotationTable {
  Construct construct = Construct::offensive;
  std::string vignette_id;
  FactorId factor = FactorId::age;
  PromptMode mode = PromptMode::explicit_persona;
  std::vector<int> persona_ids;
  // One row per persona, 5 entries of {0, 1}, -1 for missing.
  std::vector<std::vector<int>> labels;

  // Mean label per persona, missing entries excluded; nullopt when a row is
  // entirely missing.
  std::vector<std::optional<double>> persona_averages() const;

  std::string to_jsonl() const;
  static AnnotationTable from_jsonl(const std::string& content);
};

// First standalone -1/0/1 token scanning left to right; nullopt otherwise.
std::optional<int> parse_judgment(const std::string& text);
// Case-insensitive leading yes/no (1/0).
std::optional<int> parse_yes_no(const std::string& text);

struct BackendError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CompletionRequest {
  std::string prompt;
  const Persona* persona = nullptr;
  std::string task_id;
  int attempt = 0;  // >0 bypasses the cache lookup
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const CompletionRequest& req) = 0;
  virtual std::string fingerprint() const = 0;
};

// Append-only JSON Lines response cache.
class ResponseCache {
 public:
  ResponseCache() = default;  // in-memory only
  explicit ResponseCache(const std::string& path);

  struct Entry {
    std::string response;
    std::string timestamp;
  };

  std::optional<Entry> get(std::uint64_t key) const;
  void put(std::uint64_t key, const std::string& prompt, const Entry& entry);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::unordered_map<std::uint64_t, Entry> entries_;
  std::string path_;
};

struct SyntheticModel;  // see synthetic.hpp

std::unique_ptr<Backend> make_backend(const BackendConfig& cfg,
                                      const SyntheticModel* model = nullptr);

// Caching, retrying front-end over a backend.
class Prober {
 public:
  Prober(const BackendConfig& cfg, ResponseCache* cache = nullptr,
         const SyntheticModel* model = nullptr);
  Prober(const BackendConfig& cfg, std::unique_ptr<Backend> backend,
         ResponseCache* cache = nullptr);

  std::uint64_t cache_key(const CompletionRequest& req) const;
  // Cache-transparent completion with retry on transient failure.
  std::string complete(const CompletionRequest& req);
  GenerationRecord complete_record(const CompletionRequest& req);

  AnnotationTable run_annotation(const PersonaSet& personas,
                                 const Vignette& vignette, PromptMode mode,
                                 const std::vector<FactorId>& factors);
  Corpus run_generation(const PersonaSet& personas, const BeliefQuestion& q,
                        PromptMode mode, const std::vector<FactorId>& factors);
  // Scores aligned with corpus.records; nullopt where missing or unparseable
  // after 3 attempts.
  std::vector<std::optional<int>> run_validation(
      const Corpus& corpus, const ValidationQuestion& vq);

  const BackendConfig& config() const { return cfg_; }
  std::size_t network_calls() const { return network_calls_; }

 private:
  BackendConfig cfg_;
  std::unique_ptr<Backend> backend_;
  ResponseCache* cache_ = nullptr;
  std::size_t network_calls_ = 0;
  std::mutex counter_mutex_;

  void parallel_over(std::size_t n, const std::function<void(std::size_t)>& fn);
};

}  // namespace paudit
