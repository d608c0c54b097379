#include "paudit/probe.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#ifdef PAUDIT_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <json.hpp>

#include "paudit/rng.hpp"
#include "paudit/synthetic.hpp"

namespace paudit {

using nlohmann::json;

std::string domain_name(Domain d) {
  switch (d) {
    case Domain::palestine: return "palestine";
    case Domain::parenting: return "parenting";
    case Domain::immigration: return "immigration";
    case Domain::policing: return "policing";
    case Domain::legalization: return "legalization";
  }
  throw std::invalid_argument("unknown domain");
}

Domain domain_from_name(const std::string& name) {
  for (Domain d : {Domain::palestine, Domain::parenting, Domain::immigration,
                   Domain::policing, Domain::legalization}) {
    if (domain_name(d) == name) return d;
  }
  throw std::invalid_argument("unknown domain: " + name);
}

std::string construct_name(Construct c) {
  return c == Construct::offensive ? "offensive" : "stigmatizing";
}

Construct construct_from_name(const std::string& name) {
  if (name == "offensive") return Construct::offensive;
  if (name == "stigmatizing") return Construct::stigmatizing;
  throw std::invalid_argument("unknown construct: " + name);
}

FactorId domain_factor(Domain d) {
  switch (d) {
    case Domain::palestine: return FactorId::age;
    case Domain::parenting: return FactorId::gender;
    case Domain::immigration: return FactorId::political_ideology;
    case Domain::policing: return FactorId::race;
    case Domain::legalization: return FactorId::substance_use;
  }
  throw std::invalid_argument("unknown domain");
}

void BackendConfig::validate() const {
  if (max_parallel < 1) {
    throw std::invalid_argument("backend max_parallel must be >= 1");
  }
  if (temperature < 0.0) {
    throw std::invalid_argument("backend temperature must be >= 0");
  }
  if (kind == Kind::http_chat && endpoint.empty()) {
    throw std::invalid_argument("http_chat backend needs an endpoint");
  }
}

std::string BackendConfig::fingerprint() const {
  std::ostringstream os;
  os << (kind == Kind::http_chat ? "http_chat" : "synthetic") << '|' << model
     << '|' << endpoint << "|t=" << temperature << "|max=" << max_tokens
     << "|seed=" << seed;
  return os.str();
}

void Vignette::validate() const {
  if (posts.size() != 5) {
    throw std::invalid_argument("vignette '" + id + "' needs exactly 5 posts");
  }
}

std::vector<Vignette> vignettes_from_json(const std::string& content) {
  std::vector<Vignette> out;
  for (const auto& j : json::parse(content)) {
    Vignette v;
    v.id = j.at("id").get<std::string>();
    v.construct = construct_from_name(j.at("construct").get<std::string>());
    v.posts = j.at("posts").get<std::vector<std::string>>();
    v.question_template = j.contains("question_template")
                              ? j.at("question_template").get<std::string>()
                              : j.at("question").get<std::string>();
    v.validate();
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<BeliefQuestion> belief_questions_from_json(
    const std::string& content) {
  std::vector<BeliefQuestion> out;
  for (const auto& j : json::parse(content)) {
    BeliefQuestion q;
    q.id = j.at("id").get<std::string>();
    q.domain = domain_from_name(j.at("domain").get<std::string>());
    q.factor = factor_from_name(j.at("factor").get<std::string>());
    q.text = j.contains("text") ? j.at("text").get<std::string>()
                                : j.at("question").get<std::string>();
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<ValidationQuestion> validation_questions_from_json(
    const std::string& content) {
  std::vector<ValidationQuestion> out;
  for (const auto& j : json::parse(content)) {
    ValidationQuestion q;
    q.id = j.at("id").get<std::string>();
    q.domain = domain_from_name(j.at("domain").get<std::string>());
    q.factor = factor_from_name(j.at("factor").get<std::string>());
    q.text = j.contains("text") ? j.at("text").get<std::string>()
                                : j.at("question").get<std::string>();
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<Document> Corpus::documents() const {
  std::vector<Document> docs;
  for (const auto& r : records) {
    if (r.missing) continue;
    docs.push_back({std::to_string(r.persona_id), r.response});
  }
  return docs;
}

std::vector<double> Corpus::factor_values(const PersonaSet& personas) const {
  std::vector<double> out;
  for (const auto& r : records) {
    if (r.missing) continue;
    out.push_back(personas.by_id(r.persona_id).value(factor));
  }
  return out;
}

std::string Corpus::to_jsonl() const {
  std::string out;
  json meta;
  meta["domain"] = domain_name(domain);
  meta["factor"] = factor_name(factor);
  meta["mode"] = mode_name(mode);
  json pf = json::array();
  for (FactorId f : prompt_factors) pf.push_back(factor_name(f));
  meta["prompt_factors"] = std::move(pf);
  meta["backend_fingerprint"] = backend_fingerprint;
  out += meta.dump();
  out += '\n';
  for (const auto& r : records) {
    json j;
    j["persona_id"] = r.persona_id;
    j["prompt"] = r.prompt;
    j["response"] = r.response;
    j["timestamp"] = r.timestamp;
    j["cache_key"] = std::to_string(r.cache_key);
    j["missing"] = r.missing;
    out += j.dump();
    out += '\n';
  }
  return out;
}

Corpus Corpus::from_jsonl(const std::string& content) {
  std::stringstream ss(content);
  std::string line;
  if (!std::getline(ss, line)) {
    throw std::runtime_error("corpus file is empty");
  }
  json meta = json::parse(line);
  Corpus c;
  c.domain = domain_from_name(meta.at("domain").get<std::string>());
  c.factor = factor_from_name(meta.at("factor").get<std::string>());
  c.mode = mode_from_name(meta.at("mode").get<std::string>());
  for (const auto& f : meta.at("prompt_factors")) {
    c.prompt_factors.push_back(factor_from_name(f.get<std::string>()));
  }
  c.backend_fingerprint = meta.at("backend_fingerprint").get<std::string>();
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    GenerationRecord r;
    r.persona_id = j.at("persona_id").get<int>();
    r.prompt = j.at("prompt").get<std::string>();
    r.response = j.at("response").get<std::string>();
    r.timestamp = j.value("timestamp", "");
    r.cache_key = std::stoull(j.value("cache_key", "0"));
    r.missing = j.value("missing", false);
    c.records.push_back(std::move(r));
  }
  return c;
}

std::vector<std::optional<double>> AnnotationTable::persona_averages() const {
  std::vector<std::optional<double>> out;
  out.reserve(labels.size());
  for (const auto& row : labels) {
    double sum = 0.0;
    int n = 0;
    for (int v : row) {
      if (v >= 0) {
        sum += v;
        ++n;
      }
    }
    if (n == 0) {
      out.push_back(std::nullopt);
    } else {
      out.push_back(sum / n);
    }
  }
  return out;
}

std::string AnnotationTable::to_jsonl() const {
  std::string out;
  json meta;
  meta["construct"] = construct_name(construct);
  meta["vignette_id"] = vignette_id;
  meta["factor"] = factor_name(factor);
  meta["mode"] = mode_name(mode);
  out += meta.dump();
  out += '\n';
  for (std::size_t i = 0; i < labels.size(); ++i) {
    json j;
    j["persona_id"] = persona_ids[i];
    j["labels"] = labels[i];
    out += j.dump();
    out += '\n';
  }
  return out;
}

AnnotationTable AnnotationTable::from_jsonl(const std::string& content) {
  std::stringstream ss(content);
  std::string line;
  if (!std::getline(ss, line)) {
    throw std::runtime_error("annotation file is empty");
  }
  json meta = json::parse(line);
  AnnotationTable t;
  t.construct = construct_from_name(meta.at("construct").get<std::string>());
  t.vignette_id = meta.at("vignette_id").get<std::string>();
  t.factor = factor_from_name(meta.at("factor").get<std::string>());
  t.mode = mode_from_name(meta.at("mode").get<std::string>());
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    t.persona_ids.push_back(j.at("persona_id").get<int>());
    t.labels.push_back(j.at("labels").get<std::vector<int>>());
  }
  return t;
}

std::optional<int> parse_judgment(const std::string& text) {
  // Normalize U+2212 to ASCII minus.
  std::string s;
  s.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i + 2 < text.size() && static_cast<unsigned char>(text[i]) == 0xe2 &&
        static_cast<unsigned char>(text[i + 1]) == 0x88 &&
        static_cast<unsigned char>(text[i + 2]) == 0x92) {
      s += '-';
      i += 2;
    } else {
      s += text[i];
    }
  }
  auto is_numeric_char = [](char c) {
    return (c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.';
  };
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_numeric_char(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && is_numeric_char(s[j])) ++j;
    std::string run = s.substr(i, j - i);
    // Sentence-final periods are punctuation, not decimal points.
    while (!run.empty() && run.back() == '.') run.pop_back();
    if (run == "-1") return -1;
    if (run == "0") return 0;
    if (run == "1") return 1;
    i = j;
  }
  return std::nullopt;
}

std::optional<int> parse_yes_no(const std::string& text) {
  std::size_t i = 0;
  while (i < text.size() &&
         !std::isalpha(static_cast<unsigned char>(text[i]))) {
    ++i;
  }
  auto word_is = [&](const char* w, std::size_t len) {
    if (i + len > text.size()) return false;
    for (std::size_t k = 0; k < len; ++k) {
      if (std::tolower(static_cast<unsigned char>(text[i + k])) != w[k]) {
        return false;
      }
    }
    return i + len == text.size() ||
           !std::isalpha(static_cast<unsigned char>(text[i + len]));
  };
  if (word_is("yes", 3)) return 1;
  if (word_is("no", 2)) return 0;
  return std::nullopt;
}

ResponseCache::ResponseCache(const std::string& path) : path_(path) {
  std::ifstream in(path);
  std::string line;
  while (in && std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    Entry e;
    e.response = j.at("response").get<std::string>();
    e.timestamp = j.value("timestamp", "");
    entries_[std::stoull(j.at("key").get<std::string>())] = std::move(e);
  }
}

std::optional<ResponseCache::Entry> ResponseCache::get(
    std::uint64_t key) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::put(std::uint64_t key, const std::string& prompt,
                        const Entry& entry) {
  std::lock_guard lock(mutex_);
  if (!entries_.emplace(key, entry).second) return;  // already present
  if (!path_.empty()) {
    std::ofstream out(path_, std::ios::app);
    json j;
    j["key"] = std::to_string(key);
    j["prompt"] = prompt;
    j["response"] = entry.response;
    j["timestamp"] = entry.timestamp;
    out << j.dump() << '\n';
  }
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

namespace {

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class SyntheticBackend : public Backend {
 public:
  SyntheticBackend(const BackendConfig& cfg, const SyntheticModel* model)
      : cfg_(cfg) {
    if (model == nullptr) {
      model_ = SyntheticModel::with_default_vocab();
      model_.seed = cfg.seed;
    } else {
      model_ = *model;
    }
  }

  std::string complete(const CompletionRequest& req) override {
    if (req.persona == nullptr) {
      if (req.task_id.rfind("judge:", 0) == 0) {
        return synthetic_judge(req.prompt, model_);
      }
      throw BackendError("synthetic backend requires a persona");
    }
    std::string task = req.task_id;
    if (req.attempt > 0) task += ":retry" + std::to_string(req.attempt);
    // Mix the rendered prompt into the noise source so distinct prompts
    // (e.g. explicit vs implicit persona framings) draw independent noise.
    task += ":" + std::to_string(hash64(req.prompt));
    return synthetic_complete(*req.persona, task, model_);
  }

  std::string fingerprint() const override { return cfg_.fingerprint(); }

 private:
  BackendConfig cfg_;
  SyntheticModel model_;
};

struct ParsedUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("endpoint URL needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttpChatBackend : public Backend {
 public:
  explicit HttpChatBackend(const BackendConfig& cfg) : cfg_(cfg) {
    const char* token = std::getenv(cfg.auth_env.c_str());
    if (token == nullptr || *token == '\0') {
      throw BackendError("auth token environment variable '" + cfg.auth_env +
                         "' is not set");
    }
    token_ = token;
    url_ = parse_url(cfg.endpoint);
  }

  std::string complete(const CompletionRequest& req) override {
    httplib::Client client(url_.base);
    client.set_connection_timeout(std::chrono::milliseconds(
        static_cast<long>(cfg_.timeout_seconds * 1000)));
    client.set_read_timeout(std::chrono::milliseconds(
        static_cast<long>(cfg_.timeout_seconds * 1000)));
    client.set_bearer_token_auth(token_);

    json body;
    body["model"] = cfg_.model;
    body["messages"] = json::array({
        {{"role", "user"}, {"content", req.prompt}},
    });
    body["temperature"] = cfg_.temperature;
    body["max_tokens"] = cfg_.max_tokens;

    auto res = client.Post(url_.path, body.dump(), "application/json");
    if (!res) {
      throw BackendError("request to " + cfg_.endpoint + " failed: " +
                         httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw BackendError("backend returned HTTP " +
                         std::to_string(res->status) + ": " + res->body);
    }
    json j = json::parse(res->body);
    const auto& choices = j.at("choices");
    if (choices.empty()) throw BackendError("backend returned no choices");
    return choices[0].at("message").at("content").get<std::string>();
  }

  std::string fingerprint() const override { return cfg_.fingerprint(); }

 private:
  BackendConfig cfg_;
  std::string token_;
  ParsedUrl url_;
};

}  // namespace

std::unique_ptr<Backend> make_backend(const BackendConfig& cfg,
                                      const SyntheticModel* model) {
  cfg.validate();
  if (cfg.kind == BackendConfig::Kind::synthetic) {
    return std::make_unique<SyntheticBackend>(cfg, model);
  }
  return std::make_unique<HttpChatBackend>(cfg);
}

Prober::Prober(const BackendConfig& cfg, ResponseCache* cache,
               const SyntheticModel* model)
    : cfg_(cfg), backend_(make_backend(cfg, model)), cache_(cache) {}

Prober::Prober(const BackendConfig& cfg, std::unique_ptr<Backend> backend,
               ResponseCache* cache)
    : cfg_(cfg), backend_(std::move(backend)), cache_(cache) {
  cfg_.validate();
}

std::uint64_t Prober::cache_key(const CompletionRequest& req) const {
  std::uint64_t key = hash64(backend_->fingerprint());
  key = hash64_combine(key, req.prompt);
  key = hash64_combine(key,
                       std::uint64_t(req.persona ? req.persona->id : -1));
  key = hash64_combine(key, cfg_.seed);
  if (req.attempt > 0) key = hash64_combine(key, std::uint64_t(req.attempt));
  return key;
}

GenerationRecord Prober::complete_record(const CompletionRequest& req) {
  GenerationRecord rec;
  rec.persona_id = req.persona ? req.persona->id : -1;
  rec.prompt = req.prompt;
  rec.cache_key = cache_key(req);

  if (cache_ && req.attempt == 0) {
    if (auto hit = cache_->get(rec.cache_key)) {
      rec.response = hit->response;
      rec.timestamp = hit->timestamp;
      return rec;
    }
  }

  std::exception_ptr last_error;
  for (int attempt = 0; attempt <= cfg_.retry.count; ++attempt) {
    try {
      std::string response = backend_->complete(req);
      {
        std::lock_guard lock(counter_mutex_);
        ++network_calls_;
      }
      if (response.empty()) throw BackendError("backend returned empty text");
      rec.response = std::move(response);
      rec.timestamp = now_iso8601();
      if (cache_) {
        cache_->put(rec.cache_key, req.prompt,
                    {rec.response, rec.timestamp});
      }
      return rec;
    } catch (const BackendError&) {
      last_error = std::current_exception();
      if (attempt < cfg_.retry.count) {
        std::this_thread::sleep_for(std::chrono::duration<double>(
            cfg_.retry.backoff_seconds * (attempt + 1)));
      }
    }
  }
  std::rethrow_exception(last_error);
}

std::string Prober::complete(const CompletionRequest& req) {
  return complete_record(req).response;
}

void Prober::parallel_over(std::size_t n,
                           const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(std::max(cfg_.max_parallel, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

std::string replace_post(const std::string& tmpl, const std::string& post) {
  const auto pos = tmpl.find("{post}");
  if (pos == std::string::npos) return tmpl + "\n\n" + post;
  std::string out = tmpl;
  out.replace(pos, 6, post);
  return out;
}

}  // namespace

AnnotationTable Prober::run_annotation(const PersonaSet& personas,
                                       const Vignette& vignette,
                                       PromptMode mode,
                                       const std::vector<FactorId>& factors) {
  vignette.validate();
  AnnotationTable table;
  table.construct = vignette.construct;
  table.vignette_id = vignette.id;
  table.factor = factors.size() == 1 ? factors[0] : FactorId::age;
  table.mode = mode;
  const std::size_t n = personas.size();
  table.persona_ids.resize(n);
  table.labels.assign(n, std::vector<int>(vignette.posts.size(), -1));

  parallel_over(n, [&](std::size_t i) {
    const Persona& p = personas.personas[i];
    table.persona_ids[i] = p.id;
    for (std::size_t post = 0; post < vignette.posts.size(); ++post) {
      const std::string question =
          replace_post(vignette.question_template, vignette.posts[post]);
      CompletionRequest req;
      req.prompt = render_prompt(p, mode, factors, question);
      req.persona = &p;
      req.task_id =
          "rate:" + vignette.id + ":" + std::to_string(post);
      for (int attempt = 0; attempt <= 3; ++attempt) {
        req.attempt = attempt;
        const std::string response = complete(req);
        if (auto label = parse_yes_no(response)) {
          table.labels[i][post] = *label;
          break;
        }
      }
    }
  });

  long missing = 0;
  for (const auto& row : table.labels) {
    for (int v : row) {
      if (v < 0) ++missing;
    }
  }
  const long total = static_cast<long>(n) * vignette.posts.size();
  if (total > 0 && missing * 10 > total) {
    throw std::runtime_error(
        "annotation run aborted: " + std::to_string(missing) + " of " +
        std::to_string(total) +
        " judgments unparseable (>10%); check the backend's response format");
  }
  return table;
}

Corpus Prober::run_generation(const PersonaSet& personas,
                              const BeliefQuestion& q, PromptMode mode,
                              const std::vector<FactorId>& factors) {
  Corpus corpus;
  corpus.domain = q.domain;
  corpus.factor = q.factor;
  corpus.mode = mode;
  corpus.prompt_factors = factors;
  corpus.backend_fingerprint = backend_->fingerprint();
  corpus.records.resize(personas.size());

  parallel_over(personas.size(), [&](std::size_t i) {
    const Persona& p = personas.personas[i];
    CompletionRequest req;
    req.prompt = render_prompt(p, mode, factors, q.text);
    req.persona = &p;
    req.task_id = "gen:" + q.id;
    try {
      corpus.records[i] = complete_record(req);
    } catch (const BackendError&) {
      GenerationRecord rec;
      rec.persona_id = p.id;
      rec.prompt = req.prompt;
      rec.cache_key = cache_key(req);
      rec.missing = true;
      corpus.records[i] = std::move(rec);
    }
  });
  return corpus;
}

std::vector<std::optional<int>> Prober::run_validation(
    const Corpus& corpus, const ValidationQuestion& vq) {
  std::vector<std::optional<int>> scores(corpus.records.size());
  parallel_over(corpus.records.size(), [&](std::size_t i) {
    const auto& rec = corpus.records[i];
    if (rec.missing) return;
    CompletionRequest req;
    req.prompt = vq.text + "\n\nText: \"" + rec.response + "\"";
    req.task_id = "judge:" + vq.id + ":" + std::to_string(rec.persona_id);
    for (int attempt = 0; attempt <= 3; ++attempt) {
      req.attempt = attempt;
      std::string response;
      try {
        response = complete(req);
      } catch (const BackendError&) {
        throw;  // judge backend failure is not a parse failure
      }
      if (auto score = parse_judgment(response)) {
        scores[i] = *score;
        return;
      }
    }
  });
  return scores;
}

}  // namespace paudit
