#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "paudit/bundled_data.hpp"
#include "paudit/persona.hpp"
#include "paudit/probe.hpp"
#include "paudit/synthetic.hpp"

using namespace paudit;

namespace {

PersonaSet small_population(int size, std::uint64_t seed) {
  PopulationSpec spec;
  spec.size = size;
  return sample_population(spec, seed);
}

SyntheticModel biased_model(std::uint64_t seed) {
  auto model = SyntheticModel::with_default_vocab();
  model.seed = seed;
  model.biases[FactorId::gender] = {{"caregivers", 0.6, 0.2},
                                    {"breadwinner", 0.2, 0.6}};
  model.rating_slopes[FactorId::gender] = 1.5;
  return model;
}

}  // namespace

TEST_CASE("judgment parsing") {
  CHECK(parse_judgment("1") == 1);
  CHECK(parse_judgment("-1") == -1);
  CHECK(parse_judgment("0") == 0);
  CHECK(parse_judgment("I would answer -1 here.") == -1);
  CHECK(parse_judgment("Answer: 0 (both)") == 0);
  CHECK(parse_judgment("Rating: 1.") == 1);
  // Unicode minus normalizes to ASCII.
  CHECK(parse_judgment("\xe2\x88\x92" "1") == -1);
  CHECK_FALSE(parse_judgment("10").has_value());
  CHECK_FALSE(parse_judgment("-1.5").has_value());
  CHECK_FALSE(parse_judgment("none of these").has_value());
  CHECK_FALSE(parse_judgment("").has_value());
}

TEST_CASE("yes/no parsing") {
  CHECK(parse_yes_no("yes") == 1);
  CHECK(parse_yes_no("Yes.") == 1);
  CHECK(parse_yes_no("  NO, not at all") == 0);
  CHECK(parse_yes_no("no") == 0);
  CHECK_FALSE(parse_yes_no("maybe yes").has_value());
  CHECK_FALSE(parse_yes_no("yesterday was fine").has_value());
  CHECK_FALSE(parse_yes_no("").has_value());
}

TEST_CASE("backend config validation and fingerprint") {
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::synthetic;
  CHECK_NOTHROW(cfg.validate());
  const auto fp = cfg.fingerprint();
  CHECK_FALSE(fp.empty());
  BackendConfig other = cfg;
  other.temperature = 0.1;
  CHECK(other.fingerprint() != fp);

  BackendConfig http;
  http.kind = BackendConfig::Kind::http_chat;
  CHECK_THROWS_AS(http.validate(), std::invalid_argument);  // no endpoint
  http.endpoint = "https://example.test/v1/chat/completions";
  http.max_parallel = 0;
  CHECK_THROWS_AS(http.validate(), std::invalid_argument);
}

TEST_CASE("http backend refuses to start without its auth variable") {
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::http_chat;
  cfg.endpoint = "https://example.test/v1/chat/completions";
  cfg.auth_env = "PAUDIT_TEST_ABSENT_TOKEN";
  ::unsetenv("PAUDIT_TEST_ABSENT_TOKEN");
  try {
    make_backend(cfg);
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(std::string(e.what()).find("PAUDIT_TEST_ABSENT_TOKEN") !=
          std::string::npos);
  }
}

TEST_CASE("synthetic completions are deterministic") {
  const auto personas = small_population(5, 1);
  const auto model = biased_model(9);
  const auto& p = personas.personas[0];
  CHECK(synthetic_complete(p, "gen:palestine", model) ==
        synthetic_complete(p, "gen:palestine", model));
  CHECK(synthetic_complete(p, "gen:palestine", model) !=
        synthetic_complete(p, "gen:policing", model));
  CHECK(synthetic_complete(personas.personas[1], "gen:palestine", model) !=
        synthetic_complete(p, "gen:palestine", model));
}

TEST_CASE("annotation run covers every persona and post") {
  const auto personas = small_population(40, 2);
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::synthetic;
  cfg.seed = 3;
  const auto model = biased_model(3);
  Prober prober(cfg, nullptr, &model);
  const auto& vignette = bundled_vignettes()[0];
  const auto table = prober.run_annotation(personas, vignette,
                                           PromptMode::explicit_persona,
                                           {FactorId::gender});
  REQUIRE(table.persona_ids.size() == 40);
  REQUIRE(table.labels.size() == 40);
  for (const auto& row : table.labels) {
    REQUIRE(row.size() == 5);
    for (int v : row) CHECK((v == 0 || v == 1));
  }
  const auto averages = table.persona_averages();
  for (const auto& avg : averages) {
    REQUIRE(avg.has_value());
    CHECK(*avg >= 0.0);
    CHECK(*avg <= 1.0);
  }
}

namespace {

class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(std::string reply) : reply_(std::move(reply)) {}
  std::string complete(const CompletionRequest&) override { return reply_; }
  std::string fingerprint() const override { return "scripted"; }

 private:
  std::string reply_;
};

}  // namespace

TEST_CASE("annotation aborts when too many responses are unparseable") {
  const auto personas = small_population(10, 4);
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::synthetic;
  Prober prober(cfg, std::make_unique<ScriptedBackend>("I cannot say"));
  CHECK_THROWS_AS(prober.run_annotation(personas, bundled_vignettes()[0],
                                        PromptMode::explicit_persona,
                                        {FactorId::gender}),
                  std::runtime_error);
}

TEST_CASE("constant yes responder gives all-1 labels") {
  const auto personas = small_population(6, 5);
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::synthetic;
  Prober prober(cfg, std::make_unique<ScriptedBackend>("Yes, it is."));
  const auto table = prober.run_annotation(personas, bundled_vignettes()[1],
                                           PromptMode::explicit_persona,
                                           {FactorId::substance_use});
  for (const auto& row : table.labels) {
    for (int v : row) CHECK(v == 1);
  }
  for (const auto& avg : table.persona_averages()) {
    CHECK(*avg == doctest::Approx(1.0));
  }
}

TEST_CASE("generation run produces a document per persona") {
  const auto personas = small_population(12, 6);
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::synthetic;
  cfg.seed = 11;
  const auto model = biased_model(11);
  Prober prober(cfg, nullptr, &model);
  const auto corpus =
      prober.run_generation(personas, bundled_belief_question(Domain::parenting),
                            PromptMode::explicit_persona, {FactorId::gender});
  REQUIRE(corpus.records.size() == 12);
  CHECK(corpus.documents().size() == 12);
  for (const auto& rec : corpus.records) {
    CHECK_FALSE(rec.missing);
    CHECK_FALSE(rec.response.empty());
    CHECK(rec.prompt.find("You are") == 0);
  }
  const auto values = corpus.factor_values(personas);
  REQUIRE(values.size() == 12);
  for (std::size_t i = 0; i < values.size(); ++i) {
    CHECK(values[i] ==
          double(personas.personas[i].value(FactorId::gender)));
  }
}

TEST_CASE("generation with an empty persona set yields an empty corpus") {
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::synthetic;
  Prober prober(cfg);
  const auto corpus = prober.run_generation(
      PersonaSet{}, bundled_belief_question(Domain::palestine),
      PromptMode::explicit_persona, {FactorId::age});
  CHECK(corpus.records.empty());
  CHECK(corpus.documents().empty());
}

TEST_CASE("corpus JSONL round trip") {
  const auto personas = small_population(4, 7);
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::synthetic;
  const auto model = biased_model(7);
  Prober prober(cfg, nullptr, &model);
  const auto corpus =
      prober.run_generation(personas, bundled_belief_question(Domain::policing),
                            PromptMode::explicit_persona, {FactorId::race});
  const auto text = corpus.to_jsonl();
  const auto back = Corpus::from_jsonl(text);
  CHECK(back.to_jsonl() == text);
  CHECK(back.domain == corpus.domain);
  CHECK(back.records.size() == corpus.records.size());
  CHECK(back.records[2].response == corpus.records[2].response);
}

TEST_CASE("annotation JSONL round trip") {
  const auto personas = small_population(5, 8);
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::synthetic;
  const auto model = biased_model(8);
  Prober prober(cfg, nullptr, &model);
  const auto table = prober.run_annotation(personas, bundled_vignettes()[0],
                                           PromptMode::explicit_persona,
                                           {FactorId::gender});
  const auto text = table.to_jsonl();
  const auto back = AnnotationTable::from_jsonl(text);
  CHECK(back.to_jsonl() == text);
  CHECK(back.labels == table.labels);
}

TEST_CASE("response cache eliminates repeat backend calls") {
  const auto personas = small_population(8, 9);
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::synthetic;
  cfg.seed = 13;
  cfg.max_parallel = 1;
  const auto model = biased_model(13);
  ResponseCache cache;

  Prober first(cfg, &cache, &model);
  const auto corpus1 =
      first.run_generation(personas, bundled_belief_question(Domain::palestine),
                           PromptMode::explicit_persona, {FactorId::age});
  CHECK(first.network_calls() == 8);
  CHECK(cache.size() == 8);

  Prober second(cfg, &cache, &model);
  const auto corpus2 = second.run_generation(
      personas, bundled_belief_question(Domain::palestine),
      PromptMode::explicit_persona, {FactorId::age});
  CHECK(second.network_calls() == 0);
  CHECK(corpus2.to_jsonl() == corpus1.to_jsonl());
}

TEST_CASE("cache persists across instances on disk") {
  const auto personas = small_population(6, 10);
  const auto path = std::filesystem::temp_directory_path() /
                    "paudit_test_cache.jsonl";
  std::filesystem::remove(path);
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::synthetic;
  cfg.seed = 17;
  const auto model = biased_model(17);
  std::string first_run;
  {
    ResponseCache cache(path.string());
    Prober prober(cfg, &cache, &model);
    first_run = prober
                    .run_generation(personas,
                                    bundled_belief_question(Domain::policing),
                                    PromptMode::explicit_persona,
                                    {FactorId::race})
                    .to_jsonl();
  }
  {
    ResponseCache cache(path.string());
    CHECK(cache.size() == 6);
    Prober prober(cfg, &cache, &model);
    const auto again =
        prober
            .run_generation(personas, bundled_belief_question(Domain::policing),
                            PromptMode::explicit_persona, {FactorId::race})
            .to_jsonl();
    CHECK(prober.network_calls() == 0);
    CHECK(again == first_run);
  }
  std::filesystem::remove(path);
}

TEST_CASE("cache keys separate personas, prompts, and seeds") {
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::synthetic;
  cfg.seed = 1;
  Prober prober(cfg);
  Persona a;
  a.id = 1;
  Persona b;
  b.id = 2;
  CompletionRequest ra{"prompt", &a, "t", 0};
  CompletionRequest rb{"prompt", &b, "t", 0};
  CompletionRequest rc{"other prompt", &a, "t", 0};
  CompletionRequest rd{"prompt", &a, "t", 1};
  CHECK(prober.cache_key(ra) != prober.cache_key(rb));
  CHECK(prober.cache_key(ra) != prober.cache_key(rc));
  CHECK(prober.cache_key(ra) != prober.cache_key(rd));

  BackendConfig cfg2 = cfg;
  cfg2.seed = 2;
  Prober prober2(cfg2);
  CHECK(prober.cache_key(ra) != prober2.cache_key(ra));
}

TEST_CASE("validation run scores every non-missing record") {
  const auto personas = small_population(10, 11);
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::synthetic;
  cfg.seed = 23;
  const auto model = biased_model(23);
  Prober prober(cfg, nullptr, &model);
  auto corpus =
      prober.run_generation(personas, bundled_belief_question(Domain::parenting),
                            PromptMode::explicit_persona, {FactorId::gender});
  corpus.records[4].missing = true;
  const auto scores =
      prober.run_validation(corpus, bundled_validation_question(Domain::parenting));
  REQUIRE(scores.size() == 10);
  CHECK_FALSE(scores[4].has_value());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i == 4) continue;
    REQUIRE(scores[i].has_value());
    CHECK(*scores[i] >= -1);
    CHECK(*scores[i] <= 1);
  }
}

TEST_CASE("vignette and question JSON loaders") {
  const std::string vignette_json = R"([{
    "id": "v1", "construct": "offensive",
    "posts": ["p1", "p2", "p3", "p4", "p5"],
    "question_template": "Rate: {post}"
  }])";
  const auto vignettes = vignettes_from_json(vignette_json);
  REQUIRE(vignettes.size() == 1);
  CHECK(vignettes[0].posts.size() == 5);

  const std::string bad = R"([{
    "id": "v1", "construct": "offensive",
    "posts": ["p1"], "question_template": "Rate: {post}"
  }])";
  CHECK_THROWS(vignettes_from_json(bad));

  const std::string beliefs_json = R"([{
    "id": "b1", "domain": "parenting", "factor": "gender",
    "text": "How do you balance home and work?"
  }])";
  const auto beliefs = belief_questions_from_json(beliefs_json);
  REQUIRE(beliefs.size() == 1);
  CHECK(beliefs[0].domain == Domain::parenting);
  CHECK(beliefs[0].factor == FactorId::gender);

  const std::string validation_json = R"([{
    "id": "q1", "domain": "parenting", "factor": "gender",
    "text": "Home (1), work (-1), both (0)?"
  }])";
  const auto validation = validation_questions_from_json(validation_json);
  REQUIRE(validation.size() == 1);
  CHECK(validation[0].id == "q1");
}

TEST_CASE("domain and construct names round trip") {
  for (Domain d : {Domain::palestine, Domain::parenting, Domain::immigration,
                   Domain::policing, Domain::legalization}) {
    CHECK(domain_from_name(domain_name(d)) == d);
  }
  for (Construct c : {Construct::offensive, Construct::stigmatizing}) {
    CHECK(construct_from_name(construct_name(c)) == c);
  }
  CHECK_THROWS_AS(domain_from_name("weather"), std::invalid_argument);
  CHECK(domain_factor(Domain::policing) == FactorId::race);
  CHECK(domain_factor(Domain::parenting) == FactorId::gender);
}
