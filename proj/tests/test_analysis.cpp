#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "paudit/analysis.hpp"
#include "paudit/bundled_data.hpp"
#include "paudit/persona.hpp"
#include "paudit/probe.hpp"
#include "paudit/rng.hpp"
#include "paudit/synthetic.hpp"

using namespace paudit;

namespace {

PersonaSet population(int size, std::uint64_t seed) {
  PopulationSpec spec;
  spec.size = size;
  return sample_population(spec, seed);
}

SyntheticModel gender_model(std::uint64_t seed, double strong = 0.6,
                            double weak = 0.2) {
  auto model = SyntheticModel::with_default_vocab();
  model.seed = seed;
  model.biases[FactorId::gender] = {{"caregivers", strong, weak},
                                    {"breadwinner", weak, strong}};
  return model;
}

Corpus generate(const PersonaSet& personas, const SyntheticModel& model,
                Domain domain, PromptMode mode,
                const std::vector<FactorId>& factors, std::uint64_t seed) {
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::synthetic;
  cfg.seed = seed;
  Prober prober(cfg, nullptr, &model);
  return prober.run_generation(personas, bundled_belief_question(domain), mode,
                               factors);
}

}  // namespace

TEST_CASE("language_effects recovers an injected gender association") {
  const auto personas = population(300, 1);
  const auto model = gender_model(1);
  const auto corpus = generate(personas, model, Domain::parenting,
                               PromptMode::explicit_persona,
                               {FactorId::gender}, 1);
  FeatureParams params;
  params.orders = {1};
  const auto table =
      language_effects(corpus, personas, FactorId::gender, 0.05, params);
  CHECK(table.factor == factor_name(FactorId::gender));
  CHECK(table.vocab_size > 0);

  bool caregivers_found = false, breadwinner_found = false;
  for (const auto& r : table.results) {
    if (r.feature == "caregivers") {
      caregivers_found = true;
      CHECK(r.effect > 0.0);
      CHECK(r.significant);
      CHECK(r.corpus_count > 0);
    }
    if (r.feature == "breadwinner") {
      breadwinner_found = true;
      CHECK(r.effect < 0.0);
      CHECK(r.significant);
    }
  }
  CHECK(caregivers_found);
  CHECK(breadwinner_found);

  // The table applies exactly one BH pass: recomputing it from the raw
  // p-values must reproduce the stored adjusted values.
  std::vector<double> raw;
  for (const auto& r : table.results) {
    if (!r.skipped) raw.push_back(r.raw_p);
  }
  const auto bh = bh_fdr(raw, table.alpha);
  std::size_t k = 0;
  for (const auto& r : table.results) {
    if (r.skipped) continue;
    CHECK(r.adjusted_p == doctest::Approx(bh.adjusted[k]).epsilon(1e-12));
    CHECK(r.significant == bool(bh.reject[k]));
    ++k;
  }
}

TEST_CASE("bgt1 orders significant features by effect magnitude") {
  const auto personas = population(300, 2);
  const auto model = gender_model(2);
  const auto corpus = generate(personas, model, Domain::parenting,
                               PromptMode::explicit_persona,
                               {FactorId::gender}, 2);
  FeatureParams params;
  params.orders = {1};
  const auto result = bgt1(corpus, personas, 0.05, params);
  CHECK(result.full.results.size() >= result.significant.results.size());
  CHECK(result.significant.results.size() >= 2);
  for (std::size_t i = 1; i < result.significant.results.size(); ++i) {
    CHECK(std::fabs(result.significant.results[i - 1].effect) >=
          std::fabs(result.significant.results[i].effect));
  }
  for (const auto& r : result.significant.results) CHECK(r.significant);
}

TEST_CASE("bgt1_validation correlates judged stance with the factor") {
  const auto personas = population(200, 3);
  const auto model = gender_model(3);
  const auto corpus = generate(personas, model, Domain::parenting,
                               PromptMode::explicit_persona,
                               {FactorId::gender}, 3);
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::synthetic;
  cfg.seed = 3;
  Prober prober(cfg, nullptr, &model);
  const auto scores =
      prober.run_validation(corpus, bundled_validation_question(Domain::parenting));
  const auto res = bgt1_validation(corpus, scores, personas);
  CHECK(res.r > 0.2);
  CHECK(res.p < 0.01);

  std::vector<std::optional<int>> flat(corpus.records.size(), 0);
  CHECK_THROWS_AS(bgt1_validation(corpus, flat, personas),
                  std::runtime_error);
  std::vector<std::optional<int>> absent(corpus.records.size(), std::nullopt);
  CHECK_THROWS_AS(bgt1_validation(corpus, absent, personas),
                  std::runtime_error);
}

TEST_CASE("annotation_effects: a constant responder yields no effects") {
  const auto personas = population(60, 4);
  std::map<Construct, std::map<FactorId, AnnotationTable>> tables;
  for (Construct c : {Construct::offensive, Construct::stigmatizing}) {
    for (FactorId f : {FactorId::gender, FactorId::race}) {
      AnnotationTable t;
      t.construct = c;
      t.factor = f;
      t.mode = PromptMode::explicit_persona;
      for (const auto& p : personas.personas) {
        t.persona_ids.push_back(p.id);
        t.labels.push_back({1, 1, 1, 1, 1});
      }
      tables[c][f] = std::move(t);
    }
  }
  const auto grid = annotation_effects(tables, personas);
  REQUIRE(grid.cells.size() == 4);
  for (const auto& cell : grid.cells) {
    CHECK(cell.result.skipped);  // constant averages carry no signal
    CHECK_FALSE(cell.result.significant);
  }
}

TEST_CASE("annotation_effects recovers a rating slope and applies one BH") {
  const auto personas = population(250, 5);
  auto model = gender_model(5);
  model.rating_slopes[FactorId::gender] = 2.0;
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::synthetic;
  cfg.seed = 5;
  Prober prober(cfg, nullptr, &model);

  std::map<Construct, std::map<FactorId, AnnotationTable>> tables;
  tables[Construct::offensive][FactorId::gender] = prober.run_annotation(
      personas, bundled_vignettes()[0], PromptMode::explicit_persona,
      {FactorId::gender});
  // Age has no slope in the model: a null cell.
  tables[Construct::offensive][FactorId::age] = prober.run_annotation(
      personas, bundled_vignettes()[0], PromptMode::explicit_persona,
      {FactorId::age});

  const auto grid = annotation_effects(tables, personas);
  REQUIRE(grid.cells.size() == 2);
  for (const auto& cell : grid.cells) {
    if (cell.factor == FactorId::gender) {
      CHECK(cell.result.effect > 0.0);
      CHECK(cell.result.significant);
      CHECK(cell.result.converged);
    } else {
      CHECK_FALSE(cell.result.significant);
    }
  }
}

TEST_CASE("bgt2 builds the lower triangle with one BH across cells") {
  const auto personas = population(250, 6);
  auto model = gender_model(6);
  // Race shares the same biased tokens, so its corpus should correlate with
  // the gender corpus only through chance.
  model.biases[FactorId::race] = {{"neighborhood", 0.6, 0.2}};
  std::map<FactorId, Corpus> corpora;
  for (FactorId f : {FactorId::age, FactorId::gender, FactorId::race}) {
    corpora[f] = generate(personas, model, Domain::palestine,
                          PromptMode::explicit_persona, {f}, 6);
  }
  FeatureParams params;
  params.orders = {1};
  const auto cells = bgt2(corpora, personas, 0.05, params);
  REQUIRE(cells.size() == 3);  // 3 factors -> 3 unordered pairs
  for (const auto& cell : cells) {
    CHECK(int(cell.row_factor) > int(cell.col_factor));
    CHECK(cell.meta.aligned >= 30);
    CHECK(std::fabs(cell.meta.r) <= 1.0);
  }
}

TEST_CASE("bgt3: identical corpora give perfect agreement") {
  const auto personas = population(200, 7);
  const auto model = gender_model(7);
  const auto corpus = generate(personas, model, Domain::parenting,
                               PromptMode::explicit_persona,
                               {FactorId::gender}, 7);
  FeatureParams params;
  params.orders = {1};
  const auto meta =
      bgt3(corpus, corpus, personas, FactorId::gender, 0.05, params);
  CHECK(meta.r == doctest::Approx(1.0).epsilon(1e-9));

  CHECK_THROWS_AS(bgt3(corpus, corpus, personas, FactorId::political_ideology,
                       0.05, params),
                  std::invalid_argument);
}

TEST_CASE("bgt3 on independently-biased corpora stays near zero") {
  const auto personas = population(250, 8);
  // Widen the shared vocabulary so the null meta-correlation concentrates.
  auto model_a = gender_model(8);
  auto model_b = SyntheticModel::with_default_vocab();
  for (int i = 0; i < 200; ++i) {
    const std::string filler = "filler" + std::to_string(i);
    model_a.base_vocab.push_back(filler);
    model_b.base_vocab.push_back(filler);
  }
  model_b.seed = 88;
  model_b.biases[FactorId::gender] = {{"gardening", 0.6, 0.2},
                                      {"motorsport", 0.2, 0.6}};
  const auto a = generate(personas, model_a, Domain::parenting,
                          PromptMode::explicit_persona, {FactorId::gender}, 8);
  const auto b = generate(personas, model_b, Domain::parenting,
                          PromptMode::explicit_persona, {FactorId::gender}, 88);
  FeatureParams params;
  params.orders = {1};
  const auto meta = bgt3(a, b, personas, FactorId::gender, 0.05, params);
  CHECK(std::fabs(meta.r) < 0.3);
}

TEST_CASE("importance: comparing a corpus against itself gives r = 1") {
  auto personas = population(200, 9);
  const auto model = gender_model(9);
  const auto full = generate(personas, model, Domain::parenting,
                             PromptMode::explicit_persona,
                             {FactorId::age, FactorId::gender, FactorId::race,
                              FactorId::political_ideology,
                              FactorId::substance_use},
                             9);
  FeatureParams params;
  params.orders = {1};
  const auto meta =
      importance(full, full, personas, FactorId::gender, 0.05, params);
  CHECK(meta.r == doctest::Approx(1.0).epsilon(1e-9));

  const auto single = generate(personas, model, Domain::parenting,
                               PromptMode::explicit_persona,
                               {FactorId::gender}, 9);
  // The first argument must be the full-persona corpus.
  CHECK_THROWS_AS(
      importance(single, full, personas, FactorId::gender, 0.05, params),
      std::invalid_argument);
}

TEST_CASE("reliability with gender-determined ratings is hand-computable") {
  // Every label-1 rater answers (1,0,1,0,1) and every label-0 rater the
  // complement: same-gender pairs have kappa 1, mixed pairs -1, so the
  // "All" mean is ((n1 - n0) / n)^2 and single-gender rows are exactly 1.
  const auto personas = population(100, 10);
  AnnotationTable table;
  table.construct = Construct::offensive;
  table.factor = FactorId::gender;
  table.mode = PromptMode::explicit_persona;
  int n1 = 0;
  for (const auto& p : personas.personas) {
    table.persona_ids.push_back(p.id);
    if (p.value(FactorId::gender) == 1) {
      table.labels.push_back({1, 0, 1, 0, 1});
      ++n1;
    } else {
      table.labels.push_back({0, 1, 0, 1, 0});
    }
  }
  const int n0 = int(personas.size()) - n1;

  const auto rows = reliability(table, table, personas);
  REQUIRE(rows.size() == default_persona_type_filters().size());
  REQUIRE(rows[0].persona_type == "All");
  const double expected =
      double((n1 - n0) * (n1 - n0)) / double(personas.size() * personas.size());
  CHECK(rows[0].kappa.mean == doctest::Approx(expected).epsilon(1e-9));
  for (const auto& row : rows) {
    CHECK(row.kappa.total_pairs > 0);
    CHECK(row.kappa.defined_pairs == row.kappa.total_pairs);
    if (row.persona_type == "Female" || row.persona_type == "Male") {
      CHECK(row.kappa.mean == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("reliability of independent random raters is near zero") {
  const auto personas = population(100, 11);
  Rng rng(123);
  auto random_table = [&](Construct c) {
    AnnotationTable t;
    t.construct = c;
    t.factor = FactorId::gender;
    t.mode = PromptMode::explicit_persona;
    for (const auto& p : personas.personas) {
      t.persona_ids.push_back(p.id);
      std::vector<int> row(5);
      for (auto& v : row) v = int(rng.below(2));
      t.labels.push_back(std::move(row));
    }
    return t;
  };
  const auto a = random_table(Construct::offensive);
  const auto b = random_table(Construct::offensive);
  const auto rows = reliability(a, b, personas);
  // Five-item pairwise kappa carries a small finite-sample bias, so "near
  // zero" is loose here.
  CHECK(std::fabs(rows[0].kappa.mean) < 0.25);
}

TEST_CASE("reliability rejects an empty persona subset") {
  const auto personas = population(30, 12);
  auto model = gender_model(12);
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::synthetic;
  Prober prober(cfg, nullptr, &model);
  const auto table = prober.run_annotation(personas, bundled_vignettes()[0],
                                           PromptMode::explicit_persona,
                                           {FactorId::gender});
  std::vector<PersonaTypeFilter> filters = {
      {"Nobody", FactorId::age, 999}};
  CHECK_THROWS_AS(reliability(table, table, personas, filters),
                  std::runtime_error);
}
