#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "paudit/analysis.hpp"
#include "paudit/bundled_data.hpp"
#include "paudit/features.hpp"
#include "paudit/persona.hpp"
#include "paudit/probe.hpp"
#include "paudit/rng.hpp"
#include "paudit/stats.hpp"
#include "paudit/synthetic.hpp"

namespace {

using namespace paudit;

std::vector<Document> synthetic_docs(int n_docs) {
  PopulationSpec spec;
  spec.size = n_docs;
  const auto personas = sample_population(spec, 42);
  auto model = SyntheticModel::with_default_vocab();
  model.seed = 42;
  std::vector<Document> docs;
  docs.reserve(personas.personas.size());
  for (const auto& p : personas.personas) {
    docs.push_back(
        {std::to_string(p.id), synthetic_complete(p, "bench", model)});
  }
  return docs;
}

void BM_SamplePopulation(benchmark::State& state) {
  PopulationSpec spec;
  spec.size = state.range(0);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto pop = sample_population(spec, ++seed);
    benchmark::DoNotOptimize(pop.personas.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SamplePopulation)->Arg(100)->Arg(641)->Arg(5000);

void BM_ExtractNgrams(benchmark::State& state) {
  const auto docs = synthetic_docs(int(state.range(0)));
  for (auto _ : state) {
    auto mat = extract_ngrams(docs, {1, 2, 3});
    benchmark::DoNotOptimize(mat.features.data());
  }
  state.SetItemsProcessed(state.iterations() * docs.size());
}
BENCHMARK(BM_ExtractNgrams)->Arg(100)->Arg(641);

void BM_BhFdr(benchmark::State& state) {
  Rng rng(7);
  std::vector<double> p(state.range(0));
  for (auto& v : p) v = rng.uniform01();
  for (auto _ : state) {
    auto res = bh_fdr(p, 0.05);
    benchmark::DoNotOptimize(res.adjusted.data());
  }
  state.SetItemsProcessed(state.iterations() * p.size());
}
BENCHMARK(BM_BhFdr)->Range(64, 65536);

void BM_LogisticFit(benchmark::State& state) {
  Rng rng(11);
  const int n = int(state.range(0));
  std::vector<double> x(n);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = rng.normal(0.0, 1.0);
    const double eta = 0.3 + 0.8 * x[i];
    y[i] = rng.uniform01() < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0;
  }
  for (auto _ : state) {
    auto fit = logistic_wald_p(x, y);
    benchmark::DoNotOptimize(fit.slope);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_LogisticFit)->Arg(100)->Arg(641)->Arg(5000);

void BM_LanguageEffects(benchmark::State& state) {
  PopulationSpec spec;
  spec.size = state.range(0);
  const auto personas = sample_population(spec, 13);
  auto model = SyntheticModel::with_default_vocab();
  model.seed = 13;
  model.biases[FactorId::gender] = {{"caregivers", 0.6, 0.2}};
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::synthetic;
  cfg.seed = 13;
  Prober prober(cfg, nullptr, &model);
  const auto corpus =
      prober.run_generation(personas, bundled_belief_question(Domain::parenting),
                            PromptMode::explicit_persona, {FactorId::gender});
  FeatureParams params;
  params.orders = {1, 2, 3};
  for (auto _ : state) {
    auto table =
        language_effects(corpus, personas, FactorId::gender, 0.05, params);
    benchmark::DoNotOptimize(table.results.data());
  }
  state.SetItemsProcessed(state.iterations() * personas.personas.size());
}
BENCHMARK(BM_LanguageEffects)->Arg(100)->Arg(641);

void BM_SyntheticGeneration(benchmark::State& state) {
  PopulationSpec spec;
  spec.size = state.range(0);
  const auto personas = sample_population(spec, 17);
  auto model = SyntheticModel::with_default_vocab();
  model.seed = 17;
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::synthetic;
  cfg.seed = 17;
  for (auto _ : state) {
    Prober prober(cfg, nullptr, &model);
    auto corpus = prober.run_generation(
        personas, bundled_belief_question(Domain::parenting),
        PromptMode::explicit_persona, {FactorId::gender});
    benchmark::DoNotOptimize(corpus.records.data());
  }
  state.SetItemsProcessed(state.iterations() * personas.personas.size());
}
BENCHMARK(BM_SyntheticGeneration)->Arg(100)->Arg(641);

}  // namespace

BENCHMARK_MAIN();
