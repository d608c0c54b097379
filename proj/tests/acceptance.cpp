// Acceptance gate: one line per criterion, nonzero exit if any gating
// criterion fails. The live-backend replication check is informational
// only and never fails the gate.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "paudit/analysis.hpp"
#include "paudit/bundled_data.hpp"
#include "paudit/persona.hpp"
#include "paudit/probe.hpp"
#include "paudit/report.hpp"
#include "paudit/rng.hpp"
#include "paudit/stats.hpp"
#include "paudit/synthetic.hpp"

using namespace paudit;

namespace {

// Tolerances for agreement with the independent oracles.
constexpr double kExactTol = 1e-9;     // closed-form recomputation
constexpr double kSlopeTol = 1e-6;     // iterative MLE agreement
constexpr double kPValueTol = 1e-4;    // p-values via different special
                                       // function evaluations

int failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
  std::printf("%s %s %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// --- A1: statistics against independent oracles -------------------------

bool check_stats_oracles(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20240501);
  int instances = 0;

  // Pearson r + p against direct computation and t quadrature.
  for (int trial = 0; trial < 400; ++trial) {
    const int n = 5 + int(rng.below(80));
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = rng.normal(0.0, 1.0);
      y[i] = 0.3 * x[i] + rng.normal(0.0, 1.0);
    }
    const auto res = pearson(x, y);
    double sx = 0, sy = 0;
    for (int i = 0; i < n; ++i) {
      sx += x[i];
      sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
      syy += (y[i] - my) * (y[i] - my);
    }
    const double r_direct = sxy / std::sqrt(sxx * syy);
    if (std::fabs(res.r - r_direct) > kExactTol) {
      detail = "pearson r mismatch";
      return false;
    }
    const double t = res.r * std::sqrt((n - 2) / (1.0 - res.r * res.r));
    if (std::fabs(res.p - oracles::t_two_sided_p_quadrature(t, n - 2)) >
        kPValueTol) {
      detail = "pearson p mismatch";
      return false;
    }
    ++instances;
  }

  // Pooled-sd standardized mean difference against direct recomputation.
  for (int trial = 0; trial < 400; ++trial) {
    const int n = 10 + int(rng.below(60));
    std::vector<double> values(n);
    std::vector<int> group(n);
    int ones = 0;
    for (int i = 0; i < n; ++i) {
      group[i] = int(rng.below(2));
      ones += group[i];
      values[i] = rng.normal(group[i] ? 0.5 : 0.0, 1.0);
    }
    if (ones < 2 || ones > n - 2) continue;
    const double d = cohens_d(values, group);
    double m1 = 0, m0 = 0;
    for (int i = 0; i < n; ++i) (group[i] ? m1 : m0) += values[i];
    m1 /= ones;
    m0 /= (n - ones);
    double ss1 = 0, ss0 = 0;
    for (int i = 0; i < n; ++i) {
      const double dev = values[i] - (group[i] ? m1 : m0);
      (group[i] ? ss1 : ss0) += dev * dev;
    }
    const double pooled = std::sqrt((ss1 + ss0) / (n - 2));
    if (std::fabs(d - (m1 - m0) / pooled) > kExactTol) {
      detail = "effect size mismatch";
      return false;
    }
    ++instances;
  }

  // Logistic slope and Wald p against the long-double reference fit.
  for (int trial = 0; trial < 250; ++trial) {
    const int n = 100;
    std::vector<double> x(n);
    std::vector<int> y(n);
    const double slope = rng.normal(0.0, 0.7);
    for (int i = 0; i < n; ++i) {
      x[i] = rng.normal(0.0, 1.0);
      const double p = 1.0 / (1.0 + std::exp(-(0.2 + slope * x[i])));
      y[i] = rng.uniform01() < p ? 1 : 0;
    }
    LogisticResult res;
    try {
      res = logistic_wald_p(x, y);
    } catch (const std::invalid_argument&) {
      continue;
    }
    if (!res.converged) continue;
    const auto ref = oracles::logistic_mle_reference(x, y);
    if (!ref.converged) continue;
    if (std::fabs(res.slope - double(ref.slope)) > kSlopeTol) {
      detail = "logistic slope mismatch";
      return false;
    }
    if (std::fabs(res.p - ref.wald_p) > kPValueTol) {
      detail = "logistic p mismatch";
      return false;
    }
    ++instances;
  }

  // Rater agreement against the definition-based reference.
  for (int trial = 0; trial < 200; ++trial) {
    const int items = 5 + int(rng.below(30));
    const int raters = 2 + int(rng.below(5));
    std::vector<std::vector<int>> counts(items, std::vector<int>(2, 0));
    for (auto& row : counts) {
      for (int r = 0; r < raters; ++r) ++row[rng.below(2)];
    }
    const auto kappa = fleiss_kappa(counts);
    bool defined = false;
    const double ref = oracles::fleiss_kappa_reference(counts, defined);
    if (kappa.has_value() != defined) {
      detail = "kappa definedness mismatch";
      return false;
    }
    if (defined && std::fabs(*kappa - ref) > kExactTol) {
      detail = "kappa mismatch";
      return false;
    }
    ++instances;
  }

  const double elapsed = seconds_since(t0);
  detail = std::to_string(instances) + " instances in " +
           std::to_string(elapsed) + "s";
  if (instances < 1000) {
    detail += " (too few instances)";
    return false;
  }
  return elapsed < 60.0;
}

// --- A2: multiple-comparison step-up vs brute force ---------------------

bool check_bh_brute_force(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20240502);
  for (int trial = 0; trial < 500; ++trial) {
    const int m = 1 + int(rng.below(1000));
    std::vector<double> p(m);
    for (int i = 0; i < m; ++i) {
      // Mix of null and signal p-values, with occasional exact ties.
      const double u = rng.uniform01();
      p[i] = rng.uniform01() < 0.3 ? u * 0.05 : u;
      if (i > 0 && rng.uniform01() < 0.05) p[i] = p[rng.below(i)];
    }
    const double alpha = 0.01 + rng.uniform01() * 0.19;
    const auto res = bh_fdr(p, alpha);
    const auto ref = oracles::bh_brute_force(p, alpha);
    if (res.reject != ref) {
      detail = "rejection set differs from brute force (trial " +
               std::to_string(trial) + ")";
      return false;
    }
    for (int i = 0; i < m; ++i) {
      if ((res.adjusted[i] <= alpha) != res.reject[i]) {
        detail = "adjusted p inconsistent with rejection mask";
        return false;
      }
    }
  }
  const double elapsed = seconds_since(t0);
  detail = "500 trials in " + std::to_string(elapsed) + "s";
  return elapsed < 10.0;
}

// --- A3: end-to-end signal recovery and null behavior -------------------

Corpus run_generation(const PersonaSet& personas, const SyntheticModel& model,
                      std::uint64_t seed, Domain domain,
                      const std::vector<FactorId>& factors) {
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::synthetic;
  cfg.seed = seed;
  Prober prober(cfg, nullptr, &model);
  return prober.run_generation(personas, bundled_belief_question(domain),
                               PromptMode::explicit_persona, factors);
}

bool check_signal_recovery(std::string& detail) {
  FeatureParams params;
  params.orders = {1};
  int recovered = 0, clean_null = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    PopulationSpec spec;  // default size
    const auto personas = sample_population(spec, 1000 + s);

    auto model = SyntheticModel::with_default_vocab();
    model.seed = 2000 + s;
    model.biases[FactorId::gender] = {{"caregivers", 0.6, 0.2},
                                      {"breadwinner", 0.2, 0.6}};
    const auto corpus = run_generation(personas, model, 2000 + s,
                                       Domain::parenting, {FactorId::gender});
    const auto table =
        language_effects(corpus, personas, FactorId::gender, 0.05, params);
    bool pos_ok = false, neg_ok = false;
    for (const auto& r : table.results) {
      if (r.feature == "caregivers" && r.significant && r.effect > 0) {
        pos_ok = true;
      }
      if (r.feature == "breadwinner" && r.significant && r.effect < 0) {
        neg_ok = true;
      }
    }
    if (pos_ok && neg_ok) ++recovered;

    auto null_model = SyntheticModel::with_default_vocab();
    null_model.seed = 3000 + s;
    const auto null_corpus = run_generation(
        personas, null_model, 3000 + s, Domain::parenting, {FactorId::gender});
    const auto null_table = language_effects(null_corpus, personas,
                                             FactorId::gender, 0.05, params);
    bool any_significant = false;
    for (const auto& r : null_table.results) {
      if (r.significant) any_significant = true;
    }
    if (!any_significant) ++clean_null;
  }
  detail = "signal " + std::to_string(recovered) + "/20, null clean " +
           std::to_string(clean_null) + "/20";
  return recovered >= 19 && clean_null >= 19;
}

// --- A4: correlation-of-correlations discrimination ---------------------

bool check_meta_correlation(std::string& detail) {
  FeatureParams params;
  params.orders = {1};
  // A wide filler vocabulary keeps the null correlation tight around zero
  // while the strongly biased markers dominate the shared-signal case.
  auto wide_model = [] {
    auto m = SyntheticModel::with_default_vocab();
    for (int i = 0; i < 280; ++i) {
      m.base_vocab.push_back("filler" + std::to_string(i));
    }
    return m;
  };
  int shared_ok = 0, independent_ok = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    PopulationSpec spec;
    spec.size = 250;
    const auto personas = sample_population(spec, 4000 + s);

    // Twelve tokens with strong, alternating gender associations.
    std::vector<TokenBias> biases;
    for (int i = 0; i < 12; ++i) {
      const std::string token = "marker" + std::to_string(i);
      if (i % 2 == 0) {
        biases.push_back({token, 0.8, 0.05});
      } else {
        biases.push_back({token, 0.05, 0.8});
      }
    }
    auto model_a = wide_model();
    model_a.seed = 5000 + s;
    model_a.biases[FactorId::gender] = biases;
    auto model_b = model_a;
    model_b.seed = 6000 + s;  // same biases, independent noise

    const auto corpus_a = run_generation(personas, model_a, 5000 + s,
                                         Domain::parenting, {FactorId::gender});
    const auto corpus_b = run_generation(personas, model_b, 6000 + s,
                                         Domain::parenting, {FactorId::gender});
    const auto shared = compare_language_associations(
        corpus_a, corpus_b, personas, FactorId::gender, 0.05, params);
    if (shared.r > 0.8) ++shared_ok;

    // Disjoint marker vocabularies: association vectors should decouple.
    std::vector<TokenBias> other;
    for (int i = 0; i < 12; ++i) {
      const std::string token = "signal" + std::to_string(i);
      if (i % 2 == 0) {
        other.push_back({token, 0.8, 0.05});
      } else {
        other.push_back({token, 0.05, 0.8});
      }
    }
    auto model_c = wide_model();
    model_c.seed = 7000 + s;
    model_c.biases[FactorId::gender] = other;
    const auto corpus_c = run_generation(personas, model_c, 7000 + s,
                                         Domain::parenting, {FactorId::gender});
    const auto independent = compare_language_associations(
        corpus_a, corpus_c, personas, FactorId::gender, 0.05, params);
    if (std::fabs(independent.r) < 0.15) ++independent_ok;
  }
  detail = "shared " + std::to_string(shared_ok) + "/20, independent " +
           std::to_string(independent_ok) + "/20";
  return shared_ok >= 19 && independent_ok >= 19;
}

// --- A5: population composition -----------------------------------------

bool check_population(std::string& detail) {
  for (std::uint64_t seed : {0ULL, 1ULL, 7ULL, 99ULL}) {
    const PopulationSpec spec;
    const auto set = sample_population(spec, seed);
    if (set.size() != 641) {
      detail = "population size != 641";
      return false;
    }
    auto count = [&](FactorId f) {
      int c = 0;
      for (const auto& p : set.personas) c += p.value(f);
      return c;
    };
    if (count(FactorId::gender) != 346 || count(FactorId::race) != 83 ||
        count(FactorId::political_ideology) != 186 ||
        count(FactorId::substance_use) != 240) {
      detail = "factor counts off (seed " + std::to_string(seed) + ")";
      return false;
    }
    double mean = 0.0;
    for (const auto& p : set.personas) {
      const int age = p.value(FactorId::age);
      if (age < spec.age_min || age > spec.age_max) {
        detail = "age out of range";
        return false;
      }
      mean += age;
    }
    mean /= set.size();
    if (std::fabs(mean - spec.age_mean) >
        3.0 * spec.age_sd / std::sqrt(double(spec.size))) {
      detail = "age mean outside statistical tolerance";
      return false;
    }
  }
  detail = "counts 346/83/186/240 exact across 4 seeds";
  return true;
}

// --- A6: byte-identical reruns ------------------------------------------

struct PipelineOutput {
  std::string personas;
  std::string corpus;
  std::string effects_csv;
  std::string svg;
};

PipelineOutput run_pipeline(std::uint64_t seed) {
  PopulationSpec spec;
  spec.size = 120;
  spec.seed = seed;
  const auto personas = sample_population(spec, seed);

  auto model = SyntheticModel::with_default_vocab();
  model.seed = seed;
  model.biases[FactorId::gender] = {{"caregivers", 0.7, 0.1},
                                    {"breadwinner", 0.1, 0.7}};

  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::synthetic;
  cfg.seed = seed;
  ResponseCache cache;  // fresh in-memory cache per run
  Prober prober(cfg, &cache, &model);
  auto corpus =
      prober.run_generation(personas, bundled_belief_question(Domain::parenting),
                            PromptMode::explicit_persona, {FactorId::gender});
  // Timestamps track wall time; blank them for byte comparison of reruns.
  for (auto& rec : corpus.records) rec.timestamp.clear();

  FeatureParams params;
  params.orders = {1, 2};
  const auto table =
      language_effects(corpus, personas, FactorId::gender, 0.05, params);

  CloudLayoutParams layout;
  layout.seed = seed;

  PipelineOutput out;
  out.personas = personas_to_jsonl(personas);
  out.corpus = corpus.to_jsonl();
  out.effects_csv = table.to_csv();
  out.svg = render_svg(wordcloud_data(table), layout);
  return out;
}

bool check_determinism(std::string& detail) {
  const auto a = run_pipeline(77);
  const auto b = run_pipeline(77);
  if (a.personas != b.personas) {
    detail = "persona file differs between reruns";
    return false;
  }
  if (a.corpus != b.corpus) {
    detail = "corpus file differs between reruns";
    return false;
  }
  if (a.effects_csv != b.effects_csv) {
    detail = "effect table differs between reruns";
    return false;
  }
  if (a.svg != b.svg) {
    detail = "rendered cloud differs between reruns";
    return false;
  }
  const auto c = run_pipeline(78);
  if (a.corpus == c.corpus) {
    detail = "different seeds produced identical corpora";
    return false;
  }
  detail = "all artifacts byte-identical across reruns";
  return true;
}

// --- A7: live replication (informational) -------------------------------

void check_live_replication() {
  const char* key = std::getenv("OPENAI_API_KEY");
  const char* endpoint = std::getenv("PAUDIT_LIVE_ENDPOINT");
  if (key == nullptr || endpoint == nullptr) {
    std::printf(
        "A7 SKIP (non-gating) set OPENAI_API_KEY and PAUDIT_LIVE_ENDPOINT "
        "to diff a live backend against the published reference values\n");
    return;
  }
  try {
    BackendConfig cfg;
    cfg.kind = BackendConfig::Kind::http_chat;
    cfg.endpoint = endpoint;
    const char* model = std::getenv("PAUDIT_LIVE_MODEL");
    cfg.model = model ? model : "gpt-3.5-turbo";
    cfg.validate();
    PopulationSpec spec;
    spec.size = 24;  // small probe population to bound cost
    const auto personas = sample_population(spec, 1);
    Prober prober(cfg);
    const auto table = prober.run_annotation(personas, bundled_vignettes()[0],
                                             PromptMode::explicit_persona,
                                             {FactorId::political_ideology});
    std::map<Construct, std::map<FactorId, AnnotationTable>> tables;
    tables[table.construct][FactorId::political_ideology] = table;
    const auto grid = annotation_effects(tables, personas);
    std::map<std::string, std::optional<double>> live;
    for (const auto& cell : grid.cells) {
      live["annotation|" + factor_name(cell.factor) + "|explicit/" +
           construct_name(cell.construct)] =
          cell.result.significant ? std::optional<double>(cell.result.effect)
                                  : std::nullopt;
    }
    const auto diff = replication_diff(live);
    std::printf("A7 INFO (non-gating) live diff rows: %zu\n", diff.size());
  } catch (const std::exception& e) {
    std::printf("A7 SKIP (non-gating) live probe failed: %s\n", e.what());
  }
}

}  // namespace

int main() {
  std::string detail;

  bool ok = check_stats_oracles(detail);
  report("A1", ok, detail);

  ok = check_bh_brute_force(detail);
  report("A2", ok, detail);

  ok = check_signal_recovery(detail);
  report("A3", ok, detail);

  ok = check_meta_correlation(detail);
  report("A4", ok, detail);

  ok = check_population(detail);
  report("A5", ok, detail);

  ok = check_determinism(detail);
  report("A6", ok, detail);

  check_live_replication();

  return failures == 0 ? 0 : 1;
}
