#include "paudit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace paudit {

EffectTable language_effects(const Corpus& corpus, const PersonaSet& personas,
                             FactorId factor, double alpha,
                             const FeatureParams& params) {
  const auto docs = corpus.documents();
  if (docs.empty()) {
    throw std::runtime_error("language_effects: corpus has no documents");
  }
  const auto matrix = extract_ngrams(docs, params.orders, params.min_doc_count);
  if (matrix.features.empty()) {
    throw std::runtime_error(
        "language_effects: empty vocabulary after document-count threshold");
  }
  std::vector<double> factor_values;
  factor_values.reserve(docs.size());
  for (const auto& rec : corpus.records) {
    if (rec.missing) continue;
    factor_values.push_back(personas.by_id(rec.persona_id).value(factor));
  }

  EffectTable table;
  table.domain = domain_name(corpus.domain);
  table.factor = factor_name(factor);
  table.mode = mode_name(corpus.mode);
  table.alpha = alpha;
  const FactorKind kind = factor_info(factor).kind;
  table.results.reserve(matrix.features.size());
  for (std::size_t f = 0; f < matrix.features.size(); ++f) {
    const auto column = matrix.column(static_cast<int>(f));
    auto result = effect_with_significance(matrix.features[f], column,
                                           factor_values, kind);
    result.corpus_count = matrix.corpus_count[f];
    table.results.push_back(std::move(result));
  }
  apply_bh(table);
  return table;
}

AnnotationEffectsGrid annotation_effects(
    const std::map<Construct, std::map<FactorId, AnnotationTable>>& tables,
    const PersonaSet& personas, double alpha) {
  AnnotationEffectsGrid grid;
  grid.alpha = alpha;
  for (const auto& [construct, per_factor] : tables) {
    for (const auto& [factor, table] : per_factor) {
      const auto averages = table.persona_averages();
      std::vector<double> values, factor_values;
      for (std::size_t i = 0; i < averages.size(); ++i) {
        if (!averages[i]) continue;  // fully-missing persona excluded
        values.push_back(*averages[i]);
        factor_values.push_back(
            personas.by_id(table.persona_ids[i]).value(factor));
      }
      AnnotationEffectsGrid::Cell cell;
      cell.factor = factor;
      cell.construct = construct;
      cell.result = effect_with_significance(
          factor_name(factor) + "/" + construct_name(construct), values,
          factor_values, factor_info(factor).kind);
      grid.cells.push_back(std::move(cell));
    }
  }
  // One BH correction across the whole grid.
  std::vector<double> raw;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    if (!grid.cells[i].result.skipped) {
      raw.push_back(grid.cells[i].result.raw_p);
      idx.push_back(i);
    }
  }
  const auto bh = bh_fdr(raw, alpha);
  for (std::size_t j = 0; j < idx.size(); ++j) {
    grid.cells[idx[j]].result.adjusted_p = bh.adjusted[j];
    grid.cells[idx[j]].result.significant = bh.reject[j];
  }
  return grid;
}

Bgt1Result bgt1(const Corpus& corpus, const PersonaSet& personas, double alpha,
                const FeatureParams& params) {
  Bgt1Result out;
  out.full = language_effects(corpus, personas, corpus.factor, alpha, params);
  out.significant = out.full;
  auto& res = out.significant.results;
  res.erase(std::remove_if(res.begin(), res.end(),
                           [](const EffectResult& r) {
                             return r.skipped || !r.significant;
                           }),
            res.end());
  std::sort(res.begin(), res.end(), [](const auto& a, const auto& b) {
    if (std::fabs(a.effect) != std::fabs(b.effect)) {
      return std::fabs(a.effect) > std::fabs(b.effect);
    }
    return a.feature < b.feature;
  });
  return out;
}

PearsonResult bgt1_validation(const Corpus& corpus,
                              const std::vector<std::optional<int>>& scores,
                              const PersonaSet& personas) {
  if (scores.size() != corpus.records.size()) {
    throw std::invalid_argument(
        "bgt1_validation: score count does not match corpus");
  }
  std::vector<double> score_values, factor_values;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (corpus.records[i].missing || !scores[i]) continue;
    score_values.push_back(*scores[i]);
    factor_values.push_back(
        personas.by_id(corpus.records[i].persona_id).value(corpus.factor));
  }
  if (score_values.empty()) {
    throw std::runtime_error("bgt1_validation: all judge scores missing");
  }
  try {
    return pearson(score_values, factor_values);
  } catch (const std::invalid_argument&) {
    throw std::runtime_error(
        "bgt1_validation: no signal (constant scores or factor)");
  }
}

std::vector<MetaCell> bgt2(const std::map<FactorId, Corpus>& corpora,
                           const PersonaSet& personas, double alpha,
                           const FeatureParams& params, Alignment alignment) {
  if (corpora.empty()) throw std::invalid_argument("bgt2: no corpora");
  const Domain domain = corpora.begin()->second.domain;
  std::map<FactorId, EffectTable> effects;
  for (const auto& [factor, corpus] : corpora) {
    if (corpus.domain != domain) {
      throw std::invalid_argument(
          "bgt2: corpora must come from the same domain question");
    }
    effects.emplace(factor,
                    language_effects(corpus, personas, factor, alpha, params));
  }
  std::vector<MetaCell> cells;
  for (auto it_a = effects.begin(); it_a != effects.end(); ++it_a) {
    for (auto it_b = std::next(it_a); it_b != effects.end(); ++it_b) {
      MetaCell cell;
      cell.row_factor = it_b->first;  // lower triangle: later factor as row
      cell.col_factor = it_a->first;
      cell.meta = correlate_effect_vectors(it_b->second, it_a->second,
                                           alignment);
      cells.push_back(std::move(cell));
    }
  }
  std::vector<double> raw;
  raw.reserve(cells.size());
  for (const auto& c : cells) raw.push_back(c.meta.p);
  const auto bh = bh_fdr(raw, alpha);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    cells[i].adjusted_p = bh.adjusted[i];
    cells[i].significant = bh.reject[i];
  }
  return cells;
}

MetaCorrelation compare_language_associations(
    const Corpus& corpus_a, const Corpus& corpus_b, const PersonaSet& personas,
    FactorId factor, double alpha, const FeatureParams& params,
    Alignment alignment) {
  if (corpus_a.domain != corpus_b.domain) {
    throw std::invalid_argument(
        "compare_language_associations: corpora answer different domain "
        "questions");
  }
  const auto table_a =
      language_effects(corpus_a, personas, factor, alpha, params);
  const auto table_b =
      language_effects(corpus_b, personas, factor, alpha, params);
  return correlate_effect_vectors(table_a, table_b, alignment);
}

MetaCorrelation bgt3(const Corpus& explicit_corpus,
                     const Corpus& implicit_corpus, const PersonaSet& personas,
                     FactorId factor, double alpha, const FeatureParams& params,
                     Alignment alignment) {
  if (factor != FactorId::age && factor != FactorId::gender &&
      factor != FactorId::race) {
    throw std::invalid_argument("bgt3: factor lacks implicit-name support: " +
                                factor_name(factor));
  }
  return compare_language_associations(explicit_corpus, implicit_corpus,
                                       personas, factor, alpha, params,
                                       alignment);
}

MetaCorrelation importance(const Corpus& full_persona_corpus,
                           const Corpus& single_factor_corpus,
                           const PersonaSet& personas, FactorId factor,
                           double alpha, const FeatureParams& params,
                           Alignment alignment) {
  if (full_persona_corpus.prompt_factors.size() != all_factors().size()) {
    throw std::invalid_argument(
        "importance: first corpus must be generated with the full persona");
  }
  return compare_language_associations(full_persona_corpus,
                                       single_factor_corpus, personas, factor,
                                       alpha, params, alignment);
}

std::vector<PersonaTypeFilter> default_persona_type_filters() {
  std::vector<PersonaTypeFilter> filters;
  filters.push_back({"All", std::nullopt, 0});
  filters.push_back({"Black", FactorId::race, 1});
  filters.push_back({"White", FactorId::race, 0});
  filters.push_back({"Female", FactorId::gender, 1});
  filters.push_back({"Male", FactorId::gender, 0});
  filters.push_back({"Conservative", FactorId::political_ideology, 1});
  filters.push_back({"Liberal", FactorId::political_ideology, 0});
  filters.push_back({"Uses Substances", FactorId::substance_use, 1});
  filters.push_back({"No Substances", FactorId::substance_use, 0});
  return filters;
}

namespace {

std::vector<std::vector<int>> subset_rows(const AnnotationTable& t,
                                          const PersonaSet& personas,
                                          const PersonaTypeFilter& filter) {
  std::vector<std::vector<int>> rows;
  for (std::size_t i = 0; i < t.labels.size(); ++i) {
    if (filter.factor &&
        personas.by_id(t.persona_ids[i]).value(*filter.factor) !=
            filter.value) {
      continue;
    }
    rows.push_back(t.labels[i]);
  }
  return rows;
}

}  // namespace

std::vector<ReliabilityRow> reliability(
    const AnnotationTable& a, const AnnotationTable& b,
    const PersonaSet& personas,
    const std::vector<PersonaTypeFilter>& filters) {
  std::vector<ReliabilityRow> out;
  for (const auto& filter : filters) {
    const auto rows_a = subset_rows(a, personas, filter);
    const auto rows_b = subset_rows(b, personas, filter);
    if (rows_a.empty() || rows_b.empty()) {
      throw std::runtime_error("reliability: empty persona subset '" +
                               filter.label + "'");
    }
    out.push_back({filter.label, average_pairwise_kappa(rows_a, rows_b)});
  }
  return out;
}

}  // namespace paudit
