#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "paudit/features.hpp"
#include "paudit/persona.hpp"
#include "paudit/probe.hpp"
#include "paudit/stats.hpp"

namespace paudit {

struct FeatureParams {
  std::vector<int> orders = {1, 2, 3};
  int min_doc_count = 5;
};

// Per-feature effects of a corpus against one factor's persona labels,
// BH-corrected within the table.
EffectTable language_effects(const Corpus& corpus, const PersonaSet& personas,
                             FactorId factor, double alpha = 0.05,
                             const FeatureParams& params = {});

struct AnnotationEffectsGrid {
  struct Cell {
    FactorId factor;
    Construct construct;
    EffectResult result;
  };
  std::vector<Cell> cells;
  double alpha = 0.05;
};

// Average-labels-per-persona vector correlated with each factor, one BH
// correction across the whole grid.
AnnotationEffectsGrid annotation_effects(
    const std::map<Construct, std::map<FactorId, AnnotationTable>>& tables,
    const PersonaSet& personas, double alpha = 0.05);

struct Bgt1Result {
  EffectTable full;
  // Significant features only, ordered by |effect| descending.
  EffectTable significant;
};

Bgt1Result bgt1(const Corpus& corpus, const PersonaSet& personas,
                double alpha = 0.05, const FeatureParams& params = {});

// Judge scores (-1/0/1) correlated with the persona factor values. Missing
// scores are excluded; throws when no score carries signal.
PearsonResult bgt1_validation(const Corpus& corpus,
                              const std::vector<std::optional<int>>& scores,
                              const PersonaSet& personas);

struct MetaCell {
  FactorId row_factor;
  FactorId col_factor;
  MetaCorrelation meta;
  double adjusted_p = 1.0;
  bool significant = false;
};

// Lower-triangular factor-pair matrix of correlation-of-correlations for one
// domain; each corpus was generated with its own factor's persona prompt.
// BH-corrected across the cells.
std::vector<MetaCell> bgt2(const std::map<FactorId, Corpus>& corpora,
                           const PersonaSet& personas, double alpha = 0.05,
                           const FeatureParams& params = {},
                           Alignment alignment = Alignment::intersection);

// Correlation between the two corpora's per-feature effect vectors for one
// factor. Shared machinery behind bgt3 and importance.
MetaCorrelation compare_language_associations(
    const Corpus& corpus_a, const Corpus& corpus_b, const PersonaSet& personas,
    FactorId factor, double alpha = 0.05, const FeatureParams& params = {},
    Alignment alignment = Alignment::intersection);

// Explicit vs implicit persona agreement; factor must support implicit mode.
MetaCorrelation bgt3(const Corpus& explicit_corpus,
                     const Corpus& implicit_corpus, const PersonaSet& personas,
                     FactorId factor, double alpha = 0.05,
                     const FeatureParams& params = {},
                     Alignment alignment = Alignment::intersection);

// Full-persona vs single-factor-persona agreement for one factor.
MetaCorrelation importance(const Corpus& full_persona_corpus,
                           const Corpus& single_factor_corpus,
                           const PersonaSet& personas, FactorId factor,
                           double alpha = 0.05,
                           const FeatureParams& params = {},
                           Alignment alignment = Alignment::intersection);

struct PersonaTypeFilter {
  std::string label;   // e.g. "All", "Female"
  // nullopt -> no restriction
  std::optional<FactorId> factor;
  int value = 1;
};

std::vector<PersonaTypeFilter> default_persona_type_filters();

struct ReliabilityRow {
  std::string persona_type;
  PairwiseKappaResult kappa;
};

// Average pairwise two-rater Fleiss kappa between the raters of A and B,
// restricted per row to a persona subset.
std::vector<ReliabilityRow> reliability(
    const AnnotationTable& a, const AnnotationTable& b,
    const PersonaSet& personas,
    const std::vector<PersonaTypeFilter>& filters =
        default_persona_type_filters());

}  // namespace paudit
