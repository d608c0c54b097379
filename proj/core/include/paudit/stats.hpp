#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paudit/persona.hpp"

namespace paudit {

// Two-sided p-value helpers exposed for reuse in tests and analyses.
double student_t_two_sided_p(double t, double df);
double normal_two_sided_p(double z);
// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

struct PearsonResult {
  double r = 0.0;
  double p = 1.0;
  int n = 0;
};

// Sample product-moment correlation, p from the t distribution with n-2 df.
// Throws std::invalid_argument on length mismatch, n < 3, or constant input.
PearsonResult pearson(std::span<const double> x, std::span<const double> y);

// Standardized mean difference (pooled sd), positive when the label-1 group
// mean is higher. Throws on a single-class group or zero pooled variance.
double cohens_d(std::span<const double> values, std::span<const int> group);

struct LogisticResult {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double p = 1.0;
  bool converged = false;
  int iterations = 0;
};

// Univariate logistic regression label ~ intercept + feature fit by Newton
// iterations (IRLS), Wald test on the slope. converged=false when the
// iteration cap is hit or |slope| > 20 (separation heuristic).
LogisticResult logistic_wald_p(std::span<const double> feature,
                               std::span<const int> label);

struct EffectResult {
  std::string feature;
  double effect = 0.0;
  double raw_p = 1.0;
  double adjusted_p = 1.0;
  bool significant = false;
  int n = 0;
  bool converged = true;
  bool skipped = false;  // degenerate feature, no effect computed
  long corpus_count = 0;  // feature occurrences across the corpus
};

struct EffectTable {
  std::string domain;
  std::string factor;
  std::string mode;
  double alpha = 0.05;
  int vocab_size = 0;
  std::vector<EffectResult> results;

  std::string to_csv() const;
};

// Continuous factor -> Pearson r; binary -> (Cohen's d, logistic Wald p).
// Degenerate features come back with skipped=true, never a fabricated p.
EffectResult effect_with_significance(const std::string& feature_id,
                                      std::span<const double> feature,
                                      std::span<const double> factor_values,
                                      FactorKind kind);

struct BhResult {
  std::vector<bool> reject;
  std::vector<double> adjusted;
};

// Benjamini-Hochberg step-up over raw p-values.
BhResult bh_fdr(const std::vector<double>& raw_p, double alpha = 0.05);

// Applies bh_fdr in place over the non-skipped entries of a table.
void apply_bh(EffectTable& table);

enum class Alignment { intersection, union_zero_fill };

struct MetaCorrelation {
  double r = 0.0;
  double p = 1.0;
  int aligned = 0;
};

// Pearson correlation of two per-feature effect vectors aligned by feature
// identity. Throws when fewer than min_overlap features align.
MetaCorrelation correlate_effect_vectors(
    const EffectTable& a, const EffectTable& b,
    Alignment alignment = Alignment::intersection, int min_overlap = 30);

// counts: items x categories matrix of rating counts (same rater total per
// item). Returns nullopt when expected agreement is 1.
std::optional<double> fleiss_kappa(
    const std::vector<std::vector<int>>& counts);

struct PairwiseKappaResult {
  double mean = 0.0;
  int defined_pairs = 0;
  long total_pairs = 0;
};

// Ratings matrices: one row per rater, entries 0/1 or -1 for missing, both
// over the same posts. Every cross pair (a in A, b in B) contributes one
// two-rater Fleiss kappa; undefined kappas are excluded and counted.
PairwiseKappaResult average_pairwise_kappa(
    const std::vector<std::vector<int>>& ratings_a,
    const std::vector<std::vector<int>>& ratings_b);

}  // namespace paudit
