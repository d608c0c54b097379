#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "paudit/persona.hpp"

namespace paudit {

// Deterministic text generator used as an offline stand-in for a live model
// and as the ground-truth oracle for the end-to-end pipeline: factor-biased
// tokens are injected at known rates, so downstream effect sizes have a
// known sign and null behavior.
struct TokenBias {
  std::string token;
  double p_positive = 0.0;  // inclusion probability for label-1 personas
  double p_negative = 0.0;  // for label-0 personas
};

struct SyntheticModel {
  std::vector<std::string> base_vocab;
  std::map<FactorId, std::vector<TokenBias>> biases;
  int doc_length = 30;
  // Rating tasks: P(label=1) = sigmoid(intercept + slope * z), where z is
  // the 0/1 encoding (binary) or standardized age (continuous).
  double rating_intercept = 0.0;
  std::map<FactorId, double> rating_slopes;
  std::uint64_t seed = 0;

  // A small default English-ish vocabulary.
  static SyntheticModel with_default_vocab();
};

// Fully determined by (persona id, task id, model seed). Rating task ids
// start with "rate:"; everything else produces a document. Throws on an
// empty vocabulary.
std::string synthetic_complete(const Persona& persona,
                               const std::string& task_id,
                               const SyntheticModel& model);

// Persona-free judge: scores a prompt's embedded text by counting the
// model's positive- vs negative-leaning bias tokens and answering "1",
// "-1", or "0" on a tie, so judged scores track the writer's factors.
std::string synthetic_judge(const std::string& prompt,
                            const SyntheticModel& model);

}  // namespace paudit
