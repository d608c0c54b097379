#include "paudit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "paudit/rng.hpp"

namespace paudit {

SyntheticModel SyntheticModel::with_default_vocab() {
  SyntheticModel m;
  m.base_vocab = {
      "the",   "a",      "of",     "to",     "and",    "in",    "that",
      "is",    "for",    "it",     "on",     "with",   "as",    "this",
      "be",    "are",    "from",   "have",   "people", "think", "believe",
      "issue", "policy", "matter", "view",   "often",  "many",  "should",
      "would", "could",  "change", "society"};
  return m;
}

namespace {

double bias_probability(const Persona& persona, FactorId factor,
                        const TokenBias& bias) {
  if (factor == FactorId::age) {
    // Interpolate over the adult age range so older personas approach
    // p_positive and younger ones p_negative.
    const double age = persona.value(FactorId::age);
    const double t = std::clamp((age - 18.0) / (80.0 - 18.0), 0.0, 1.0);
    return bias.p_negative + t * (bias.p_positive - bias.p_negative);
  }
  return persona.value(factor) == 1 ? bias.p_positive : bias.p_negative;
}

}  // namespace

std::string synthetic_complete(const Persona& persona,
                               const std::string& task_id,
                               const SyntheticModel& model) {
  Rng rng(hash64_combine(
      hash64_combine(model.seed, std::uint64_t(persona.id)), task_id));

  if (task_id.rfind("rate:", 0) == 0) {
    double eta = model.rating_intercept;
    for (const auto& [factor, slope] : model.rating_slopes) {
      double z;
      if (factor == FactorId::age) {
        z = (persona.value(FactorId::age) - 39.3) / 10.1;
      } else {
        z = persona.value(factor);
      }
      eta += slope * z;
    }
    const double p = 1.0 / (1.0 + std::exp(-eta));
    return rng.uniform01() < p ? "yes" : "no";
  }

  if (model.base_vocab.empty()) {
    throw std::invalid_argument("synthetic_complete: empty vocabulary");
  }
  std::vector<std::string> tokens;
  tokens.reserve(model.doc_length + 8);
  for (int i = 0; i < model.doc_length; ++i) {
    tokens.push_back(model.base_vocab[rng.below(model.base_vocab.size())]);
  }
  for (const auto& [factor, biases] : model.biases) {
    for (const auto& bias : biases) {
      if (rng.uniform01() < bias_probability(persona, factor, bias)) {
        tokens.push_back(bias.token);
      }
    }
  }
  rng.shuffle(tokens);

  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::string synthetic_judge(const std::string& prompt,
                            const SyntheticModel& model) {
  long score = 0;
  for (const auto& [factor, biases] : model.biases) {
    for (const auto& bias : biases) {
      const int lean = bias.p_positive > bias.p_negative   ? 1
                       : bias.p_positive < bias.p_negative ? -1
                                                           : 0;
      if (lean == 0) continue;
      std::size_t pos = 0;
      while ((pos = prompt.find(bias.token, pos)) != std::string::npos) {
        score += lean;
        pos += bias.token.size();
      }
    }
  }
  return score > 0 ? "1" : score < 0 ? "-1" : "0";
}

}  // namespace paudit
