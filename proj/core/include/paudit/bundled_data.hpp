#pragma once

#include <optional>
#include <string>
#include <vector>

#include "paudit/probe.hpp"

namespace paudit {

// Default task data: the two five-post vignettes, one belief question per
// domain, and the numeric-answer judge questions.
const std::vector<Vignette>& bundled_vignettes();
const std::vector<BeliefQuestion>& bundled_belief_questions();
const std::vector<ValidationQuestion>& bundled_validation_questions();

const BeliefQuestion& bundled_belief_question(Domain d);
const ValidationQuestion& bundled_validation_question(Domain d);

// Small illustrative demographic name table (CSV, header
// `name,slot,signal,label`). Real census/name-list files plug in through the
// same format.
std::string bundled_name_table_csv();

// Published reference values the replication report diffs against. A missing
// value means the source reported the cell as not significant.
struct ReferenceValue {
  std::string table;  // "annotation", "bgt2", "bgt3", "importance", "reliability"
  std::string row;
  std::string col;
  std::optional<double> value;
};

const std::vector<ReferenceValue>& reference_values();

}  // namespace paudit
