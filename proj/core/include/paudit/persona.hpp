#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace paudit {

enum class FactorId { age, gender, race, political_ideology, substance_use };
enum class FactorKind { continuous, binary };

struct HumanFactor {
  FactorId id;
  FactorKind kind;
  // Binary factors only; the positive label is encoded as 1.
  std::string positive_label;
  std::string negative_label;
};

const std::array<HumanFactor, 5>& all_factors();
const HumanFactor& factor_info(FactorId id);
std::string factor_name(FactorId id);
FactorId factor_from_name(const std::string& name);
std::vector<FactorId> binary_factors();

struct PopulationSpec {
  int size = 641;
  // Fraction of the positive label per binary factor.
  std::map<FactorId, double> binary_proportions = {
      {FactorId::gender, 0.54},
      {FactorId::race, 0.13},
      {FactorId::political_ideology, 0.29},
      {FactorId::substance_use, 0.374},
  };
  double age_mean = 39.3;
  double age_sd = 10.1;
  int age_min = 18;
  int age_max = 80;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument on violation.
  void validate() const;
};

struct PersonaName {
  std::string first;
  std::string surname;  // may be empty

  std::string full() const {
    return surname.empty() ? first : first + " " + surname;
  }
};

struct Persona {
  int id = 0;
  // Binary factors hold the 0/1 encoding; age holds whole years.
  std::map<FactorId, int> factors;
  std::optional<PersonaName> name;

  int value(FactorId f) const;
  bool supports_implicit() const { return name.has_value(); }
};

struct PersonaSet {
  std::vector<Persona> personas;

  std::size_t size() const { return personas.size(); }
  const Persona& by_id(int id) const;
  // Column of factor values in persona order (age in years, binary as 0/1).
  std::vector<double> factor_column(FactorId f) const;
};

// Exact-count assignment: positive count is the largest-remainder rounding
// of proportion * size, ties broken by lexicographic label order.
std::pair<int, int> largest_remainder_counts(double proportion, int size,
                                             const std::string& positive_label,
                                             const std::string& negative_label);

PersonaSet sample_population(const PopulationSpec& spec);
PersonaSet sample_population(const PopulationSpec& spec, std::uint64_t seed);

enum class NameSlot { first, surname };

struct NameRow {
  std::string name;
  NameSlot slot = NameSlot::first;
  FactorId signal = FactorId::gender;
  // Binary label ("female", "Black", ...) or a 4-digit decade ("1980").
  std::string label;
};

struct NameTable {
  std::vector<NameRow> rows;

  // CSV with header `name,slot,signal,label`.
  static NameTable from_csv_file(const std::string& path);
  static NameTable from_csv(const std::string& content);
};

// Assigns first names (and, for race, surnames) matching each persona's
// label or birth decade. Personas gain implicit-mode support.
void assign_names(PersonaSet& personas, const NameTable& table, FactorId factor,
                  int reference_year, std::uint64_t seed);

enum class PromptMode { explicit_persona, implicit_persona };

std::string mode_name(PromptMode mode);
PromptMode mode_from_name(const std::string& name);

// The explicit persona clause for a single factor, e.g. "65 years old".
std::string explicit_clause(const Persona& p, FactorId f);

std::string render_prompt(const Persona& p, PromptMode mode,
                          const std::vector<FactorId>& factors,
                          const std::string& preamble);

// JSON Lines, one persona per line with fields `id`, `factors`, `name`.
std::string personas_to_jsonl(const PersonaSet& set);
PersonaSet personas_from_jsonl(const std::string& content);

}  // namespace paudit
