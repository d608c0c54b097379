#include "paudit/persona.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "paudit/rng.hpp"

namespace paudit {

using nlohmann::json;

const std::array<HumanFactor, 5>& all_factors() {
  static const std::array<HumanFactor, 5> factors = {{
      {FactorId::age, FactorKind::continuous, "", ""},
      {FactorId::gender, FactorKind::binary, "female", "male"},
      {FactorId::race, FactorKind::binary, "Black", "White"},
      {FactorId::political_ideology, FactorKind::binary, "conservative",
       "liberal"},
      {FactorId::substance_use, FactorKind::binary, "uses substances",
       "does not use substances"},
  }};
  return factors;
}

const HumanFactor& factor_info(FactorId id) {
  for (const auto& f : all_factors()) {
    if (f.id == id) return f;
  }
  throw std::invalid_argument("unknown factor id");
}

std::string factor_name(FactorId id) {
  switch (id) {
    case FactorId::age: return "age";
    case FactorId::gender: return "gender";
    case FactorId::race: return "race";
    case FactorId::political_ideology: return "political_ideology";
    case FactorId::substance_use: return "substance_use";
  }
  throw std::invalid_argument("unknown factor id");
}

FactorId factor_from_name(const std::string& name) {
  for (const auto& f : all_factors()) {
    if (factor_name(f.id) == name) return f.id;
  }
  throw std::invalid_argument("unknown factor name: " + name);
}

std::vector<FactorId> binary_factors() {
  std::vector<FactorId> out;
  for (const auto& f : all_factors()) {
    if (f.kind == FactorKind::binary) out.push_back(f.id);
  }
  return out;
}

void PopulationSpec::validate() const {
  if (size <= 0) throw std::invalid_argument("population size must be > 0");
  for (const auto& [f, p] : binary_proportions) {
    if (factor_info(f).kind != FactorKind::binary) {
      throw std::invalid_argument("proportion given for non-binary factor " +
                                  factor_name(f));
    }
    if (p < 0.0 || p > 1.0) {
      throw std::invalid_argument("proportion for " + factor_name(f) +
                                  " outside [0, 1]");
    }
  }
  for (FactorId f : binary_factors()) {
    if (!binary_proportions.count(f)) {
      throw std::invalid_argument("missing proportion for " + factor_name(f));
    }
  }
  if (age_sd <= 0.0) throw std::invalid_argument("age_sd must be > 0");
  if (age_min > age_max) throw std::invalid_argument("empty age clamp range");
}

int Persona::value(FactorId f) const {
  auto it = factors.find(f);
  if (it == factors.end()) {
    throw std::out_of_range("persona has no value for " + factor_name(f));
  }
  return it->second;
}

const Persona& PersonaSet::by_id(int id) const {
  for (const auto& p : personas) {
    if (p.id == id) return p;
  }
  throw std::out_of_range("no persona with id " + std::to_string(id));
}

std::vector<double> PersonaSet::factor_column(FactorId f) const {
  std::vector<double> out;
  out.reserve(personas.size());
  for (const auto& p : personas) out.push_back(p.value(f));
  return out;
}

std::pair<int, int> largest_remainder_counts(
    double proportion, int size, const std::string& positive_label,
    const std::string& negative_label) {
  const double pos_exact = proportion * size;
  const double neg_exact = (1.0 - proportion) * size;
  int pos = static_cast<int>(std::floor(pos_exact));
  int neg = static_cast<int>(std::floor(neg_exact));
  int leftover = size - pos - neg;
  const double pos_rem = pos_exact - pos;
  const double neg_rem = neg_exact - neg;
  while (leftover > 0) {
    if (pos_rem > neg_rem ||
        (pos_rem == neg_rem && positive_label < negative_label)) {
      ++pos;
    } else {
      ++neg;
    }
    --leftover;
  }
  return {pos, neg};
}

PersonaSet sample_population(const PopulationSpec& spec) {
  return sample_population(spec, spec.seed);
}

PersonaSet sample_population(const PopulationSpec& spec, std::uint64_t seed) {
  spec.validate();
  PersonaSet set;
  set.personas.resize(spec.size);
  for (int i = 0; i < spec.size; ++i) set.personas[i].id = i;

  // Independent seeded shuffle per binary factor: exact counts, no
  // cross-factor correlation by construction.
  for (FactorId f : binary_factors()) {
    const auto& info = factor_info(f);
    auto [pos, neg] =
        largest_remainder_counts(spec.binary_proportions.at(f), spec.size,
                                 info.positive_label, info.negative_label);
    std::vector<int> values(spec.size, 0);
    std::fill(values.begin(), values.begin() + pos, 1);
    Rng rng(hash64_combine(seed, "factor:" + factor_name(f)));
    rng.shuffle(values);
    for (int i = 0; i < spec.size; ++i) {
      set.personas[i].factors[f] = values[i];
    }
    (void)neg;
  }

  Rng age_rng(hash64_combine(seed, "factor:age"));
  for (int i = 0; i < spec.size; ++i) {
    const double draw = age_rng.normal(spec.age_mean, spec.age_sd);
    int age = static_cast<int>(std::llround(draw));
    age = std::clamp(age, spec.age_min, spec.age_max);
    set.personas[i].factors[FactorId::age] = age;
  }
  return set;
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  return fields;
}

}  // namespace

NameTable NameTable::from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open name table: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_csv(ss.str());
}

NameTable NameTable::from_csv(const std::string& content) {
  NameTable table;
  std::stringstream ss(content);
  std::string line;
  bool header = true;
  // An age-signal first name must map to exactly one decade.
  std::map<std::string, std::string> age_decades;
  while (std::getline(ss, line)) {
    if (trim(line).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    auto fields = split_csv_line(line);
    if (fields.size() != 4) {
      throw std::runtime_error("name table row needs 4 fields: " + line);
    }
    NameRow row;
    row.name = fields[0];
    if (fields[1] == "first") {
      row.slot = NameSlot::first;
    } else if (fields[1] == "surname") {
      row.slot = NameSlot::surname;
    } else {
      throw std::runtime_error("unknown name slot: " + fields[1]);
    }
    row.signal = factor_from_name(fields[2]);
    if (row.signal != FactorId::age && row.signal != FactorId::gender &&
        row.signal != FactorId::race) {
      throw std::runtime_error("name signals exist only for age, gender, race");
    }
    row.label = fields[3];
    if (row.signal == FactorId::age) {
      if (row.label.size() != 4 ||
          !std::all_of(row.label.begin(), row.label.end(),
                       [](char c) { return c >= '0' && c <= '9'; })) {
        throw std::runtime_error("age name label must be a 4-digit decade: " +
                                 row.label);
      }
      auto [it, inserted] = age_decades.emplace(row.name, row.label);
      if (!inserted && it->second != row.label) {
        throw std::runtime_error("age name maps to multiple decades: " +
                                 row.name);
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {

std::string persona_name_label(const Persona& p, FactorId factor,
                               int reference_year) {
  if (factor == FactorId::age) {
    const int birth_year = reference_year - p.value(FactorId::age);
    const int decade = (birth_year / 10) * 10;
    return std::to_string(decade);
  }
  const auto& info = factor_info(factor);
  return p.value(factor) == 1 ? info.positive_label : info.negative_label;
}

std::string pick_name(const NameTable& table, NameSlot slot, FactorId factor,
                      const std::string& label, std::uint64_t seed,
                      int persona_id, const char* tag) {
  std::vector<const NameRow*> matches;
  for (const auto& row : table.rows) {
    if (row.slot == slot && row.signal == factor && row.label == label) {
      matches.push_back(&row);
    }
  }
  if (matches.empty()) {
    throw std::runtime_error("no name rows for " + factor_name(factor) +
                             " label '" + label + "'");
  }
  Rng rng(hash64_combine(hash64_combine(seed, std::uint64_t(persona_id)), tag));
  return matches[rng.below(matches.size())]->name;
}

}  // namespace

void assign_names(PersonaSet& personas, const NameTable& table, FactorId factor,
                  int reference_year, std::uint64_t seed) {
  if (factor != FactorId::age && factor != FactorId::gender &&
      factor != FactorId::race) {
    throw std::invalid_argument("names signal only age, gender, race");
  }
  for (auto& p : personas.personas) {
    const std::string label = persona_name_label(p, factor, reference_year);
    PersonaName name;
    name.first =
        pick_name(table, NameSlot::first, factor, label, seed, p.id, "first");
    if (factor == FactorId::race) {
      name.surname = pick_name(table, NameSlot::surname, factor, label, seed,
                               p.id, "surname");
    }
    p.name = std::move(name);
  }
}

std::string mode_name(PromptMode mode) {
  return mode == PromptMode::explicit_persona ? "explicit" : "implicit";
}

PromptMode mode_from_name(const std::string& name) {
  if (name == "explicit") return PromptMode::explicit_persona;
  if (name == "implicit") return PromptMode::implicit_persona;
  throw std::invalid_argument("unknown persona mode: " + name);
}

std::string explicit_clause(const Persona& p, FactorId f) {
  const int v = p.value(f);
  switch (f) {
    case FactorId::age:
      return std::to_string(v) + " years old";
    case FactorId::gender:
      return v == 1 ? "female" : "male";
    case FactorId::race:
      return v == 1 ? "Black / African American" : "White";
    case FactorId::political_ideology:
      return v == 1 ? "politically conservative" : "politically liberal";
    case FactorId::substance_use:
      return v == 1 ? "a person who uses illegal drugs"
                    : "a person who does not use illegal drugs";
  }
  throw std::invalid_argument("unknown factor id");
}

std::string render_prompt(const Persona& p, PromptMode mode,
                          const std::vector<FactorId>& factors,
                          const std::string& preamble) {
  std::string sentence;
  if (mode == PromptMode::explicit_persona) {
    if (!factors.empty()) {
      sentence = "You are ";
      for (std::size_t i = 0; i < factors.size(); ++i) {
        if (i > 0) sentence += i + 1 == factors.size() ? " and " : ", ";
        sentence += explicit_clause(p, factors[i]);
      }
      sentence += ", please answer as such.";
    }
  } else {
    if (!p.name) {
      throw std::invalid_argument("implicit mode requires an assigned name");
    }
    for (FactorId f : factors) {
      if (f != FactorId::age && f != FactorId::gender && f != FactorId::race) {
        throw std::invalid_argument("implicit mode unsupported for " +
                                    factor_name(f));
      }
    }
    sentence = "Your name is " + p.name->full() + ".";
  }
  if (sentence.empty()) return preamble;
  if (preamble.empty()) return sentence;
  return sentence + "\n\n" + preamble;
}

std::string personas_to_jsonl(const PersonaSet& set) {
  std::string out;
  for (const auto& p : set.personas) {
    json j;
    j["id"] = p.id;
    json factors = json::object();
    for (const auto& [f, v] : p.factors) factors[factor_name(f)] = v;
    j["factors"] = std::move(factors);
    if (p.name) {
      j["name"] = {{"first", p.name->first}, {"surname", p.name->surname}};
    } else {
      j["name"] = nullptr;
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

PersonaSet personas_from_jsonl(const std::string& content) {
  PersonaSet set;
  std::stringstream ss(content);
  std::string line;
  while (std::getline(ss, line)) {
    if (trim(line).empty()) continue;
    json j = json::parse(line);
    Persona p;
    p.id = j.at("id").get<int>();
    for (const auto& [k, v] : j.at("factors").items()) {
      p.factors[factor_from_name(k)] = v.get<int>();
    }
    if (j.contains("name") && !j["name"].is_null()) {
      PersonaName name;
      name.first = j["name"].at("first").get<std::string>();
      name.surname = j["name"].value("surname", "");
      p.name = std::move(name);
    }
    set.personas.push_back(std::move(p));
  }
  return set;
}

}  // namespace paudit
