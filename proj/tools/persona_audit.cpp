// Batch persona-audit driver: samples persona populations, probes a
// configured backend with annotation and belief-generation tasks, runs the
// differential-language analyses, and writes CSV/JSON/SVG artifacts under
// results/<study>/<run-id>/.
#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "paudit/analysis.hpp"
#include "paudit/bundled_data.hpp"
#include "paudit/config.hpp"
#include "paudit/persona.hpp"
#include "paudit/probe.hpp"
#include "paudit/report.hpp"
#include "paudit/rng.hpp"
#include "paudit/synthetic.hpp"

using namespace paudit;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Session {
  RunConfig cfg;
  PersonaSet personas;
  NameTable names;
  ResponseCache cache;
  ResponseCache judge_cache;

  explicit Session(const RunConfig& config)
      : cfg(config),
        personas(sample_population(config.population)),
        names(config.name_table_path.empty()
                  ? NameTable::from_csv(bundled_name_table_csv())
                  : NameTable::from_csv_file(config.name_table_path)),
        cache(cache_path(config, "responses")),
        judge_cache(cache_path(config, "judge")) {}

  static std::string cache_path(const RunConfig& cfg, const char* kind) {
    std::filesystem::create_directories(cfg.cache_dir);
    return cfg.cache_dir + "/" + std::string(kind) + "-" +
           hash16(cfg.backend.fingerprint() + "|" + cfg.fingerprint()) +
           ".jsonl";
  }

  static std::string hash16(const std::string& s) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(hash64(s)));
    return buf;
  }

  Prober prober() { return Prober(cfg.backend, &cache); }
  Prober judge_prober() { return Prober(cfg.judge, &judge_cache); }

  // Personas with names matched to one factor's signal (implicit mode).
  PersonaSet named_for(FactorId factor) const {
    PersonaSet named = personas;
    assign_names(named, names, factor, cfg.reference_year,
                 hash64_combine(cfg.seed, factor_name(factor)));
    return named;
  }

  std::vector<Vignette> vignettes() const {
    if (cfg.vignettes_path.empty()) return bundled_vignettes();
    return vignettes_from_json(read_text_file(cfg.vignettes_path));
  }

  BeliefQuestion belief(Domain d) const {
    if (cfg.beliefs_path.empty()) return bundled_belief_question(d);
    for (const auto& q :
         belief_questions_from_json(read_text_file(cfg.beliefs_path))) {
      if (q.domain == d) return q;
    }
    throw std::runtime_error("no belief question for domain " +
                             domain_name(d));
  }

  ValidationQuestion validation(Domain d) const {
    if (cfg.validation_path.empty()) return bundled_validation_question(d);
    for (const auto& q :
         validation_questions_from_json(read_text_file(cfg.validation_path))) {
      if (q.domain == d) return q;
    }
    throw std::runtime_error("no validation question for domain " +
                             domain_name(d));
  }
};

std::vector<FactorId> implicit_capable(const std::vector<FactorId>& factors) {
  std::vector<FactorId> out;
  for (FactorId f : factors) {
    if (f == FactorId::age || f == FactorId::gender || f == FactorId::race) {
      out.push_back(f);
    }
  }
  return out;
}

struct StudyOutput {
  std::string dir;
  std::vector<std::string> files;
  // Replication keys "table|row|col" for cells this study produced.
  std::map<std::string, std::optional<double>> live_values;
};

void save(StudyOutput& out, const std::string& name,
          const std::string& content) {
  write_text_file(out.dir + "/" + name, content);
  out.files.push_back(name);
}

Corpus generation_corpus(Session& s, Domain domain, PromptMode mode,
                         const std::vector<FactorId>& prompt_factors) {
  const PersonaSet* personas = &s.personas;
  PersonaSet named;
  if (mode == PromptMode::implicit_persona) {
    if (prompt_factors.size() != 1) {
      throw std::runtime_error("implicit generation takes a single factor");
    }
    named = s.named_for(prompt_factors[0]);
    personas = &named;
  }
  auto prober = s.prober();
  return prober.run_generation(*personas, s.belief(domain), mode,
                               prompt_factors);
}

// --- studies ------------------------------------------------------------

StudyOutput study_annotation(Session& s, StudyOutput out) {
  const auto vignettes = s.vignettes();
  std::map<PromptMode, std::map<Construct, std::map<FactorId, AnnotationTable>>>
      tables;
  for (PromptMode mode : s.cfg.modes) {
    const auto factors = mode == PromptMode::implicit_persona
                             ? implicit_capable(s.cfg.factors)
                             : s.cfg.factors;
    for (const auto& vignette : vignettes) {
      for (FactorId factor : factors) {
        const PersonaSet* personas = &s.personas;
        PersonaSet named;
        if (mode == PromptMode::implicit_persona) {
          named = s.named_for(factor);
          personas = &named;
        }
        auto prober = s.prober();
        auto table = prober.run_annotation(*personas, vignette, mode, {factor});
        save(out,
             "labels-" + mode_name(mode) + "-" + vignette.id + "-" +
                 factor_name(factor) + ".jsonl",
             table.to_jsonl());
        tables[mode][vignette.construct][factor] = std::move(table);
      }
    }
  }

  for (const auto& [mode, by_construct] : tables) {
    const auto grid_data =
        annotation_effects(by_construct, s.personas, s.cfg.alpha);
    ResultGrid grid;
    grid.name = "annotation-" + mode_name(mode);
    std::set<std::string> row_set;
    std::set<std::string> col_set;
    for (const auto& cell : grid_data.cells) {
      row_set.insert(factor_name(cell.factor));
      col_set.insert(construct_name(cell.construct));
    }
    grid.row_labels.assign(row_set.begin(), row_set.end());
    grid.col_labels.assign(col_set.begin(), col_set.end());
    grid.cells.assign(grid.row_labels.size(),
                      std::vector<GridCell>(grid.col_labels.size()));
    for (const auto& cell : grid_data.cells) {
      const auto r = std::distance(
          grid.row_labels.begin(),
          std::find(grid.row_labels.begin(), grid.row_labels.end(),
                    factor_name(cell.factor)));
      const auto c = std::distance(
          grid.col_labels.begin(),
          std::find(grid.col_labels.begin(), grid.col_labels.end(),
                    construct_name(cell.construct)));
      grid.cells[r][c] = cell.result.significant
                             ? GridCell::of(cell.result.effect)
                             : GridCell::not_significant();
      out.live_values["annotation|" + factor_name(cell.factor) + "|" +
                      mode_name(mode) + "/" +
                      construct_name(cell.construct)] =
          cell.result.significant ? std::optional<double>(cell.result.effect)
                                  : std::nullopt;
    }
    save(out, "effects-" + mode_name(mode) + ".csv",
         format_grid(grid, TableFormat::csv));
    save(out, "effects-" + mode_name(mode) + ".json",
         format_grid(grid, TableFormat::json));
  }
  return out;
}

StudyOutput study_bgt1(Session& s, StudyOutput out) {
  for (Domain domain : s.cfg.domains) {
    const FactorId factor = domain_factor(domain);
    const auto corpus =
        generation_corpus(s, domain, PromptMode::explicit_persona, {factor});
    save(out, "corpus-" + domain_name(domain) + ".jsonl", corpus.to_jsonl());

    const auto result =
        bgt1(corpus, s.personas, s.cfg.alpha, s.cfg.features);
    save(out, "effects-" + domain_name(domain) + ".csv",
         result.full.to_csv());
    save(out, "significant-" + domain_name(domain) + ".csv",
         result.significant.to_csv());

    const auto cloud =
        wordcloud_data(result.full, s.cfg.wordcloud_max_terms);
    if (!cloud.empty()) {
      CloudLayoutParams layout;
      layout.seed = s.cfg.seed;
      save(out, "cloud-" + domain_name(domain) + ".svg",
           render_svg(cloud, layout));
    }

    auto judge = s.judge_prober();
    const auto scores = judge.run_validation(corpus, s.validation(domain));
    try {
      const auto meta = bgt1_validation(corpus, scores, s.personas);
      save(out, "validation-" + domain_name(domain) + ".csv",
           "domain,r,p,n\n" + domain_name(domain) + "," +
               std::to_string(meta.r) + "," + std::to_string(meta.p) + "," +
               std::to_string(meta.n) + "\n");
    } catch (const std::runtime_error& e) {
      std::fprintf(stderr, "validation skipped for %s: %s\n",
                   domain_name(domain).c_str(), e.what());
    }
  }
  return out;
}

StudyOutput study_bgt2(Session& s, StudyOutput out) {
  for (Domain domain : s.cfg.domains) {
    std::map<FactorId, Corpus> corpora;
    for (FactorId factor : s.cfg.factors) {
      corpora[factor] =
          generation_corpus(s, domain, PromptMode::explicit_persona, {factor});
    }
    const auto cells = bgt2(corpora, s.personas, s.cfg.alpha, s.cfg.features,
                            s.cfg.alignment);
    ResultGrid grid;
    grid.name = "bgt2-" + domain_name(domain);
    for (FactorId f : s.cfg.factors) grid.row_labels.push_back(factor_name(f));
    grid.col_labels = grid.row_labels;
    grid.cells.assign(grid.row_labels.size(),
                      std::vector<GridCell>(grid.col_labels.size()));
    for (const auto& cell : cells) {
      const auto find = [&](FactorId f) {
        return std::distance(grid.row_labels.begin(),
                             std::find(grid.row_labels.begin(),
                                       grid.row_labels.end(), factor_name(f)));
      };
      const auto value = cell.significant ? GridCell::of(cell.meta.r)
                                          : GridCell::not_significant();
      grid.cells[find(cell.row_factor)][find(cell.col_factor)] = value;
      out.live_values["bgt2|" + domain_name(domain) + "|" +
                      factor_name(cell.row_factor) + "/" +
                      factor_name(cell.col_factor)] =
          cell.significant ? std::optional<double>(cell.meta.r) : std::nullopt;
    }
    save(out, "meta-" + domain_name(domain) + ".csv",
         format_grid(grid, TableFormat::csv));
  }
  return out;
}

StudyOutput study_bgt3(Session& s, StudyOutput out) {
  const auto factors = implicit_capable(s.cfg.factors);
  ResultGrid grid;
  grid.name = "bgt3";
  for (FactorId f : factors) grid.col_labels.push_back(factor_name(f));
  std::map<FactorId, std::vector<double>> significant_rs;
  for (Domain domain : s.cfg.domains) {
    grid.row_labels.push_back(domain_name(domain));
    std::vector<GridCell> row;
    for (FactorId factor : factors) {
      const auto explicit_corpus =
          generation_corpus(s, domain, PromptMode::explicit_persona, {factor});
      const auto implicit_corpus =
          generation_corpus(s, domain, PromptMode::implicit_persona, {factor});
      const auto meta =
          bgt3(explicit_corpus, implicit_corpus, s.personas, factor,
               s.cfg.alpha, s.cfg.features, s.cfg.alignment);
      const bool significant = meta.p <= s.cfg.alpha;
      row.push_back(significant ? GridCell::of(meta.r)
                                : GridCell::not_significant());
      out.live_values["bgt3|" + domain_name(domain) + "|" +
                      factor_name(factor)] =
          significant ? std::optional<double>(meta.r) : std::nullopt;
      if (significant) significant_rs[factor].push_back(meta.r);
    }
    grid.cells.push_back(std::move(row));
  }
  grid.row_labels.push_back("average");
  std::vector<GridCell> averages;
  for (FactorId factor : factors) {
    const auto& rs = significant_rs[factor];
    if (rs.empty()) {
      averages.push_back(GridCell::not_significant());
      out.live_values["bgt3|average|" + factor_name(factor)] = std::nullopt;
    } else {
      double sum = 0.0;
      for (double r : rs) sum += r;
      averages.push_back(GridCell::of(sum / rs.size()));
      out.live_values["bgt3|average|" + factor_name(factor)] =
          sum / rs.size();
    }
  }
  grid.cells.push_back(std::move(averages));
  save(out, "agreement.csv", format_grid(grid, TableFormat::csv));
  save(out, "agreement.json", format_grid(grid, TableFormat::json));
  return out;
}

StudyOutput study_importance(Session& s, StudyOutput out) {
  const std::vector<FactorId> all = {FactorId::age, FactorId::gender,
                                     FactorId::race,
                                     FactorId::political_ideology,
                                     FactorId::substance_use};
  ResultGrid grid;
  grid.name = "importance";
  for (FactorId f : s.cfg.factors) grid.col_labels.push_back(factor_name(f));
  std::map<FactorId, std::vector<double>> rs;
  for (Domain domain : s.cfg.domains) {
    grid.row_labels.push_back(domain_name(domain));
    const auto full =
        generation_corpus(s, domain, PromptMode::explicit_persona, all);
    std::vector<GridCell> row;
    for (FactorId factor : s.cfg.factors) {
      const auto single =
          generation_corpus(s, domain, PromptMode::explicit_persona, {factor});
      const auto meta = importance(full, single, s.personas, factor,
                                   s.cfg.alpha, s.cfg.features,
                                   s.cfg.alignment);
      row.push_back(GridCell::of(meta.r));
      rs[factor].push_back(meta.r);
      out.live_values["importance|" + domain_name(domain) + "|" +
                      factor_name(factor)] = meta.r;
    }
    grid.cells.push_back(std::move(row));
  }
  grid.row_labels.push_back("average");
  std::vector<GridCell> averages;
  for (FactorId factor : s.cfg.factors) {
    double sum = 0.0;
    for (double r : rs[factor]) sum += r;
    const double avg = rs[factor].empty() ? 0.0 : sum / rs[factor].size();
    averages.push_back(GridCell::of(avg));
    out.live_values["importance|average|" + factor_name(factor)] = avg;
  }
  grid.cells.push_back(std::move(averages));
  save(out, "importance.csv", format_grid(grid, TableFormat::csv));
  return out;
}

StudyOutput study_reliability(Session& s, StudyOutput out) {
  const auto vignettes = s.vignettes();
  if (vignettes.empty()) throw std::runtime_error("no vignettes configured");
  const auto& vignette = vignettes.front();
  const auto factors = implicit_capable(s.cfg.factors);
  if (factors.empty()) {
    throw std::runtime_error(
        "reliability needs at least one name-signal factor (age, gender, "
        "race)");
  }
  const FactorId factor = factors.front();

  auto prober = s.prober();
  const auto explicit_table = prober.run_annotation(
      s.personas, vignette, PromptMode::explicit_persona, {factor});
  const auto named = s.named_for(factor);
  auto prober2 = s.prober();
  const auto implicit_table = prober2.run_annotation(
      named, vignette, PromptMode::implicit_persona, {factor});

  const auto rows = reliability(explicit_table, implicit_table, s.personas);
  ResultGrid grid;
  grid.name = "reliability";
  grid.col_labels = {"explicit_vs_implicit"};
  for (const auto& row : rows) {
    grid.row_labels.push_back(row.persona_type);
    grid.cells.push_back({row.kappa.defined_pairs > 0
                              ? GridCell::of(row.kappa.mean)
                              : GridCell::not_significant()});
    out.live_values["reliability|" + row.persona_type +
                    "|explicit_vs_implicit"] =
        row.kappa.defined_pairs > 0 ? std::optional<double>(row.kappa.mean)
                                    : std::nullopt;
  }
  save(out, "kappa.csv", format_grid(grid, TableFormat::csv));
  return out;
}

StudyOutput run_study(Session& s, const std::string& study,
                      const std::string& out_root) {
  const std::string run_id = "run-" + s.cfg.fingerprint();
  StudyOutput out;
  out.dir = study_dir(out_root, study, run_id);

  if (study == "annotation") {
    out = study_annotation(s, std::move(out));
  } else if (study == "bgt1") {
    out = study_bgt1(s, std::move(out));
  } else if (study == "bgt2") {
    out = study_bgt2(s, std::move(out));
  } else if (study == "bgt3") {
    out = study_bgt3(s, std::move(out));
  } else if (study == "importance") {
    out = study_importance(s, std::move(out));
  } else if (study == "reliability") {
    out = study_reliability(s, std::move(out));
  } else {
    throw CLI::ValidationError("--study",
                               "unknown study '" + study +
                                   "' (expected annotation, bgt1, bgt2, "
                                   "bgt3, importance, or reliability)");
  }

  RunManifest manifest;
  manifest.study = study;
  manifest.run_id = run_id;
  manifest.config_fingerprint = s.cfg.fingerprint();
  manifest.seed = s.cfg.seed;
  manifest.alpha = s.cfg.alpha;
  manifest.files = out.files;
  write_manifest(out.dir, manifest);
  return out;
}

RunConfig load_config(const std::string& path,
                      const std::optional<std::uint64_t>& seed,
                      const std::optional<double>& alpha,
                      const std::vector<std::string>& domains,
                      const std::vector<std::string>& factors,
                      const std::vector<std::string>& modes) {
  auto cfg = RunConfig::from_json_file(path);
  if (seed) {
    cfg.seed = *seed;
    cfg.population.seed = *seed;
  }
  if (alpha) cfg.alpha = *alpha;
  if (!domains.empty()) {
    cfg.domains.clear();
    for (const auto& d : domains) cfg.domains.push_back(domain_from_name(d));
  }
  if (!factors.empty()) {
    cfg.factors.clear();
    for (const auto& f : factors) cfg.factors.push_back(factor_from_name(f));
  }
  if (!modes.empty()) {
    cfg.modes.clear();
    for (const auto& m : modes) cfg.modes.push_back(mode_from_name(m));
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Persona-population audit harness: demographic persona sampling, "
      "backend probing, and differential-language analysis"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::vector<std::string> domains, factors, modes;
  std::string out_override;

  auto add_common = [&](CLI::App* cmd, bool needs_out) {
    cmd->add_option("--config", config_path, "run configuration JSON")
        ->required();
    cmd->add_option("--seed", seed, "override the configured seed");
    cmd->add_option("--alpha", alpha, "override the significance level");
    cmd->add_option("--domain", domains, "restrict to these belief domains");
    cmd->add_option("--factor", factors, "restrict to these factors");
    cmd->add_option("--mode", modes, "restrict to explicit/implicit");
    if (needs_out) {
      cmd->add_option("--out", out_override, "output root directory");
    }
  };

  auto* sample = app.add_subcommand(
      "sample", "sample the persona population and print or save it");
  add_common(sample, true);

  auto* run = app.add_subcommand(
      "run", "run one study end to end and write its artifacts");
  std::string study;
  add_common(run, true);
  run->add_option("--study", study,
                  "annotation, bgt1, bgt2, bgt3, importance, or reliability")
      ->required();

  auto* analyze = app.add_subcommand(
      "analyze", "run every study listed in the configuration");
  add_common(analyze, true);

  auto* report_cmd = app.add_subcommand(
      "report", "reformat a saved grid JSON as csv or markdown");
  std::string grid_path, format_name = "markdown";
  report_cmd->add_option("--grid", grid_path, "grid JSON file")->required();
  report_cmd->add_option("--format", format_name, "csv, json, or markdown");

  auto* replicate = app.add_subcommand(
      "replicate",
      "run the configured studies and diff results against the bundled "
      "published reference values");
  add_common(replicate, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (report_cmd->parsed()) {
      const auto parsed = nlohmann::json::parse(read_text_file(grid_path));
      ResultGrid grid;
      grid.name = parsed.at("name").get<std::string>();
      grid.col_labels = parsed.at("columns").get<std::vector<std::string>>();
      for (const auto& [row, cells] : parsed.at("rows").items()) {
        grid.row_labels.push_back(row);
        std::vector<GridCell> grid_row;
        for (const auto& col : grid.col_labels) {
          const auto& cell = cells.at(col);
          if (cell.is_number()) {
            grid_row.push_back(GridCell::of(cell.get<double>()));
          } else if (cell.is_string()) {
            grid_row.push_back(GridCell::not_significant());
          } else {
            grid_row.push_back(GridCell{});
          }
        }
        grid.cells.push_back(std::move(grid_row));
      }
      std::fputs(
          format_grid(grid, table_format_from_name(format_name)).c_str(),
          stdout);
      return 0;
    }

    auto cfg = load_config(config_path, seed, alpha, domains, factors, modes);
    if (!out_override.empty()) cfg.results_dir = out_override;
    Session session(cfg);

    if (sample->parsed()) {
      const auto dir =
          study_dir(cfg.results_dir, "population", "run-" + cfg.fingerprint());
      write_text_file(dir + "/personas.jsonl",
                      personas_to_jsonl(session.personas));
      std::printf("%zu personas -> %s/personas.jsonl\n",
                  session.personas.size(), dir.c_str());
      return 0;
    }

    std::vector<std::string> studies;
    if (run->parsed()) {
      studies = {study};
    } else {
      studies = cfg.studies;
      if (studies.empty()) {
        std::fprintf(stderr, "configuration lists no studies\n");
        return kExitUsage;
      }
    }

    std::map<std::string, std::optional<double>> live;
    for (const auto& name : studies) {
      const auto out = run_study(session, name, cfg.results_dir);
      std::printf("%s: %zu files -> %s\n", name.c_str(), out.files.size(),
                  out.dir.c_str());
      live.insert(out.live_values.begin(), out.live_values.end());
    }

    if (replicate->parsed()) {
      const auto rows = replication_diff(live);
      const auto dir = study_dir(cfg.results_dir, "replication",
                                 "run-" + cfg.fingerprint());
      write_text_file(dir + "/diff.csv", replication_diff_csv(rows));
      std::size_t compared = 0;
      for (const auto& r : rows) {
        if (r.reference && r.live) ++compared;
      }
      std::printf("replication: %zu/%zu reference cells compared -> "
                  "%s/diff.csv\n",
                  compared, rows.size(), dir.c_str());
    }
    return 0;
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error at %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
}
