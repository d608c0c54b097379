#include "paudit/bundled_data.hpp"

namespace paudit {

const std::vector<Vignette>& bundled_vignettes() {
  static const std::vector<Vignette> vignettes = [] {
    std::vector<Vignette> v;
    Vignette toxicity;
    toxicity.id = "anti_black";
    toxicity.construct = Construct::offensive;
    toxicity.posts = {
        "I don't get government benefits just for being white",
        "Where is white history month? Why can't I have white pride day?",
        "I don't like black doctors, it's just my preference",
        "Anti-Black racism isn't that big of a deal because people treated "
        "Italians like this in the 60's and 70's",
        "Going to Africa. Hope I don't get AIDS. Just kidding. I'm white!",
    };
    toxicity.question_template =
        "Is the following social media post offensive? Answer strictly yes "
        "or no.\n\nPost: \"{post}\"";
    v.push_back(std::move(toxicity));

    Vignette stigma;
    stigma.id = "anti_substance_use";
    stigma.construct = Construct::stigmatizing;
    stigma.posts = {
        "I'm ok with executing heroin, meth and coke users.",
        "A zombie, this is what you would look like as a meth user.",
        "They need to deal with the drugs and murder as well. The streets "
        "are always filthy and unsafe!",
        "Legalized drugs also means that the age at which people will burn "
        "their brains out will drop.",
        "Drugs lying around within a child's reach with parents passed out "
        "from drugs, sounds like the kid will be better off.",
    };
    stigma.question_template =
        "Is the following social media post stigmatizing toward people who "
        "use substances? Answer strictly yes or no.\n\nPost: \"{post}\"";
    v.push_back(std::move(stigma));
    return v;
  }();
  return vignettes;
}

const std::vector<BeliefQuestion>& bundled_belief_questions() {
  static const std::vector<BeliefQuestion> questions = {
      {"palestine", Domain::palestine, FactorId::age,
       "Do your sympathies lie more with the Israeli people or more with the "
       "Palestinian people?"},
      {"parenting", Domain::parenting, FactorId::gender,
       "Do you feel a great deal of pressure to focus on your "
       "responsibilities at home?"},
      {"immigration", Domain::immigration, FactorId::political_ideology,
       "Why are a large number of migrants seeking to enter the U.S. at the "
       "border with Mexico?"},
      {"policing", Domain::policing, FactorId::race,
       "Do you see the police as protectors or enforcers?"},
      {"legalization", Domain::legalization, FactorId::substance_use,
       "How does legalization affect the criminal justice system?"},
  };
  return questions;
}

const std::vector<ValidationQuestion>& bundled_validation_questions() {
  static const std::vector<ValidationQuestion> questions = {
      {"palestine", Domain::palestine, FactorId::age,
       "Does the following text indicate that the writer's sympathies lie "
       "more with the Israeli people (1) or more with the Palestinian people "
       "(-1) or both (0)?"},
      {"parenting", Domain::parenting, FactorId::gender,
       "Does the following text indicate that the writer feels a great deal "
       "of pressure to focus on their responsibilities at home (1), work "
       "(-1), or both (0)?"},
      {"immigration", Domain::immigration, FactorId::political_ideology,
       "Does the following text indicate that the writer feels that there "
       "should be stricter (1) or looser (0) restrictions on immigration at "
       "the U.S. border with Mexico?"},
      {"policing", Domain::policing, FactorId::race,
       "Does the following text indicate that the writer sees the police as "
       "protectors (0), enforcers (-1), or both (0)?"},
      {"legalization", Domain::legalization, FactorId::substance_use,
       "Does the following text indicate that the writer supports "
       "legalization of drugs? Yes (1), No (-1), or neither (0)"},
  };
  return questions;
}

const BeliefQuestion& bundled_belief_question(Domain d) {
  for (const auto& q : bundled_belief_questions()) {
    if (q.domain == d) return q;
  }
  throw std::invalid_argument("no bundled belief question for domain");
}

const ValidationQuestion& bundled_validation_question(Domain d) {
  for (const auto& q : bundled_validation_questions()) {
    if (q.domain == d) return q;
  }
  throw std::invalid_argument("no bundled validation question for domain");
}

std::string bundled_name_table_csv() {
  // Illustrative only; real census/name-list files use the same format.
  return
      "name,slot,signal,label\n"
      "Mary,first,gender,female\n"
      "Patricia,first,gender,female\n"
      "Jennifer,first,gender,female\n"
      "James,first,gender,male\n"
      "Robert,first,gender,male\n"
      "Michael,first,gender,male\n"
      "Jermaine,first,race,Black\n"
      "Tyrone,first,race,Black\n"
      "Latoya,first,race,Black\n"
      "Connor,first,race,White\n"
      "Cody,first,race,White\n"
      "Heidi,first,race,White\n"
      "Washington,surname,race,Black\n"
      "Jefferson,surname,race,Black\n"
      "Banks,surname,race,Black\n"
      "Yoder,surname,race,White\n"
      "Mueller,surname,race,White\n"
      "Schwartz,surname,race,White\n"
      "Ethel,first,age,1940\n"
      "Harold,first,age,1940\n"
      "Linda,first,age,1950\n"
      "Gary,first,age,1950\n"
      "Lisa,first,age,1960\n"
      "Todd,first,age,1960\n"
      "Amy,first,age,1970\n"
      "Jason,first,age,1970\n"
      "Ashley,first,age,1980\n"
      "Justin,first,age,1980\n"
      "Taylor,first,age,1990\n"
      "Austin,first,age,1990\n"
      "Madison,first,age,2000\n"
      "Aiden,first,age,2000\n";
}

const std::vector<ReferenceValue>& reference_values() {
  static const std::vector<ReferenceValue> values = [] {
    std::vector<ReferenceValue> v;
    auto add = [&](const char* table, const char* row, const char* col,
                   std::optional<double> value) {
      v.push_back({table, row, col, value});
    };
    // Annotation task effect grid (explicit and implicit).
    add("annotation", "age", "explicit/offensive", -0.13);
    add("annotation", "age", "explicit/stigmatizing", -0.10);
    add("annotation", "gender", "explicit/offensive", 0.87);
    add("annotation", "gender", "explicit/stigmatizing", std::nullopt);
    add("annotation", "political_ideology", "explicit/offensive", -4.58);
    add("annotation", "political_ideology", "explicit/stigmatizing", -3.21);
    add("annotation", "race", "explicit/offensive", 2.15);
    add("annotation", "race", "explicit/stigmatizing", std::nullopt);
    add("annotation", "substance_use", "explicit/offensive", -0.30);
    add("annotation", "substance_use", "explicit/stigmatizing", 1.15);
    add("annotation", "age", "implicit/offensive", std::nullopt);
    add("annotation", "age", "implicit/stigmatizing", std::nullopt);
    add("annotation", "gender", "implicit/offensive", 0.28);
    add("annotation", "gender", "implicit/stigmatizing", std::nullopt);
    add("annotation", "race", "implicit/offensive", std::nullopt);
    add("annotation", "race", "implicit/stigmatizing", std::nullopt);

    // Convergent/divergent validity, one panel per domain. Cell key is
    // row-factor/col-factor of the lower triangle.
    struct Panel {
      const char* domain;
      std::optional<double> ga, pa, pg, ra, rg, rp, sa, sg, sp, sr;
    };
    const Panel panels[] = {
        {"palestine", std::nullopt, 0.08, -0.15, 0.13, 0.23, -0.18,
         std::nullopt, -0.11, 0.38, -0.04},
        {"parenting", std::nullopt, std::nullopt, -0.26, 0.08, -0.14, 0.12,
         std::nullopt, std::nullopt, std::nullopt, 0.13},
        {"immigration", 0.15, -0.11, -0.23, 0.18, 0.40, -0.19, -0.03, 0.38,
         -0.04, 0.50},
        {"policing", -0.09, 0.16, -0.33, std::nullopt, 0.23, -0.24, -0.10,
         0.38, -0.20, 0.20},
        {"legalization", 0.08, 0.12, -0.17, 0.06, 0.29, std::nullopt, -0.19,
         0.20, 0.16, 0.34},
    };
    for (const auto& p : panels) {
      add("bgt2", p.domain, "gender/age", p.ga);
      add("bgt2", p.domain, "political_ideology/age", p.pa);
      add("bgt2", p.domain, "political_ideology/gender", p.pg);
      add("bgt2", p.domain, "race/age", p.ra);
      add("bgt2", p.domain, "race/gender", p.rg);
      add("bgt2", p.domain, "race/political_ideology", p.rp);
      add("bgt2", p.domain, "substance_use/age", p.sa);
      add("bgt2", p.domain, "substance_use/gender", p.sg);
      add("bgt2", p.domain, "substance_use/political_ideology", p.sp);
      add("bgt2", p.domain, "substance_use/race", p.sr);
    }

    // Explicit vs implicit agreement per domain and its per-factor average.
    add("bgt3", "palestine", "age", std::nullopt);
    add("bgt3", "palestine", "gender", 0.09);
    add("bgt3", "palestine", "race", 0.28);
    add("bgt3", "parenting", "age", -0.03);
    add("bgt3", "parenting", "gender", 0.20);
    add("bgt3", "parenting", "race", 0.05);
    add("bgt3", "immigration", "age", 0.03);
    add("bgt3", "immigration", "gender", 0.11);
    add("bgt3", "immigration", "race", 0.10);
    add("bgt3", "policing", "age", std::nullopt);
    add("bgt3", "policing", "gender", 0.12);
    add("bgt3", "policing", "race", 0.12);
    add("bgt3", "legalization", "age", std::nullopt);
    add("bgt3", "legalization", "gender", 0.06);
    add("bgt3", "legalization", "race", 0.06);
    add("bgt3", "average", "age", -0.01);
    add("bgt3", "average", "gender", 0.12);
    add("bgt3", "average", "race", 0.12);

    // Full-persona vs single-factor agreement.
    const struct {
      const char* domain;
      double age, gender, ideology, race, substance;
    } importance_rows[] = {
        {"palestine", 0.19, 0.10, 0.79, 0.14, 0.38},
        {"parenting", 0.38, 0.34, 0.63, 0.27, 0.48},
        {"immigration", 0.18, 0.18, 0.62, 0.11, 0.40},
        {"policing", 0.21, 0.12, 0.76, 0.32, 0.50},
        {"legalization", 0.20, 0.16, 0.72, 0.37, 0.46},
        {"average", 0.23, 0.18, 0.70, 0.24, 0.44},
    };
    for (const auto& r : importance_rows) {
      add("importance", r.domain, "age", r.age);
      add("importance", r.domain, "gender", r.gender);
      add("importance", r.domain, "political_ideology", r.ideology);
      add("importance", r.domain, "race", r.race);
      add("importance", r.domain, "substance_use", r.substance);
    }

    // Average pairwise kappa per persona type and source pair.
    const struct {
      const char* row;
      std::optional<double> human_explicit, human_implicit, explicit_implicit;
    } reliability_rows[] = {
        {"All", 0.42, 0.43, 0.76},
        {"Black", 0.39, 0.45, 0.61},
        {"White", 0.43, 0.43, 0.78},
        {"Female", 0.43, 0.43, 0.76},
        {"Male", 0.43, 0.43, 0.75},
        {"Conservative", 0.40, 0.40, 0.77},
        {"Liberal", 0.45, 0.45, 0.77},
        {"Uses Substances", std::nullopt, std::nullopt, 0.78},
        {"No Substances", std::nullopt, std::nullopt, 0.76},
    };
    for (const auto& r : reliability_rows) {
      add("reliability", r.row, "human_vs_explicit", r.human_explicit);
      add("reliability", r.row, "human_vs_implicit", r.human_implicit);
      add("reliability", r.row, "explicit_vs_implicit", r.explicit_implicit);
    }
    return v;
  }();
  return values;
}

}  // namespace paudit
