#include "paudit/features.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace paudit {

namespace {

bool is_word_byte(unsigned char c) {
  return std::isalnum(c) || c >= 0x80;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  const std::size_t n = text.size();
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      flush();
    } else if (is_word_byte(c)) {
      current += static_cast<char>(std::tolower(c));
    } else if (c == '\'' && !current.empty() && i + 1 < n &&
               is_word_byte(static_cast<unsigned char>(text[i + 1]))) {
      current += '\'';  // word-internal apostrophe
    } else {
      flush();
      tokens.emplace_back(1, static_cast<char>(c));
    }
  }
  flush();
  return tokens;
}

int FeatureMatrix::feature_index(const std::string& feature) const {
  auto it = std::lower_bound(features.begin(), features.end(), feature);
  if (it == features.end() || *it != feature) return -1;
  return static_cast<int>(it - features.begin());
}

std::vector<double> FeatureMatrix::column(int feature) const {
  std::vector<double> out(rows.size(), 0.0);
  for (std::size_t d = 0; d < rows.size(); ++d) {
    for (const auto& [f, v] : rows[d]) {
      if (f == feature) {
        out[d] = v;
        break;
      }
    }
  }
  return out;
}

std::string FeatureMatrix::to_csv() const {
  std::ostringstream os;
  os.precision(12);
  os << "doc_id,feature,relative_frequency\n";
  for (std::size_t d = 0; d < rows.size(); ++d) {
    for (const auto& [f, v] : rows[d]) {
      std::string feature = features[f];
      if (feature.find(',') != std::string::npos ||
          feature.find('"') != std::string::npos) {
        std::string quoted = "\"";
        for (char c : feature) {
          if (c == '"') quoted += '"';
          quoted += c;
        }
        quoted += '"';
        feature = quoted;
      }
      os << doc_ids[d] << ',' << feature << ',' << v << '\n';
    }
  }
  return os.str();
}

FeatureMatrix extract_ngrams(const std::vector<Document>& docs,
                             const std::vector<int>& orders,
                             int min_doc_count) {
  if (docs.empty()) throw std::invalid_argument("extract_ngrams: empty corpus");
  for (int order : orders) {
    if (order < 1 || order > 3) {
      throw std::invalid_argument("extract_ngrams: order must be 1-3");
    }
  }

  std::vector<std::map<std::string, double>> doc_freqs(docs.size());
  std::map<std::string, int> global_doc_count;
  std::map<std::string, long> global_corpus_count;
  bool any_tokens = false;

  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto tokens = tokenize(docs[d].text);
    if (!tokens.empty()) any_tokens = true;
    for (int order : orders) {
      const long total = static_cast<long>(tokens.size()) - order + 1;
      if (total <= 0) continue;
      std::map<std::string, long> counts;
      for (long i = 0; i < total; ++i) {
        std::string gram = tokens[i];
        for (int k = 1; k < order; ++k) {
          gram += ' ';
          gram += tokens[i + k];
        }
        ++counts[gram];
      }
      for (const auto& [gram, count] : counts) {
        doc_freqs[d][gram] = double(count) / double(total);
        ++global_doc_count[gram];
        global_corpus_count[gram] += count;
      }
    }
  }
  if (!any_tokens) {
    throw std::invalid_argument("extract_ngrams: all documents empty");
  }

  FeatureMatrix m;
  std::map<std::string, int> index;
  for (const auto& [gram, dc] : global_doc_count) {
    if (dc >= min_doc_count) {
      index.emplace(gram, static_cast<int>(m.features.size()));
      m.features.push_back(gram);
      m.doc_count.push_back(dc);
      m.corpus_count.push_back(global_corpus_count.at(gram));
    }
  }
  m.doc_ids.reserve(docs.size());
  m.rows.resize(docs.size());
  m.missing_doc.assign(docs.size(), false);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    m.doc_ids.push_back(docs[d].id);
    auto& row = m.rows[d];
    for (const auto& [gram, freq] : doc_freqs[d]) {
      auto it = index.find(gram);
      if (it != index.end()) row.emplace_back(it->second, freq);
    }
  }
  return m;
}

void Lexicon::validate() const {
  if (categories.empty()) {
    throw std::invalid_argument("lexicon has no categories");
  }
  for (const auto& [cat, terms] : categories) {
    if (terms.empty()) {
      throw std::invalid_argument("lexicon category is empty: " + cat);
    }
    for (const auto& term : terms) {
      if (term == "*" || term.empty()) {
        throw std::invalid_argument("lexicon wildcard needs a prefix in " +
                                    cat);
      }
      for (char c : term) {
        if (c >= 'A' && c <= 'Z') {
          throw std::invalid_argument("lexicon term not lowercase: " + term);
        }
      }
    }
  }
}

Lexicon Lexicon::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str(), path);
}

Lexicon Lexicon::from_string(const std::string& content,
                             const std::string& name) {
  Lexicon lex;
  lex.name = name;
  std::stringstream ss(content);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error("lexicon line missing tab: " + line);
    }
    lex.categories[line.substr(0, tab)].push_back(line.substr(tab + 1));
  }
  lex.validate();
  return lex;
}

namespace {

bool term_matches(const std::string& term, const std::string& token) {
  if (!term.empty() && term.back() == '*') {
    return token.compare(0, term.size() - 1, term, 0, term.size() - 1) == 0;
  }
  return token == term;
}

}  // namespace

FeatureMatrix score_lexicon(const std::vector<Document>& docs,
                            const Lexicon& lexicon) {
  lexicon.validate();
  FeatureMatrix m;
  for (const auto& [cat, terms] : lexicon.categories) {
    m.features.push_back(cat);
  }
  m.doc_count.assign(m.features.size(), 0);
  m.corpus_count.assign(m.features.size(), 0);
  m.rows.resize(docs.size());
  m.missing_doc.assign(docs.size(), false);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    m.doc_ids.push_back(docs[d].id);
    const auto tokens = tokenize(docs[d].text);
    if (tokens.empty()) {
      m.missing_doc[d] = true;
      continue;
    }
    int f = 0;
    for (const auto& [cat, terms] : lexicon.categories) {
      long count = 0;
      for (const auto& token : tokens) {
        for (const auto& term : terms) {
          if (term_matches(term, token)) {
            ++count;
            break;
          }
        }
      }
      if (count > 0) {
        m.rows[d].emplace_back(f, double(count) / double(tokens.size()));
        ++m.doc_count[f];
        m.corpus_count[f] += count;
      }
      ++f;
    }
  }
  return m;
}

}  // namespace paudit
