#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace paudit {

// Lowercased tokens; word-internal apostrophes kept ("i've" is one token),
// every other punctuation mark is its own token, whitespace discarded.
std::vector<std::string> tokenize(std::string_view text);

struct Document {
  std::string id;
  std::string text;
};

struct FeatureMatrix {
  std::vector<std::string> doc_ids;
  std::vector<std::string> features;
  // Row-major sparse entries (feature index, relative frequency).
  std::vector<std::vector<std::pair<int, double>>> rows;
  std::vector<int> doc_count;       // documents containing each feature
  std::vector<long> corpus_count;   // total occurrences across the corpus
  // Documents with no score (e.g. zero tokens for lexicon scoring).
  std::vector<bool> missing_doc;

  int feature_index(const std::string& feature) const;
  // Dense column in document order; zeros where absent.
  std::vector<double> column(int feature) const;

  // Sparse CSV `doc_id,feature,relative_frequency`.
  std::string to_csv() const;
};

// Per-document n-gram counts of each requested order, encoded as count
// divided by the total number of same-order n-grams in that document.
// Features present in fewer than min_doc_count documents are dropped.
FeatureMatrix extract_ngrams(const std::vector<Document>& docs,
                             const std::vector<int>& orders = {1, 2, 3},
                             int min_doc_count = 5);

struct Lexicon {
  std::string name;
  // Lowercase terms; a trailing '*' marks a prefix wildcard.
  std::map<std::string, std::vector<std::string>> categories;

  // UTF-8 lines `category<TAB>term`.
  static Lexicon from_file(const std::string& path);
  static Lexicon from_string(const std::string& content,
                             const std::string& name = "lexicon");
  void validate() const;
};

// Per document per category: matching-token count / document token count.
// Zero-token documents are marked missing.
FeatureMatrix score_lexicon(const std::vector<Document>& docs,
                            const Lexicon& lexicon);

}  // namespace paudit
