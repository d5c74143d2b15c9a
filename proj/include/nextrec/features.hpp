#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nextrec/ingest.hpp"
#include "nextrec/numerics.hpp"
#include "nextrec/transitions.hpp"

namespace nextrec {

struct TokenizerConfig {
  std::size_t min_token_len = 2;
  std::size_t max_vocab = 5000;
  bool remove_stopwords = true;
};

// Lowercases, splits on every non-alphanumeric byte, drops short tokens and
// (optionally) English stopwords.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config = {});

bool is_stopword(std::string_view token);

struct Vectorizer {
  std::vector<std::string> terms;  // column order
  std::unordered_map<std::string, std::size_t> column;
  std::vector<std::size_t> document_frequency;
  std::vector<double> idf;
  std::size_t n_documents = 0;
  TokenizerConfig config;

  std::size_t dim() const { return terms.size(); }
};

enum class FeatureKind { tfidf, external };

std::string_view to_string(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view text);

// Row r holds the content vector of article rows.id(r). Rows follow catalog
// order.
struct FeatureMatrix {
  FeatureKind kind = FeatureKind::tfidf;
  SparseMatrix values;
  IndexMap rows;

  std::size_t dim() const { return static_cast<std::size_t>(values.cols()); }
  std::size_t size() const { return rows.size(); }

  // Rows for the given ids, in the given order. Throws InputError naming the
  // first missing id.
  SparseMatrix gather(const std::vector<std::string>& ids) const;
};

// Document = title + " " + abstract. idf = ln((1 + N) / (1 + df)) + 1.
// Vocabulary = the max_vocab terms of highest df, ties lexicographic; columns
// are assigned in that ranking order. Throws EmptyInputError on an empty
// catalog.
Vectorizer fit_tfidf(const ArticleCatalog& catalog, const TokenizerConfig& config = {});

// Raw counts times idf, L2-normalized per row; unknown terms ignored.
FeatureMatrix transform(const Vectorizer& vectorizer, const ArticleCatalog& catalog);

// "#dim <m>" header, then "news_id<TAB>v1 v2 ... vm" per line. Rows for ids
// outside the catalog are ignored.
FeatureMatrix load_external_embeddings(const std::filesystem::path& path,
                                       const ArticleCatalog& catalog);

// Sparse text persistence: "#kind <k>", "#dim <m>", then
// "news_id<TAB>col:value col:value ..." with round-trip precision.
void write_features(const FeatureMatrix& features, const std::filesystem::path& path);
FeatureMatrix read_features(const std::filesystem::path& path);

// term<TAB>df<TAB>idf, in column order.
void write_vocabulary(const Vectorizer& vectorizer, const std::filesystem::path& path);

}  // namespace nextrec
