#include "nextrec/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <unordered_set>

#include "nextrec/error.hpp"
#include "text_io.hpp"

namespace nextrec {

namespace {

const std::unordered_set<std::string_view>& stopwords() {
  static const std::unordered_set<std::string_view> words = {
      "a",       "about",  "above",   "after",  "again",  "against", "all",     "am",
      "an",      "and",    "any",     "are",    "as",     "at",      "be",      "because",
      "been",    "before", "being",   "below",  "between", "both",   "but",     "by",
      "can",     "could",  "did",     "do",     "does",   "doing",   "down",    "during",
      "each",    "few",    "for",     "from",   "further", "had",    "has",     "have",
      "having",  "he",     "her",     "here",   "hers",   "herself", "him",     "himself",
      "his",     "how",    "i",       "if",     "in",     "into",    "is",      "it",
      "its",     "itself", "just",    "me",     "more",   "most",    "my",      "myself",
      "no",      "nor",    "not",     "now",    "of",     "off",     "on",      "once",
      "only",    "or",     "other",   "our",    "ours",   "ourselves", "out",   "over",
      "own",     "same",   "she",     "should", "so",     "some",    "such",    "than",
      "that",    "the",    "their",   "theirs", "them",   "themselves", "then", "there",
      "these",   "they",   "this",    "those",  "through", "to",     "too",     "under",
      "until",   "up",     "very",    "was",    "we",     "were",    "what",    "when",
      "where",   "which",  "while",   "who",    "whom",   "why",     "will",    "with",
      "would",   "you",    "your",    "yours",  "yourself", "yourselves", "new", "says",
      "said",    "also",   "may",     "one",    "two",    "us",      "get",     "like",
  };
  return words;
}

// Bytes >= 0x80 belong to UTF-8 sequences and are kept inside tokens.
bool token_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

std::string document_text(const Article& article) {
  return article.title + " " + article.abstract_text;
}

}  // namespace

bool is_stopword(std::string_view token) { return stopwords().count(token) != 0; }

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.size() >= config.min_token_len &&
        !(config.remove_stopwords && is_stopword(current))) {
      tokens.push_back(current);
    }
    current.clear();
  };
  for (unsigned char c : text) {
    if (token_byte(c)) {
      current.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::string_view to_string(FeatureKind kind) {
  return kind == FeatureKind::tfidf ? "tfidf" : "external";
}

FeatureKind parse_feature_kind(std::string_view text) {
  if (text == "tfidf") return FeatureKind::tfidf;
  if (text == "external") return FeatureKind::external;
  throw ParameterError("unknown feature kind: " + std::string(text));
}

SparseMatrix FeatureMatrix::gather(const std::vector<std::string>& ids) const {
  SparseMatrix out(static_cast<Eigen::Index>(ids.size()), values.cols());
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const std::size_t source = rows.find(ids[r]);
    if (source == rows.size()) throw InputError("no feature row for article " + ids[r]);
    for (SparseMatrix::InnerIterator it(values, static_cast<Eigen::Index>(source)); it; ++it) {
      entries.emplace_back(static_cast<int>(r), static_cast<int>(it.col()), it.value());
    }
  }
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

Vectorizer fit_tfidf(const ArticleCatalog& catalog, const TokenizerConfig& config) {
  if (catalog.empty()) throw EmptyInputError("cannot fit TF-IDF on an empty catalog");
  std::map<std::string, std::size_t> df;
  for (const auto& article : catalog.articles()) {
    auto tokens = tokenize(document_text(article), config);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (auto& t : tokens) ++df[t];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(df.begin(), df.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > config.max_vocab) ranked.resize(config.max_vocab);

  Vectorizer v;
  v.config = config;
  v.n_documents = catalog.size();
  const double n = static_cast<double>(v.n_documents);
  for (auto& [term, count] : ranked) {
    v.column.emplace(term, v.terms.size());
    v.terms.push_back(term);
    v.document_frequency.push_back(count);
    v.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return v;
}

FeatureMatrix transform(const Vectorizer& vectorizer, const ArticleCatalog& catalog) {
  const auto n = static_cast<std::ptrdiff_t>(catalog.size());
  std::vector<std::vector<std::pair<int, double>>> rows(catalog.size());

#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    std::map<int, double> counts;
    for (const auto& token : tokenize(document_text(catalog[static_cast<std::size_t>(r)]),
                                      vectorizer.config)) {
      auto it = vectorizer.column.find(token);
      if (it != vectorizer.column.end()) counts[static_cast<int>(it->second)] += 1.0;
    }
    auto& row = rows[static_cast<std::size_t>(r)];
    double norm2 = 0.0;
    for (const auto& [col, tf] : counts) {
      const double w = tf * vectorizer.idf[static_cast<std::size_t>(col)];
      row.emplace_back(col, w);
      norm2 += w * w;
    }
    const double norm = std::sqrt(norm2);
    for (auto& entry : row) entry.second /= norm;
  }

  FeatureMatrix features;
  features.kind = FeatureKind::tfidf;
  features.values.resize(n, static_cast<Eigen::Index>(vectorizer.dim()));
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    features.rows.add(catalog[r].id);
    for (const auto& [col, value] : rows[r]) entries.emplace_back(static_cast<int>(r), col, value);
  }
  features.values.setFromTriplets(entries.begin(), entries.end());
  return features;
}

FeatureMatrix load_external_embeddings(const std::filesystem::path& path,
                                       const ArticleCatalog& catalog) {
  auto in = detail::open_input(path);
  std::string line;
  std::size_t dim = 0;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty embedding file");
  {
    const auto header = detail::split(detail::trim(detail::strip_cr(line)), ' ');
    if (header.size() != 2 || header[0] != "#dim" || !detail::parse_number(header[1], dim) ||
        dim == 0) {
      throw FormatError(path.string() + ": first line must be '#dim <m>'");
    }
  }

  std::unordered_map<std::string, std::vector<double>> vectors;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto stripped = detail::strip_cr(line);
    if (detail::trim(stripped).empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    const auto tab = stripped.find('\t');
    if (tab == std::string_view::npos) throw FormatError(where + ": expected id<TAB>values");
    const std::string id(stripped.substr(0, tab));
    std::vector<double> values;
    for (auto field : detail::split(detail::trim(stripped.substr(tab + 1)), ' ')) {
      if (field.empty()) continue;
      double v = 0.0;
      if (!detail::parse_number(field, v) || !std::isfinite(v)) {
        throw FormatError(where + ": non-finite or unparseable value '" + std::string(field) + "'");
      }
      values.push_back(v);
    }
    if (values.size() != dim) {
      throw FormatError(where + ": expected " + std::to_string(dim) + " values, found " +
                        std::to_string(values.size()));
    }
    if (!vectors.emplace(id, std::move(values)).second) {
      throw FormatError(where + ": duplicate id " + id);
    }
  }

  std::vector<std::string> missing;
  for (const auto& article : catalog.articles()) {
    if (vectors.count(article.id) == 0) missing.push_back(article.id);
  }
  if (!missing.empty()) {
    std::string message = path.string() + ": missing embeddings for " +
                          std::to_string(missing.size()) + " article(s):";
    for (const auto& id : missing) message += " " + id;
    throw InputError(message);
  }

  FeatureMatrix features;
  features.kind = FeatureKind::external;
  features.values.resize(static_cast<Eigen::Index>(catalog.size()), static_cast<Eigen::Index>(dim));
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t r = 0; r < catalog.size(); ++r) {
    features.rows.add(catalog[r].id);
    const auto& values = vectors.at(catalog[r].id);
    for (std::size_t c = 0; c < dim; ++c) {
      if (values[c] != 0.0) entries.emplace_back(static_cast<int>(r), static_cast<int>(c), values[c]);
    }
  }
  features.values.setFromTriplets(entries.begin(), entries.end());
  return features;
}

void write_features(const FeatureMatrix& features, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  out << "#kind " << to_string(features.kind) << '\n' << "#dim " << features.dim() << '\n';
  for (std::size_t r = 0; r < features.size(); ++r) {
    out << features.rows.id(r) << '\t';
    bool first = true;
    for (SparseMatrix::InnerIterator it(features.values, static_cast<Eigen::Index>(r)); it; ++it) {
      if (!first) out << ' ';
      first = false;
      out << it.col() << ':' << detail::format_double(it.value());
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

FeatureMatrix read_features(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::string kind_line, dim_line;
  std::size_t dim = 0;
  if (!std::getline(in, kind_line) || !std::getline(in, dim_line) ||
      kind_line.rfind("#kind ", 0) != 0 || dim_line.rfind("#dim ", 0) != 0 ||
      !detail::parse_number(std::string_view(dim_line).substr(5), dim)) {
    throw FormatError(path.string() + ": bad feature header");
  }
  FeatureMatrix features;
  features.kind = parse_feature_kind(detail::trim(std::string_view(kind_line).substr(6)));
  std::vector<Eigen::Triplet<double>> entries;
  std::string line;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    const auto columns = detail::split(detail::strip_cr(line), '\t');
    if (columns.size() != 2 || columns[0].empty()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": malformed feature row");
    }
    const auto row = static_cast<int>(features.rows.size());
    features.rows.add(std::string(columns[0]));
    for (auto field : detail::split(columns[1], ' ')) {
      if (field.empty()) continue;
      const auto colon = field.find(':');
      int col = 0;
      double value = 0.0;
      if (colon == std::string_view::npos || !detail::parse_number(field.substr(0, colon), col) ||
          !detail::parse_number(field.substr(colon + 1), value) || col < 0 ||
          static_cast<std::size_t>(col) >= dim) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": bad entry");
      }
      entries.emplace_back(row, col, value);
    }
  }
  features.values.resize(static_cast<Eigen::Index>(features.rows.size()),
                         static_cast<Eigen::Index>(dim));
  features.values.setFromTriplets(entries.begin(), entries.end());
  return features;
}

void write_vocabulary(const Vectorizer& vectorizer, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  for (std::size_t c = 0; c < vectorizer.dim(); ++c) {
    out << vectorizer.terms[c] << '\t' << vectorizer.document_frequency[c] << '\t'
        << detail::format_double(vectorizer.idf[c]) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace nextrec
