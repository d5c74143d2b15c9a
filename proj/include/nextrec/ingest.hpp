#pragma once

// Parsing and validation of MIND-format news.tsv / behaviors.tsv files.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace nextrec {

struct Article {
  std::string id;
  std::string category;
  std::string subcategory;
  std::string title;
  std::string abstract_text;
};

// Articles keyed by news id, with file order retained.
class ArticleCatalog {
 public:
  // Returns false (and leaves the catalog unchanged) if the id is empty or
  // already present.
  bool insert(Article article);

  bool contains(const std::string& id) const { return index_.count(id) != 0; }
  const Article& at(const std::string& id) const;
  const Article& operator[](std::size_t position) const { return articles_[position]; }
  std::size_t position_of(const std::string& id) const;

  std::size_t size() const { return articles_.size(); }
  bool empty() const { return articles_.empty(); }
  const std::vector<Article>& articles() const { return articles_; }

 private:
  std::vector<Article> articles_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct ClickEvent {
  std::string user;
  std::string news;
  std::int64_t timestamp = 0;  // epoch seconds, UTC
  std::uint32_t within_impression_rank = 0;
};

struct ClickStream {
  std::string user;
  std::vector<ClickEvent> events;  // ascending (timestamp, within_impression_rank)
};

struct ValidationReport {
  std::uint64_t rows_read = 0;
  std::uint64_t rows_kept = 0;
  std::uint64_t rows_skipped_malformed = 0;
  std::uint64_t duplicates_dropped = 0;
  std::uint64_t tokens_skipped_malformed = 0;
  std::uint64_t clicks_dropped_unknown_article = 0;
  std::vector<std::string> messages;

  void merge(const ValidationReport& other);
};

// Article id -> click count. Ordered so that iteration is deterministic.
using Popularity = std::map<std::string, std::uint64_t>;

struct BehaviorLog {
  std::vector<ClickStream> streams;  // sorted by user id
  Popularity history_clicks;     // ids seen in history columns
  Popularity impression_clicks;  // ids clicked (-1) in impression columns

  Popularity total_popularity() const;
};

struct NewsParseResult {
  ArticleCatalog catalog;
  ValidationReport report;
};

struct BehaviorParseResult {
  BehaviorLog log;
  ValidationReport report;
};

struct ValidatedClicks {
  std::vector<ClickStream> streams;
  ValidationReport report;
};

// Throws IoError if the file cannot be opened. Malformed rows never throw.
NewsParseResult parse_news(const std::filesystem::path& path);
BehaviorParseResult parse_behaviors(const std::filesystem::path& path);

// Drops clicks on articles absent from the catalog, then users left empty.
ValidatedClicks validate_clicks(const std::vector<ClickStream>& streams,
                                const ArticleCatalog& catalog);

// "M/D/YYYY H:MM:SS AM|PM" -> epoch seconds (UTC). Returns false on any
// malformed field.
bool parse_mind_timestamp(const std::string& text, std::int64_t& epoch_seconds);
std::string format_mind_timestamp(std::int64_t epoch_seconds);

// Persistence for staged runs. The catalog is written in news.tsv layout
// (empty url and entity columns), so parse_news reads it back.
void write_catalog(const ArticleCatalog& catalog, const std::filesystem::path& path);
void write_clicks(const std::vector<ClickStream>& streams, const std::filesystem::path& path);
std::vector<ClickStream> read_clicks(const std::filesystem::path& path);
void write_popularity(const Popularity& popularity, const std::filesystem::path& path);
Popularity read_popularity(const std::filesystem::path& path);

}  // namespace nextrec
