#include "nextrec/ingest.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "nextrec/error.hpp"
#include "text_io.hpp"

namespace nextrec {

using detail::split;
using detail::strip_cr;

bool ArticleCatalog::insert(Article article) {
  if (article.id.empty() || contains(article.id)) return false;
  index_.emplace(article.id, articles_.size());
  articles_.push_back(std::move(article));
  return true;
}

const Article& ArticleCatalog::at(const std::string& id) const {
  return articles_[position_of(id)];
}

std::size_t ArticleCatalog::position_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw InputError("unknown article id: " + id);
  return it->second;
}

void ValidationReport::merge(const ValidationReport& other) {
  rows_read += other.rows_read;
  rows_kept += other.rows_kept;
  rows_skipped_malformed += other.rows_skipped_malformed;
  duplicates_dropped += other.duplicates_dropped;
  tokens_skipped_malformed += other.tokens_skipped_malformed;
  clicks_dropped_unknown_article += other.clicks_dropped_unknown_article;
  messages.insert(messages.end(), other.messages.begin(), other.messages.end());
}

Popularity BehaviorLog::total_popularity() const {
  Popularity total = history_clicks;
  for (const auto& [id, count] : impression_clicks) total[id] += count;
  return total;
}

namespace {

constexpr std::size_t kMaxMessages = 50;

void note(ValidationReport& report, std::string message) {
  if (report.messages.size() < kMaxMessages) report.messages.push_back(std::move(message));
}

// Days since 1970-01-01 of a proleptic Gregorian date.
std::int64_t days_from_civil(int year, unsigned month, unsigned day) {
  using namespace std::chrono;
  return sys_days{std::chrono::year{year} / std::chrono::month{month} / std::chrono::day{day}}
      .time_since_epoch()
      .count();
}

}  // namespace

bool parse_mind_timestamp(const std::string& text, std::int64_t& epoch_seconds) {
  const auto parts = split(detail::trim(text), ' ');
  if (parts.size() != 3) return false;
  const auto date = split(parts[0], '/');
  const auto clock = split(parts[1], ':');
  if (date.size() != 3 || clock.size() != 3) return false;
  int month = 0, day = 0, year = 0, hour = 0, minute = 0, second = 0;
  if (!detail::parse_number(date[0], month) || !detail::parse_number(date[1], day) ||
      !detail::parse_number(date[2], year) || !detail::parse_number(clock[0], hour) ||
      !detail::parse_number(clock[1], minute) || !detail::parse_number(clock[2], second)) {
    return false;
  }
  if (month < 1 || month > 12 || day < 1 || year < 1970 || hour < 1 || hour > 12 ||
      minute < 0 || minute > 59 || second < 0 || second > 59) {
    return false;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{year},
                                        std::chrono::month{static_cast<unsigned>(month)},
                                        std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) return false;
  int hour24 = hour % 12;
  if (parts[2] == "PM") {
    hour24 += 12;
  } else if (parts[2] != "AM") {
    return false;
  }
  epoch_seconds = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day)) *
                      86400 +
                  hour24 * 3600 + minute * 60 + second;
  return epoch_seconds > 0;
}

std::string format_mind_timestamp(std::int64_t epoch_seconds) {
  using namespace std::chrono;
  const sys_days days{std::chrono::days{epoch_seconds / 86400}};
  const year_month_day ymd{days};
  const std::int64_t rest = epoch_seconds % 86400;
  const int hour24 = static_cast<int>(rest / 3600);
  const int minute = static_cast<int>((rest % 3600) / 60);
  const int second = static_cast<int>(rest % 60);
  int hour12 = hour24 % 12;
  if (hour12 == 0) hour12 = 12;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%u/%u/%d %d:%02d:%02d %s", static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(ymd.year()), hour12, minute,
                second, hour24 < 12 ? "AM" : "PM");
  return buf;
}

NewsParseResult parse_news(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  NewsParseResult result;
  auto& report = result.report;
  std::string line;
  while (std::getline(in, line)) {
    ++report.rows_read;
    const auto columns = split(strip_cr(line), '\t');
    if (columns.size() < 5) {
      ++report.rows_skipped_malformed;
      note(report, "news row " + std::to_string(report.rows_read) + ": fewer than 5 columns");
      continue;
    }
    if (columns[0].empty()) {
      ++report.rows_skipped_malformed;
      note(report, "news row " + std::to_string(report.rows_read) + ": empty id");
      continue;
    }
    // url (column 5) and entity columns are not retained
    Article article{std::string(columns[0]), std::string(columns[1]), std::string(columns[2]),
                    std::string(columns[3]), std::string(columns[4])};
    if (!result.catalog.insert(std::move(article))) {
      ++report.duplicates_dropped;
      note(report, "news row " + std::to_string(report.rows_read) + ": duplicate id " +
                       std::string(columns[0]));
      continue;
    }
    ++report.rows_kept;
  }
  return result;
}

BehaviorParseResult parse_behaviors(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  BehaviorParseResult result;
  auto& report = result.report;
  auto& log = result.log;
  std::map<std::string, ClickStream> by_user;
  std::string line;
  while (std::getline(in, line)) {
    ++report.rows_read;
    const auto columns = split(strip_cr(line), '\t');
    if (columns.size() < 5 || columns[1].empty()) {
      ++report.rows_skipped_malformed;
      note(report, "behaviors row " + std::to_string(report.rows_read) + ": malformed");
      continue;
    }
    std::int64_t timestamp = 0;
    if (!parse_mind_timestamp(std::string(columns[2]), timestamp)) {
      ++report.rows_skipped_malformed;
      note(report, "behaviors row " + std::to_string(report.rows_read) +
                       ": unparseable timestamp '" + std::string(columns[2]) + "'");
      continue;
    }
    ++report.rows_kept;
    const std::string user(columns[1]);

    for (auto id : split(columns[3], ' ')) {
      if (!id.empty()) ++log.history_clicks[std::string(id)];
    }

    auto& stream = by_user[user];
    stream.user = user;
    std::uint32_t rank = 0;
    for (auto token : split(columns[4], ' ')) {
      if (token.empty()) continue;
      const auto dash = token.rfind('-');
      const bool valid = dash != std::string_view::npos && dash > 0 && dash + 2 == token.size() &&
                         (token.back() == '0' || token.back() == '1');
      if (!valid) {
        ++report.tokens_skipped_malformed;
        note(report, "behaviors row " + std::to_string(report.rows_read) + ": bad token '" +
                         std::string(token) + "'");
        continue;
      }
      if (token.back() != '1') continue;
      std::string news(token.substr(0, dash));
      ++log.impression_clicks[news];
      stream.events.push_back(ClickEvent{user, std::move(news), timestamp, rank++});
    }
  }
  for (auto& [user, stream] : by_user) {
    if (stream.events.empty()) continue;
    // stable: exact ties keep file order
    std::stable_sort(stream.events.begin(), stream.events.end(),
                     [](const ClickEvent& a, const ClickEvent& b) {
                       if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                       return a.within_impression_rank < b.within_impression_rank;
                     });
    log.streams.push_back(std::move(stream));
  }
  return result;
}

ValidatedClicks validate_clicks(const std::vector<ClickStream>& streams,
                                const ArticleCatalog& catalog) {
  ValidatedClicks result;
  for (const auto& stream : streams) {
    ClickStream kept{stream.user, {}};
    for (const auto& event : stream.events) {
      if (catalog.contains(event.news)) {
        kept.events.push_back(event);
      } else {
        ++result.report.clicks_dropped_unknown_article;
        note(result.report, "click on unknown article " + event.news + " by " + stream.user);
      }
    }
    if (!kept.events.empty()) result.streams.push_back(std::move(kept));
  }
  return result;
}

void write_catalog(const ArticleCatalog& catalog, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  for (const auto& a : catalog.articles()) {
    out << a.id << '\t' << a.category << '\t' << a.subcategory << '\t' << a.title << '\t'
        << a.abstract_text << "\t\t\t\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void write_clicks(const std::vector<ClickStream>& streams, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  for (const auto& stream : streams) {
    for (const auto& e : stream.events) {
      out << e.user << '\t' << e.news << '\t' << e.timestamp << '\t' << e.within_impression_rank
          << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<ClickStream> read_clicks(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::vector<ClickStream> streams;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto columns = split(strip_cr(line), '\t');
    ClickEvent e;
    if (columns.size() != 4 || !detail::parse_number(columns[2], e.timestamp) ||
        !detail::parse_number(columns[3], e.within_impression_rank)) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": malformed click row");
    }
    e.user = std::string(columns[0]);
    e.news = std::string(columns[1]);
    if (streams.empty() || streams.back().user != e.user) streams.push_back({e.user, {}});
    streams.back().events.push_back(std::move(e));
  }
  return streams;
}

void write_popularity(const Popularity& popularity, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  for (const auto& [id, count] : popularity) out << id << '\t' << count << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

Popularity read_popularity(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  Popularity popularity;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto columns = split(strip_cr(line), '\t');
    std::uint64_t count = 0;
    if (columns.size() != 2 || !detail::parse_number(columns[1], count)) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": malformed popularity row");
    }
    popularity[std::string(columns[0])] = count;
  }
  return popularity;
}

}  // namespace nextrec
