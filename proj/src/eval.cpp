#include "nextrec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "nextrec/error.hpp"
#include "text_io.hpp"

namespace nextrec {

double map_at_k(std::span<const Rank> ranks, std::size_t k) {
  if (k == 0) throw ParameterError("k must be >= 1");
  if (ranks.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : ranks) {
    if (r && *r <= k) sum += 1.0 / static_cast<double>(*r);
  }
  return sum / static_cast<double>(ranks.size());
}

double recall_at_k(std::span<const Rank> ranks, std::size_t k) {
  if (k == 0) throw ParameterError("k must be >= 1");
  if (ranks.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& r : ranks) {
    if (r && *r <= k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

namespace {

double self_information(std::uint64_t clicks, std::uint64_t total) {
  const double p = static_cast<double>(std::max<std::uint64_t>(clicks, 1)) /
                   static_cast<double>(std::max<std::uint64_t>(total, 1));
  return -std::log2(p);
}

std::uint64_t lookup(const Popularity& popularity, const std::string& id) {
  auto it = popularity.find(id);
  return it == popularity.end() ? 0 : it->second;
}

// Running sums over a ranked prefix: novelty and pairwise distance totals at
// every prefix length up to the list size.
struct PrefixSums {
  std::vector<double> novelty;   // novelty[L] = sum over first L items
  std::vector<double> distance;  // distance[L] = sum over pairs within first L

  double mean_novelty(std::size_t k) const {
    const std::size_t l = std::min(k, novelty.size() - 1);
    return l == 0 ? 0.0 : novelty[l] / static_cast<double>(l);
  }
  double mean_distance(std::size_t k) const {
    const std::size_t l = std::min(k, distance.size() - 1);
    if (l < 2) return 0.0;
    return distance[l] / (static_cast<double>(l) * static_cast<double>(l - 1) / 2.0);
  }
};

template <typename NoveltyOf, typename DistanceOf>
PrefixSums prefix_sums(std::size_t length, NoveltyOf novelty_of, DistanceOf distance_of) {
  PrefixSums sums;
  sums.novelty.assign(length + 1, 0.0);
  sums.distance.assign(length + 1, 0.0);
  for (std::size_t l = 0; l < length; ++l) {
    sums.novelty[l + 1] = sums.novelty[l] + novelty_of(l);
    double added = 0.0;
    for (std::size_t a = 0; a < l; ++a) added += distance_of(a, l);
    sums.distance[l + 1] = sums.distance[l] + added;
  }
  return sums;
}

std::uint64_t total_clicks(const Popularity& popularity) {
  std::uint64_t total = 0;
  for (const auto& [id, count] : popularity) total += count;
  return total;
}

}  // namespace

double novelty_at_k(std::span<const RankedList> lists, const Popularity& popularity,
                    std::uint64_t total, std::size_t k) {
  if (k == 0) throw ParameterError("k must be >= 1");
  if (lists.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& list : lists) {
    const std::size_t length = std::min(k, list.size());
    const auto sums = prefix_sums(
        length, [&](std::size_t a) { return self_information(lookup(popularity, list[a]), total); },
        [](std::size_t, std::size_t) { return 0.0; });
    sum += sums.mean_novelty(k);
  }
  return sum / static_cast<double>(lists.size());
}

double diversity_at_k(std::span<const RankedList> lists, const FeatureMatrix& tfidf,
                      std::size_t k) {
  if (k == 0) throw ParameterError("k must be >= 1");
  if (lists.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& list : lists) {
    const std::size_t length = std::min(k, list.size());
    std::vector<Eigen::Index> rows;
    for (std::size_t a = 0; a < length; ++a) {
      const std::size_t r = tfidf.rows.find(list[a]);
      if (r == tfidf.rows.size()) throw InputError("no TF-IDF row for article " + list[a]);
      rows.push_back(static_cast<Eigen::Index>(r));
    }
    const auto sums = prefix_sums(
        length, [](std::size_t) { return 0.0; },
        [&](std::size_t a, std::size_t b) { return cosine_distance(tfidf.values, rows[a], rows[b]); });
    sum += sums.mean_distance(k);
  }
  return sum / static_cast<double>(lists.size());
}

Popularity train_side_popularity(const Popularity& popularity, const DataSplit& split) {
  Popularity out;
  for (const auto& [id, count] : popularity) {
    if (split.train.articles.contains(id)) out.emplace(id, count);
  }
  return out;
}

std::vector<std::string> candidate_universe(const DataSplit& split) {
  std::vector<std::string> universe = split.train.articles.ids();
  for (const auto& id : split.test.articles.ids()) {
    if (!split.train.articles.contains(id)) universe.push_back(id);
  }
  return universe;
}

namespace {

struct QueryResult {
  Rank rank;
  PrefixSums sums;
};

class QueryEvaluator {
 public:
  explicit QueryEvaluator(const EvaluationInput& input)
      : input_(input), scorer_(input.model, input.features, candidate_universe(input.split)) {
    if (input.split.test.empty()) throw EmptyInputError("evaluation needs a non-empty test side");
    if (input.ks.empty()) throw ParameterError("evaluation needs at least one k");
    for (std::size_t k : input.ks) {
      if (k == 0) throw ParameterError("k must be >= 1");
    }
    max_k_ = *std::max_element(input.ks.begin(), input.ks.end());
    const auto& universe = scorer_.universe();
    const std::uint64_t total = total_clicks(input.popularity);
    novelty_.resize(universe.size());
    tfidf_row_.resize(universe.size());
    for (std::size_t p = 0; p < universe.size(); ++p) {
      novelty_[p] = self_information(lookup(input.popularity, universe[p]), total);
      const std::size_t r = input.tfidf.rows.find(universe[p]);
      if (r == input.tfidf.rows.size()) {
        throw InputError("no TF-IDF row for article " + universe[p]);
      }
      tfidf_row_[p] = static_cast<Eigen::Index>(r);
    }
  }

  std::size_t size() const { return input_.split.test.size(); }

  QueryResult run(std::size_t q) const {
    const auto& t = input_.split.test.triplets[q];
    const std::size_t last = scorer_.position(t.last);
    const std::size_t truth = scorer_.position(t.next);
    std::vector<std::size_t> candidates;
    candidates.reserve(scorer_.universe().size());
    for (std::size_t p = 0; p < scorer_.universe().size(); ++p) {
      if (p != last) candidates.push_back(p);
    }
    const auto ranked = scorer_.rank(t.user, last, candidates);
    QueryResult result;
    auto hit = std::find(ranked.begin(), ranked.end(), truth);
    if (hit != ranked.end()) result.rank = static_cast<std::size_t>(hit - ranked.begin()) + 1;
    const std::size_t length = std::min(max_k_, ranked.size());
    result.sums = prefix_sums(
        length, [&](std::size_t a) { return novelty_[ranked[a]]; },
        [&](std::size_t a, std::size_t b) {
          return cosine_distance(input_.tfidf.values, tfidf_row_[ranked[a]],
                                 tfidf_row_[ranked[b]]);
        });
    return result;
  }

  std::vector<Metrics> aggregate(const std::vector<QueryResult>& results) const {
    std::vector<Rank> ranks;
    ranks.reserve(results.size());
    for (const auto& r : results) ranks.push_back(r.rank);
    std::vector<Metrics> out;
    for (std::size_t k : input_.ks) {
      Metrics m;
      m.map = map_at_k(ranks, k);
      m.recall = recall_at_k(ranks, k);
      for (const auto& r : results) {
        m.novelty += r.sums.mean_novelty(k);
        m.diversity += r.sums.mean_distance(k);
      }
      m.novelty /= static_cast<double>(results.size());
      m.diversity /= static_cast<double>(results.size());
      out.push_back(m);
    }
    return out;
  }

 private:
  const EvaluationInput& input_;
  Scorer scorer_;
  std::size_t max_k_ = 0;
  std::vector<double> novelty_;
  std::vector<Eigen::Index> tfidf_row_;
};

}  // namespace

std::vector<Metrics> evaluate(const EvaluationInput& input) {
  const QueryEvaluator evaluator(input);
  std::vector<QueryResult> results(evaluator.size());
  const auto n = static_cast<std::ptrdiff_t>(results.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t q = 0; q < n; ++q) {
    results[static_cast<std::size_t>(q)] = evaluator.run(static_cast<std::size_t>(q));
  }
  return evaluator.aggregate(results);
}

std::vector<Metrics> evaluate_reference(const EvaluationInput& input) {
  const QueryEvaluator evaluator(input);
  std::vector<QueryResult> results;
  results.reserve(evaluator.size());
  for (std::size_t q = 0; q < evaluator.size(); ++q) results.push_back(evaluator.run(q));
  return evaluator.aggregate(results);
}

// ---------------------------------------------------------------------------
// Reports

void MetricReport::add(const std::string& model, const std::string& setting,
                       std::span<const std::size_t> ks, std::span<const Metrics> metrics) {
  if (ks.size() != metrics.size()) throw InputError("MetricReport::add: size mismatch");
  for (std::size_t n = 0; n < ks.size(); ++n) values[MetricKey{model, setting, ks[n]}] = metrics[n];
}

std::vector<std::size_t> MetricReport::ks() const {
  std::vector<std::size_t> out;
  for (const auto& [key, m] : values) out.push_back(key.k);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

constexpr const char* kMetricNames[] = {"diversity", "map", "novelty", "recall"};

double metric_value(const Metrics& m, std::string_view name) {
  if (name == "diversity") return m.diversity;
  if (name == "map") return m.map;
  if (name == "novelty") return m.novelty;
  return m.recall;
}

}  // namespace

std::string curves_csv(const MetricReport& report) {
  std::ostringstream out;
  out << "model,setting,k,metric,value\n";
  auto it = report.values.begin();
  while (it != report.values.end()) {
    auto end = it;
    while (end != report.values.end() && end->first.model == it->first.model &&
           end->first.setting == it->first.setting) {
      ++end;
    }
    for (const char* name : kMetricNames) {
      for (auto row = it; row != end; ++row) {
        out << row->first.model << ',' << row->first.setting << ',' << row->first.k << ','
            << name << ',' << detail::format_double(metric_value(row->second, name)) << '\n';
      }
    }
    it = end;
  }
  return out.str();
}

void emit_curves(const MetricReport& report, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  out << curves_csv(report);
  if (!out) throw IoError("write failed: " + path.string());
}

MetricReport read_curves(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  MetricReport report;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (detail::strip_cr(line) != "model,setting,k,metric,value") {
        throw FormatError(path.string() + ": unexpected curve header");
      }
      continue;
    }
    const auto f = detail::split(detail::strip_cr(line), ',');
    std::size_t k = 0;
    double value = 0.0;
    if (f.size() != 5 || !detail::parse_number(f[2], k) || !detail::parse_number(f[4], value)) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": malformed curve row");
    }
    auto& m = report.values[MetricKey{std::string(f[0]), std::string(f[1]), k}];
    if (f[3] == "diversity") m.diversity = value;
    else if (f[3] == "map") m.map = value;
    else if (f[3] == "novelty") m.novelty = value;
    else if (f[3] == "recall") m.recall = value;
    else throw FormatError(path.string() + ":" + std::to_string(line_no) + ": unknown metric");
  }
  return report;
}

std::string format_summary(const MetricReport& report) {
  std::vector<std::string> settings, models;
  for (const auto& [key, m] : report.values) {
    if (std::find(settings.begin(), settings.end(), key.setting) == settings.end())
      settings.push_back(key.setting);
    if (std::find(models.begin(), models.end(), key.model) == models.end())
      models.push_back(key.model);
  }
  // warm ("standard") before cold, as in the usual results layout
  std::stable_sort(settings.begin(), settings.end(), [](const auto& a, const auto& b) {
    auto order = [](const std::string& s) { return s == "warm" ? 0 : s == "cold" ? 1 : 2; };
    return order(a) < order(b);
  });
  const auto ks = report.ks();
  std::vector<std::size_t> table_ks(ks.begin(), ks.begin() + std::min<std::size_t>(2, ks.size()));

  std::ostringstream out;
  char buf[128];
  auto header = [&](const std::vector<std::string>& columns) {
    std::snprintf(buf, sizeof(buf), "%-10s", "Model");
    out << buf;
    for (const auto& c : columns) {
      std::snprintf(buf, sizeof(buf), " %12s", c.c_str());
      out << buf;
    }
    out << '\n';
  };
  for (const auto& setting : settings) {
    out << "== " << (setting == "warm" ? "Standard (warm-start)" : setting == "cold" ? "Cold-start" : setting)
        << " ==\n";
    std::vector<std::string> columns;
    for (std::size_t k : table_ks) {
      columns.push_back("MAP@" + std::to_string(k));
      columns.push_back("Recall@" + std::to_string(k));
    }
    header(columns);
    for (const auto& model : models) {
      std::snprintf(buf, sizeof(buf), "%-10s", model.c_str());
      out << buf;
      for (std::size_t k : table_ks) {
        auto it = report.values.find(MetricKey{model, setting, k});
        if (it == report.values.end()) {
          out << "            -            -";
          continue;
        }
        std::snprintf(buf, sizeof(buf), " %12.4f %12.4f", it->second.map, it->second.recall);
        out << buf;
      }
      out << '\n';
    }
    out << "-- novelty / diversity --\n";
    columns.clear();
    for (std::size_t k : ks) {
      columns.push_back("Nov@" + std::to_string(k));
      columns.push_back("Div@" + std::to_string(k));
    }
    header(columns);
    for (const auto& model : models) {
      std::snprintf(buf, sizeof(buf), "%-10s", model.c_str());
      out << buf;
      for (std::size_t k : ks) {
        auto it = report.values.find(MetricKey{model, setting, k});
        if (it == report.values.end()) {
          out << "            -            -";
          continue;
        }
        std::snprintf(buf, sizeof(buf), " %12.4f %12.4f", it->second.novelty, it->second.diversity);
        out << buf;
      }
      out << '\n';
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace nextrec
