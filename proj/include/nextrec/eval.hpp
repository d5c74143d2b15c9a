#pragma once

// Ranking evaluation with a single relevant item per query: MAP@K,
// Recall@K, Novelty@K and Diversity@K.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nextrec/features.hpp"
#include "nextrec/ingest.hpp"
#include "nextrec/models.hpp"
#include "nextrec/splits.hpp"

namespace nextrec {

// 1-based rank of the relevant item, or nullopt if it was not a candidate.
using Rank = std::optional<std::size_t>;
using RankedList = std::vector<std::string>;

struct Metrics {
  double map = 0.0;
  double recall = 0.0;
  double novelty = 0.0;
  double diversity = 0.0;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

// Mean of 1/rank over queries with rank <= k (0 otherwise).
double map_at_k(std::span<const Rank> ranks, std::size_t k);
// Fraction of queries with rank <= k.
double recall_at_k(std::span<const Rank> ranks, std::size_t k);
// Mean over lists of the mean of -log2(max(pop, 1) / total_clicks) over the
// first k items.
double novelty_at_k(std::span<const RankedList> lists, const Popularity& popularity,
                    std::uint64_t total_clicks, std::size_t k);
// Mean over lists of the mean pairwise cosine distance of the first k items'
// TF-IDF rows; lists shorter than two items count as 0.
double diversity_at_k(std::span<const RankedList> lists, const FeatureMatrix& tfidf,
                      std::size_t k);

// Popularity restricted to the split's train-side articles.
Popularity train_side_popularity(const Popularity& popularity, const DataSplit& split);

// Train articles then test-only articles, in index order.
std::vector<std::string> candidate_universe(const DataSplit& split);

struct EvaluationInput {
  const FactorModel& model;
  const DataSplit& split;
  const FeatureMatrix& features;  // the model's content input
  const FeatureMatrix& tfidf;     // diversity is always measured on TF-IDF
  const Popularity& popularity;   // already restricted to the train side
  std::vector<std::size_t> ks;
};

// Metrics per k, in the order of input.ks. Throws EmptyInputError on an
// empty test side and ParameterError on k = 0.
std::vector<Metrics> evaluate(const EvaluationInput& input);
std::vector<Metrics> evaluate_reference(const EvaluationInput& input);

struct MetricKey {
  std::string model;
  std::string setting;
  std::size_t k = 0;

  friend auto operator<=>(const MetricKey&, const MetricKey&) = default;
};

struct MetricReport {
  std::map<MetricKey, Metrics> values;

  void add(const std::string& model, const std::string& setting,
           std::span<const std::size_t> ks, std::span<const Metrics> metrics);
  std::vector<std::size_t> ks() const;
};

// CSV "model,setting,k,metric,value" sorted by (model, setting, metric, k).
void emit_curves(const MetricReport& report, const std::filesystem::path& path);
std::string curves_csv(const MetricReport& report);
MetricReport read_curves(const std::filesystem::path& path);

// Aligned text table: one block per setting, one row per model, MAP@k and
// Recall@k columns for the two smallest k.
std::string format_summary(const MetricReport& report);

}  // namespace nextrec
