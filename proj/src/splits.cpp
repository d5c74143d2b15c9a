#include "nextrec/splits.hpp"

#include <cmath>
#include <numeric>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "nextrec/error.hpp"
#include "nextrec/random.hpp"
#include "text_io.hpp"

namespace nextrec {

std::string_view to_string(SplitKind kind) { return kind == SplitKind::warm ? "warm" : "cold"; }

SplitKind parse_split_kind(std::string_view text) {
  if (text == "warm") return SplitKind::warm;
  if (text == "cold") return SplitKind::cold;
  throw ParameterError("unknown split kind: " + std::string(text));
}

namespace {

// First `count` entries of a seeded Fisher-Yates shuffle of 0..n-1.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count,
                                                    std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t pick = k + rng.uniform_index(n - k);
    std::swap(order[k], order[pick]);
  }
  order.resize(count);
  return order;
}

void check_fraction(double fraction, const char* name) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ParameterError(std::string(name) + " must lie in (0, 1)");
  }
}

void check_nondegenerate(const DataSplit& split) {
  if (split.test.empty()) throw DegenerateError("split produced an empty test side");
  if (split.train.empty()) throw DegenerateError("split produced an empty train side");
}

}  // namespace

DataSplit make_cold_split(const TripletSet& triplets, double holdout_fraction,
                          std::uint64_t seed) {
  check_fraction(holdout_fraction, "holdout fraction");
  if (triplets.empty()) throw EmptyInputError("cannot split an empty triplet set");

  const std::size_t n = triplets.articles.size();
  const auto count = static_cast<std::size_t>(
      std::ceil(holdout_fraction * static_cast<double>(n) - 1e-9));
  DataSplit split;
  split.kind = SplitKind::cold;
  split.seed = seed;
  split.fraction = holdout_fraction;
  for (std::size_t idx : sample_without_replacement(n, std::max<std::size_t>(count, 1), seed)) {
    split.holdout_articles.insert(triplets.articles.id(idx));
  }

  std::vector<Triplet> train, test;
  for (const auto& t : triplets.triplets) {
    const bool touches =
        split.holdout_articles.count(t.last) != 0 || split.holdout_articles.count(t.next) != 0;
    (touches ? test : train).push_back(t);
  }
  split.train = TripletSet::from_triplets(std::move(train));
  split.test = TripletSet::from_triplets(std::move(test));
  check_nondegenerate(split);
  return split;
}

DataSplit make_warm_split(const TripletSet& triplets, double test_fraction, std::uint64_t seed) {
  check_fraction(test_fraction, "test fraction");
  if (triplets.empty()) throw EmptyInputError("cannot split an empty triplet set");

  const std::size_t n = triplets.size();
  const auto count = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  std::vector<bool> candidate(n, false);
  for (std::size_t idx : sample_without_replacement(n, std::min(count, n), seed)) {
    candidate[idx] = true;
  }

  std::unordered_set<std::string> covered;
  for (std::size_t k = 0; k < n; ++k) {
    if (!candidate[k]) {
      covered.insert(triplets.triplets[k].last);
      covered.insert(triplets.triplets[k].next);
    }
  }
  // Moving a candidate back only grows the covered set, so one pass suffices.
  for (std::size_t k = 0; k < n; ++k) {
    if (!candidate[k]) continue;
    const auto& t = triplets.triplets[k];
    if (covered.count(t.last) == 0 || covered.count(t.next) == 0) {
      candidate[k] = false;
      covered.insert(t.last);
      covered.insert(t.next);
    }
  }

  std::vector<Triplet> train, test;
  for (std::size_t k = 0; k < n; ++k) {
    (candidate[k] ? test : train).push_back(triplets.triplets[k]);
  }
  DataSplit split;
  split.kind = SplitKind::warm;
  split.seed = seed;
  split.fraction = test_fraction;
  split.train = TripletSet::from_triplets(std::move(train));
  split.test = TripletSet::from_triplets(std::move(test));
  check_nondegenerate(split);
  return split;
}

SideStats side_stats(const TripletSet& side) {
  return SideStats{side.users.size(), side.articles.size(), side.triplets.size()};
}

SplitStats split_stats(const DataSplit& split) {
  return SplitStats{side_stats(split.train), side_stats(split.test)};
}

void save_split(const DataSplit& split, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_triplets(split.train, dir / "train.tsv");
  write_triplets(split.test, dir / "test.tsv");
  nlohmann::ordered_json manifest;
  manifest["kind"] = to_string(split.kind);
  manifest["seed"] = split.seed;
  manifest["fraction"] = split.fraction;
  manifest["holdout_articles"] = split.holdout_articles;
  const auto stats = split_stats(split);
  manifest["train"] = {{"users", stats.train.n_users},
                       {"items", stats.train.n_items},
                       {"entries", stats.train.n_entries}};
  manifest["test"] = {{"users", stats.test.n_users},
                      {"items", stats.test.n_items},
                      {"entries", stats.test.n_entries}};
  auto out = detail::open_output(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

DataSplit load_split(const std::filesystem::path& dir) {
  auto in = detail::open_input(dir / "manifest.json");
  DataSplit split;
  try {
    const auto manifest = nlohmann::json::parse(in);
    split.kind = parse_split_kind(manifest.at("kind").get<std::string>());
    split.seed = manifest.at("seed").get<std::uint64_t>();
    split.fraction = manifest.at("fraction").get<double>();
    split.holdout_articles = manifest.at("holdout_articles").get<std::set<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError((dir / "manifest.json").string() + ": " + e.what());
  }
  split.train = read_triplets(dir / "train.tsv");
  split.test = read_triplets(dir / "test.tsv");
  return split;
}

}  // namespace nextrec
