#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>

#include "nextrec/transitions.hpp"

namespace nextrec {

enum class SplitKind { warm, cold };

std::string_view to_string(SplitKind kind);
SplitKind parse_split_kind(std::string_view text);

struct DataSplit {
  TripletSet train;
  TripletSet test;
  std::set<std::string> holdout_articles;  // empty for warm splits
  SplitKind kind = SplitKind::warm;
  std::uint64_t seed = 0;
  double fraction = 0.0;  // holdout fraction (cold) or test fraction (warm)
};

struct SideStats {
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  std::size_t n_entries = 0;
};

struct SplitStats {
  SideStats train;
  SideStats test;
};

// Holds out ceil(fraction * |articles|) articles; every triplet touching one
// goes to test.
DataSplit make_cold_split(const TripletSet& triplets, double holdout_fraction,
                          std::uint64_t seed);

// Samples round(fraction * |triplets|) test candidates, then moves back to
// train any candidate with an article that train does not cover.
DataSplit make_warm_split(const TripletSet& triplets, double test_fraction,
                          std::uint64_t seed);

SideStats side_stats(const TripletSet& side);
SplitStats split_stats(const DataSplit& split);

// <dir>/train.tsv, <dir>/test.tsv, <dir>/manifest.json
void save_split(const DataSplit& split, const std::filesystem::path& dir);
DataSplit load_split(const std::filesystem::path& dir);

}  // namespace nextrec
