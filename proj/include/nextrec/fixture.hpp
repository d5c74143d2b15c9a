#pragma once

// Synthetic MIND-format data with a tunable content signal: with
// probability beta the next click stays in the category of the previous one.

#include <cstdint>
#include <filesystem>

namespace nextrec {

struct FixtureSpec {
  std::size_t n_users = 50;
  std::size_t n_articles = 200;
  double beta = 0.8;
  std::uint64_t seed = 7;
  std::size_t embedding_dim = 16;  // 0 disables embeddings.tsv
};

struct FixtureSummary {
  std::size_t articles = 0;
  std::size_t categories = 0;
  std::size_t impressions = 0;
  std::size_t clicks = 0;
};

// Writes news.tsv, behaviors.tsv and (if embedding_dim > 0) embeddings.tsv
// into out_dir. Throws ParameterError if n_users or n_articles < 2.
FixtureSummary generate_fixture(const FixtureSpec& spec, const std::filesystem::path& out_dir);

}  // namespace nextrec
