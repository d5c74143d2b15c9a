#include "nextrec/fixture.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <string>
#include <vector>

#include "nextrec/error.hpp"
#include "nextrec/ingest.hpp"
#include "nextrec/random.hpp"
#include "text_io.hpp"

namespace nextrec {

namespace {

constexpr std::array<const char*, 8> kCategories = {"news",   "sports", "finance", "health",
                                                    "travel", "music",  "weather", "autos"};
constexpr std::size_t kWordsPerCategory = 30;
constexpr std::size_t kGeneralWords = 60;
constexpr double kTopicalWordShare = 0.7;
constexpr std::int64_t kBaseTime = 1573257600;  // 11/9/2019 0:00:00 UTC
constexpr std::int64_t kDay = 86400;

std::string pseudo_word(Rng& rng) {
  static constexpr const char* kSyllables[] = {"ka", "lo", "mi", "ne", "ru", "sa", "ti", "vo",
                                               "be", "da", "fu", "go", "hi", "ja", "po", "ze"};
  const std::size_t n = 2 + rng.uniform_index(2);
  std::string word;
  for (std::size_t k = 0; k < n; ++k) word += kSyllables[rng.uniform_index(16)];
  return word;
}

std::vector<std::string> distinct_words(Rng& rng, std::size_t count, std::vector<std::string>& used) {
  std::vector<std::string> out;
  while (out.size() < count) {
    auto w = pseudo_word(rng);
    if (std::find(used.begin(), used.end(), w) != used.end()) continue;
    used.push_back(w);
    out.push_back(std::move(w));
  }
  return out;
}

std::string sentence(Rng& rng, std::size_t length, const std::vector<std::string>& topical,
                     const std::vector<std::string>& general) {
  std::string out;
  for (std::size_t k = 0; k < length; ++k) {
    const auto& pool = rng.uniform() < kTopicalWordShare ? topical : general;
    if (!out.empty()) out += ' ';
    out += pool[rng.uniform_index(pool.size())];
  }
  return out;
}

}  // namespace

FixtureSummary generate_fixture(const FixtureSpec& spec, const std::filesystem::path& out_dir) {
  if (spec.n_users < 2 || spec.n_articles < 2) {
    throw ParameterError("fixture needs at least 2 users and 2 articles");
  }
  if (!(spec.beta >= 0.0 && spec.beta <= 1.0)) throw ParameterError("beta must lie in [0, 1]");
  std::filesystem::create_directories(out_dir);
  Rng rng(stage_seed(spec.seed, "fixture"));

  const std::size_t n_categories =
      std::clamp<std::size_t>(spec.n_articles / 10, 1, kCategories.size());
  std::vector<std::string> used;
  const auto general = distinct_words(rng, kGeneralWords, used);
  std::vector<std::vector<std::string>> vocab;
  for (std::size_t c = 0; c < n_categories; ++c) {
    vocab.push_back(distinct_words(rng, kWordsPerCategory, used));
  }

  // Articles: round-robin categories so every category is populated.
  std::vector<std::size_t> category_of(spec.n_articles);
  std::vector<std::vector<std::size_t>> members(n_categories);
  FixtureSummary summary;
  summary.articles = spec.n_articles;
  summary.categories = n_categories;
  {
    auto out = detail::open_output(out_dir / "news.tsv");
    for (std::size_t a = 0; a < spec.n_articles; ++a) {
      const std::size_t c = a % n_categories;
      category_of[a] = c;
      members[c].push_back(a);
      auto title = sentence(rng, 6, vocab[c], general);
      title[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(title[0])));
      const auto abstract_text = sentence(rng, 14, vocab[c], general);
      out << 'N' << (a + 1) << '\t' << kCategories[c] << '\t' << kCategories[c] << '_' << (a % 3)
          << '\t' << title << '\t' << abstract_text << "\thttps://example.invalid/N" << (a + 1)
          << "\t[]\t[]\n";
    }
  }

  auto next_article = [&](std::size_t last) {
    const auto& same = members[category_of[last]];
    if (rng.uniform() < spec.beta && same.size() >= 2) {
      std::size_t pick = last;
      while (pick == last) pick = same[rng.uniform_index(same.size())];
      return pick;
    }
    std::size_t pick = last;
    while (pick == last) pick = rng.uniform_index(spec.n_articles);
    return pick;
  };

  {
    auto out = detail::open_output(out_dir / "behaviors.tsv");
    std::size_t impression = 0;
    for (std::size_t u = 0; u < spec.n_users; ++u) {
      std::string history;
      const std::size_t history_len = 3 + rng.uniform_index(4);
      for (std::size_t h = 0; h < history_len; ++h) {
        if (!history.empty()) history += ' ';
        history += 'N' + std::to_string(rng.uniform_index(spec.n_articles) + 1);
      }
      const std::size_t sessions = 4 + rng.uniform_index(5);
      for (std::size_t s = 0; s < sessions; ++s) {
        // Sessions start on separate days, far beyond the transition window.
        std::int64_t t = kBaseTime + static_cast<std::int64_t>(s) * kDay +
                         static_cast<std::int64_t>(rng.uniform_index(12 * 3600));
        const std::size_t clicks = 3 + rng.uniform_index(5);
        std::size_t current = rng.uniform_index(spec.n_articles);
        for (std::size_t k = 0; k < clicks; ++k) {
          if (k > 0) {
            current = next_article(current);
            t += 30 + static_cast<std::int64_t>(rng.uniform_index(870));
          }
          std::string tokens;
          const std::size_t shown = 2 + rng.uniform_index(3);
          const std::size_t slot = rng.uniform_index(shown + 1);
          for (std::size_t z = 0; z <= shown; ++z) {
            if (!tokens.empty()) tokens += ' ';
            if (z == slot) {
              tokens += 'N' + std::to_string(current + 1) + "-1";
            } else {
              tokens += 'N' + std::to_string(rng.uniform_index(spec.n_articles) + 1) + "-0";
            }
          }
          out << ++impression << "\tU" << (u + 1) << '\t' << format_mind_timestamp(t) << '\t'
              << history << '\t' << tokens << '\n';
          ++summary.clicks;
        }
      }
    }
    summary.impressions = impression;
  }

  if (spec.embedding_dim > 0) {
    // Category centroid plus noise, so external features carry the same
    // signal as the text.
    std::vector<std::vector<double>> centroids(n_categories);
    for (auto& c : centroids) {
      for (std::size_t k = 0; k < spec.embedding_dim; ++k) c.push_back(rng.normal(0.0, 1.0));
    }
    auto out = detail::open_output(out_dir / "embeddings.tsv");
    out << "#dim " << spec.embedding_dim << '\n';
    for (std::size_t a = 0; a < spec.n_articles; ++a) {
      out << 'N' << (a + 1) << '\t';
      for (std::size_t k = 0; k < spec.embedding_dim; ++k) {
        if (k) out << ' ';
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6f",
                      centroids[category_of[a]][k] + rng.normal(0.0, 0.5));
        out << buf;
      }
      out << '\n';
    }
  }
  return summary;
}

}  // namespace nextrec
