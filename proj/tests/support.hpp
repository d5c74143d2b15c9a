#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "nextrec/fixture.hpp"
#include "nextrec/ingest.hpp"
#include "nextrec/models.hpp"
#include "nextrec/numerics.hpp"
#include "nextrec/transitions.hpp"

namespace testing_support {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("nextrec_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(stamp) +
             "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string data_path(const std::string& name) {
  return std::string(NEXTREC_TEST_DATA) + "/" + name;
}

inline std::vector<std::vector<double>> to_dense(const nextrec::Matrix& m) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()),
                                       std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      out[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = m(r, c);
  return out;
}

inline nextrec::Matrix from_dense(const std::vector<std::vector<double>>& d) {
  nextrec::Matrix m(static_cast<Eigen::Index>(d.size()),
                    static_cast<Eigen::Index>(d.empty() ? 0 : d[0].size()));
  for (std::size_t r = 0; r < d.size(); ++r)
    for (std::size_t c = 0; c < d[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = d[r][c];
  return m;
}

inline nextrec::Matrix random_matrix(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols,
                                     double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  nextrec::Matrix m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = normal(gen);
  return m;
}

// Small random training problem: instances with i != j, targets 0/1,
// confidences in [1, 1.5] for positives, dense random content.
inline nextrec::TrainingProblem random_problem(std::mt19937_64& gen, std::size_t n_users,
                                               std::size_t n_articles, std::size_t n_instances,
                                               Eigen::Index m) {
  nextrec::TrainingProblem p;
  for (std::size_t u = 0; u < n_users; ++u) p.users.add("U" + std::to_string(u));
  for (std::size_t a = 0; a < n_articles; ++a) p.articles.add("N" + std::to_string(a));
  std::uniform_int_distribution<std::uint32_t> user(0, static_cast<std::uint32_t>(n_users - 1));
  std::uniform_int_distribution<std::uint32_t> article(0,
                                                       static_cast<std::uint32_t>(n_articles - 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (p.instances.size() < n_instances) {
    nextrec::TrainingInstance inst;
    inst.u = user(gen);
    inst.i = article(gen);
    inst.j = article(gen);
    if (inst.i == inst.j) continue;
    const bool positive = unit(gen) < 0.4;
    inst.target = positive ? 1.0 : 0.0;
    inst.weight = positive ? 1.0 + 0.1 * std::floor(unit(gen) * 6.0) : 1.0;
    p.instances.push_back(inst);
  }
  p.content = random_matrix(gen, static_cast<Eigen::Index>(n_articles), m).sparseView();
  return p;
}

// Generated fixture, parsed and turned into triplets.
struct FixtureData {
  nextrec::ArticleCatalog catalog;
  nextrec::Popularity popularity;
  nextrec::TripletSet triplets;
};

inline FixtureData load_fixture(const nextrec::FixtureSpec& spec, const std::filesystem::path& dir) {
  nextrec::generate_fixture(spec, dir);
  FixtureData data;
  data.catalog = nextrec::parse_news(dir / "news.tsv").catalog;
  auto behaviors = nextrec::parse_behaviors(dir / "behaviors.tsv");
  data.popularity = behaviors.log.total_popularity();
  const auto clicks = nextrec::validate_clicks(behaviors.log.streams, data.catalog);
  data.triplets = nextrec::build_triplets(nextrec::build_tensor(clicks.streams));
  return data;
}

}  // namespace testing_support
