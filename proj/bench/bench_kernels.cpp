// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include "nextrec/als.hpp"
#include "nextrec/eval.hpp"
#include "nextrec/random.hpp"

namespace {

using namespace nextrec;

struct AlsCase {
  std::vector<TrainingInstance> instances;
  AlsLayout layout;
  Matrix user, last, next;
};

AlsCase make_als_case(std::size_t users, std::size_t articles, std::size_t per_user,
                      std::size_t d) {
  Rng rng(1);
  AlsCase c;
  for (std::size_t u = 0; u < users; ++u) {
    for (std::size_t k = 0; k < per_user; ++k) {
      const auto i = static_cast<std::uint32_t>(rng.uniform_index(articles));
      auto j = static_cast<std::uint32_t>(rng.uniform_index(articles));
      if (j == i) j = (j + 1) % articles;
      c.instances.push_back({static_cast<std::uint32_t>(u), i, j, k % 5 == 0 ? 1.0 : 0.0,
                             k % 5 == 0 ? 1.3 : 1.0});
    }
  }
  c.layout = AlsLayout::build(c.instances, users, articles);
  auto fill = [&](std::size_t rows) {
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.normal(0.0, 0.1);
    return m;
  };
  c.user = fill(users);
  c.last = fill(articles);
  c.next = fill(articles);
  return c;
}

template <bool Parallel>
void BM_AlsHalfSweep(benchmark::State& state) {
  auto c = make_als_case(2000, 1500, 40, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    AlsFactors f{c.user, c.last, c.next};
    if constexpr (Parallel) {
      als_half_sweep(FactorRole::user, c.instances, c.layout, f, 0.1);
    } else {
      als_half_sweep_reference(FactorRole::user, c.instances, c.layout, f, 0.1);
    }
    benchmark::DoNotOptimize(c.user.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * c.instances.size()));
}
BENCHMARK(BM_AlsHalfSweep<true>)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AlsHalfSweep<false>)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

struct EvalCase {
  FactorModel model;
  DataSplit split;
  FeatureMatrix features;
  Popularity popularity;
};

EvalCase make_eval_case(std::size_t articles, std::size_t queries) {
  Rng rng(2);
  EvalCase c;
  const std::size_t d = 16, m = 64;
  std::vector<Triplet> train, test;
  for (std::size_t a = 0; a + 1 < articles; ++a) {
    train.push_back({"u" + std::to_string(a % 50), "n" + std::to_string(a),
                     "n" + std::to_string(a + 1), 1.1});
  }
  for (std::size_t q = 0; q < queries; ++q) {
    const auto i = rng.uniform_index(articles);
    const auto j = (i + 1 + rng.uniform_index(articles - 1)) % articles;
    test.push_back({"u" + std::to_string(q % 60), "n" + std::to_string(i), "n" + std::to_string(j), 1.1});
  }
  c.split.train = TripletSet::from_triplets(train);
  c.split.test = TripletSet::from_triplets(test);
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t a = 0; a < articles; ++a) {
    c.features.rows.add("n" + std::to_string(a));
    for (int t = 0; t < 5; ++t) {
      entries.emplace_back(static_cast<int>(a), static_cast<int>(rng.uniform_index(m)), 0.4);
    }
    c.popularity["n" + std::to_string(a)] = 1 + rng.uniform_index(100);
  }
  c.features.values.resize(static_cast<Eigen::Index>(articles), static_cast<Eigen::Index>(m));
  c.features.values.setFromTriplets(entries.begin(), entries.end());
  c.features.values.prune(0.0);
  c.model.hyper.d = d;
  c.model.users = c.split.train.users;
  c.model.articles = c.split.train.articles;
  auto fill = [&](std::size_t rows) {
    Matrix mat(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
    for (Eigen::Index k = 0; k < mat.size(); ++k) mat.data()[k] = rng.normal(0.0, 0.3);
    return mat;
  };
  c.model.user_factors = fill(c.model.users.size());
  c.model.last_factors = fill(c.model.articles.size());
  c.model.next_factors = fill(c.model.articles.size());
  c.model.psi_x = fill(m);
  c.model.psi_y = fill(m);
  return c;
}

template <bool Parallel>
void BM_Evaluate(benchmark::State& state) {
  const auto c = make_eval_case(static_cast<std::size_t>(state.range(0)), 200);
  const EvaluationInput input{c.model, c.split, c.features, c.features, c.popularity, {10, 20, 50}};
  for (auto _ : state) {
    auto metrics = Parallel ? evaluate(input) : evaluate_reference(input);
    benchmark::DoNotOptimize(metrics.data());
  }
}
BENCHMARK(BM_Evaluate<true>)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Evaluate<false>)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
