// nextrec: next-article recommendation pipeline driver.

#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "nextrec/config.hpp"
#include "nextrec/error.hpp"
#include "nextrec/fixture.hpp"
#include "nextrec/pipeline.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string model;
  std::string features;
  std::string out;
};

nextrec::RunConfig resolve_config(const Overrides& o) {
  nextrec::RunConfig config;
  if (!o.config.empty()) {
    config = nextrec::RunConfig::load(o.config);
  } else {
    config = nextrec::RunConfig::from_table(nextrec::ConfigTable::parse(""), ".");
  }
  if (o.seed) {
    config.seed = *o.seed;
    config.hyper.seed = *o.seed;
  }
  if (!o.model.empty()) config.models = {nextrec::parse_model_kind(o.model)};
  if (!o.features.empty()) {
    config.features = nextrec::parse_feature_kind(o.features);
    if (config.features == nextrec::FeatureKind::external && !config.embeddings) {
      throw nextrec::ParameterError("--features external requires data.embeddings in the config");
    }
  }
  if (!o.out.empty()) config.out = o.out;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Next-article recommendation: triplets, ALMM/Forbes/Oord training, evaluation"};
  app.require_subcommand(1, 0);

  Overrides o;
  app.add_option("--config", o.config, "Run configuration (TOML subset)");
  app.add_option("--seed", o.seed, "Override the configured seed");
  app.add_option("--model", o.model, "Restrict to one model")
      ->check(CLI::IsMember({"almm", "forbes", "oord"}));
  app.add_option("--features", o.features, "Feature kind")
      ->check(CLI::IsMember({"tfidf", "external"}));
  app.add_option("--out", o.out, "Run directory");

  struct Stage {
    const char* name;
    const char* help;
    void (*run)(const nextrec::RunConfig&);
  };
  const Stage stages[] = {
      {"ingest", "Parse news/behaviors into catalog, clicks and popularity", nextrec::stage_ingest},
      {"triplets", "Build the transition tensor and weighted triplets", nextrec::stage_triplets},
      {"split", "Write warm/cold train-test splits", nextrec::stage_split},
      {"featurize", "Fit TF-IDF (and load external embeddings)", nextrec::stage_featurize},
      {"train", "Train the configured models on every split", nextrec::stage_train},
      {"evaluate", "Rank test triplets and write metrics.csv", nextrec::stage_evaluate},
      {"run", "Run every stage in order", nextrec::run_pipeline},
  };
  for (const auto& stage : stages) {
    app.add_subcommand(stage.name, stage.help)->fallthrough();
  }
  app.add_subcommand("report", "Print split statistics and the results table")->fallthrough();

  nextrec::FixtureSpec spec;
  std::string fixture_out = "fixture";
  auto* fixture = app.add_subcommand("fixture", "Generate synthetic MIND-format data");
  fixture->add_option("--users", spec.n_users, "Number of users")->capture_default_str();
  fixture->add_option("--articles", spec.n_articles, "Number of articles")->capture_default_str();
  fixture->add_option("--beta", spec.beta, "Probability of a same-category next click")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  fixture->add_option("--fixture-seed", spec.seed, "Fixture seed")->capture_default_str();
  fixture->add_option("--embedding-dim", spec.embedding_dim, "Dimension of embeddings.tsv (0: none)")
      ->capture_default_str();
  fixture->add_option("--dir", fixture_out, "Output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (fixture->parsed()) {
      if (o.seed) spec.seed = *o.seed;
      const auto summary = nextrec::generate_fixture(spec, fixture_out);
      std::cout << "articles=" << summary.articles << "\ncategories=" << summary.categories
                << "\nimpressions=" << summary.impressions << "\nclicks=" << summary.clicks << '\n';
      return 0;
    }
    const auto config = resolve_config(o);
    if (app.got_subcommand("report")) {
      std::cout << nextrec::stage_report(config);
      return 0;
    }
    for (const auto& stage : stages) {
      if (app.got_subcommand(stage.name)) stage.run(config);
    }
    if (app.got_subcommand("evaluate") || app.got_subcommand("run")) {
      std::cout << nextrec::stage_report(config);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
