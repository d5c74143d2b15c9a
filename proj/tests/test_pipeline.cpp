#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

#include "doctest.h"
#include "nextrec/config.hpp"
#include "nextrec/error.hpp"
#include "nextrec/eval.hpp"
#include "nextrec/fixture.hpp"
#include "nextrec/pipeline.hpp"
#include "nextrec/random.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace nextrec;
using testing_support::TempDir;
using testing_support::write_text;

namespace {

// Fixture plus a config that keeps the models small.
std::string light_config(const std::filesystem::path& data, const std::filesystem::path& out) {
  return "[data]\nnews = \"" + (data / "news.tsv").string() + "\"\nbehaviors = \"" +
         (data / "behaviors.tsv").string() + "\"\nembeddings = \"" +
         (data / "embeddings.tsv").string() + "\"\n[run]\nout = \"" + out.string() +
         "\"\nseed = 5\n[model]\nd = 8\niterations = 4\nsgd_epochs = 4\n[eval]\nks = [10, 20]\n";
}

int run_cli(const std::string& args, const std::filesystem::path& capture) {
  const std::string command =
      std::string(NEXTREC_CLI) + " " + args + " > " + capture.string() + " 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config table parsing") {
  const auto t = ConfigTable::parse(
      "# comment\n"
      "top = 1\n"
      "[data]\n"
      "news = \"a b.tsv\"   # trailing comment\n"
      "[model]\n"
      "kinds = [\"almm\", \"oord\"]\n"
      "alpha = 0.5\n"
      "flag = true\n"
      "[eval]\n"
      "ks = [10, 20]\n");
  CHECK(t.get_int("top", 0) == 1);
  CHECK(t.get_string("data.news", "") == "a b.tsv");
  CHECK(t.get_list("model.kinds", {}) == std::vector<std::string>{"almm", "oord"});
  CHECK(t.get_double("model.alpha", 0.0) == 0.5);
  CHECK(t.get_bool("model.flag", false));
  CHECK(t.get_list("eval.ks", {}) == std::vector<std::string>{"10", "20"});
  CHECK(t.get_int("missing.key", 7) == 7);
  CHECK_FALSE(t.has("data.behaviors"));

  CHECK_THROWS_AS(ConfigTable::parse("a = 1\na = 2\n"), FormatError);
  CHECK_THROWS_AS(ConfigTable::parse("just words\n"), FormatError);
  CHECK_THROWS_AS(ConfigTable::parse("x = \"open\n"), FormatError);
  CHECK_THROWS_AS(ConfigTable::parse("x = abc\n").get_int("x", 0), FormatError);
}

TEST_CASE("run config defaults, overrides and path resolution") {
  const auto defaults = RunConfig::from_table(ConfigTable::parse(""), "/base");
  CHECK(defaults.seed == 42);
  CHECK(defaults.hyper.seed == 42);
  CHECK(defaults.window_seconds == 1800);
  CHECK(defaults.ks == std::vector<std::size_t>{10, 20, 50, 100});
  CHECK(defaults.news == std::filesystem::path("/base/news.tsv"));
  CHECK(defaults.models.size() == 3);

  const auto c = RunConfig::from_table(
      ConfigTable::parse("[data]\nnews = \"/abs/n.tsv\"\nbehaviors = \"rel/b.tsv\"\n"
                         "[run]\nseed = 9\n[split]\nkinds = [\"cold\"]\n"
                         "[model]\nkinds = [\"forbes\"]\nd = 4\nalpha = 0.25\n[eval]\nks = [5]\n"),
      "/base");
  CHECK(c.news == std::filesystem::path("/abs/n.tsv"));
  CHECK(c.behaviors == std::filesystem::path("/base/rel/b.tsv"));
  CHECK(c.hyper.seed == 9);
  CHECK(c.hyper.d == 4);
  CHECK(c.hyper.alpha == 0.25);
  CHECK(c.splits == std::vector<SplitKind>{SplitKind::cold});
  CHECK(c.models == std::vector<ModelKind>{ModelKind::forbes});

  auto parse = [](const std::string& text) {
    return RunConfig::from_table(ConfigTable::parse(text), ".");
  };
  CHECK_THROWS_AS(parse("[model]\nalpha = 2\n"), ParameterError);
  CHECK_THROWS_AS(parse("[eval]\nks = [0]\n"), ParameterError);
  CHECK_THROWS_AS(parse("[model]\nkinds = [\"svd\"]\n"), ParameterError);
  CHECK_THROWS_AS(parse("[features]\nkind = \"external\"\n"), ParameterError);
}

TEST_CASE("check_inputs names the missing file") {
  auto c = RunConfig::from_table(ConfigTable::parse(""), "/definitely/not/here");
  try {
    c.check_inputs();
    FAIL("expected an error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("/definitely/not/here/news.tsv") != std::string::npos);
  }
}

TEST_CASE("fixture files parse cleanly") {
  TempDir dir("fixture");
  const auto summary = generate_fixture({}, dir.path());
  CHECK(summary.articles == 200);
  const auto news = parse_news(dir / "news.tsv");
  const auto behaviors = parse_behaviors(dir / "behaviors.tsv");
  CHECK(news.catalog.size() == 200);
  CHECK(news.report.rows_skipped_malformed == 0);
  CHECK(behaviors.report.rows_skipped_malformed == 0);
  CHECK(behaviors.report.tokens_skipped_malformed == 0);
  CHECK(behaviors.log.streams.size() == 50);
  std::size_t clicks = 0;
  for (const auto& s : behaviors.log.streams) clicks += s.events.size();
  CHECK(clicks == summary.clicks);
  CHECK(load_external_embeddings(dir / "embeddings.tsv", news.catalog).dim() == 16);
  CHECK_THROWS_AS(generate_fixture({1, 10, 0.5, 1, 0}, dir / "bad"), ParameterError);
}

TEST_CASE("fixture with beta = 1 keeps every transition within a category") {
  TempDir dir("fixture");
  const auto data = testing_support::load_fixture({30, 120, 1.0, 3, 0}, dir.path());
  REQUIRE(data.triplets.size() > 0);
  for (const auto& t : data.triplets.triplets) {
    CHECK(data.catalog.at(t.last).category == data.catalog.at(t.next).category);
  }
}

TEST_CASE("fixture with beta = 0: next category looks independent of the last") {
  TempDir dir("fixture");
  const auto data = testing_support::load_fixture({300, 400, 0.0, 11, 0}, dir.path());
  std::map<std::string, std::map<std::string, double>> table;
  std::map<std::string, double> rows, cols;
  double n = 0;
  for (const auto& t : data.triplets.triplets) {
    const auto& a = data.catalog.at(t.last).category;
    const auto& b = data.catalog.at(t.next).category;
    table[a][b] += 1;
    rows[a] += 1;
    cols[b] += 1;
    n += 1;
  }
  double chi2 = 0;
  for (const auto& [a, ra] : rows) {
    for (const auto& [b, cb] : cols) {
      const double expected = ra * cb / n;
      const double observed = table[a][b];
      chi2 += (observed - expected) * (observed - expected) / expected;
    }
  }
  // 8 categories: 49 degrees of freedom, 99.9% quantile about 85.4
  MESSAGE("chi-square over " << n << " transitions: " << chi2);
  WARN(chi2 < 85.4);
}

TEST_CASE("fixture files are frozen for the default spec") {
  TempDir dir("fixture");
  generate_fixture({}, dir.path());
  const auto expected = oracle::read_expected(testing_support::data_path("fixture_7.expected"));
  for (const char* name : {"news.tsv", "behaviors.tsv", "embeddings.tsv"}) {
    CAPTURE(name);
    CHECK(std::to_string(fnv1a64(oracle::read_file((dir / name).string()))) ==
          expected.at(std::string("fnv.") + name));
  }
}

TEST_CASE("pipeline: deterministic metrics and stage-wise rerun equivalence") {
  TempDir dir("pipeline");
  generate_fixture({}, dir / "data");
  write_text(dir / "a.toml", light_config(dir / "data", dir / "run_a"));
  write_text(dir / "b.toml", light_config(dir / "data", dir / "run_b"));
  write_text(dir / "c.toml", light_config(dir / "data", dir / "run_c"));

  const auto a = RunConfig::load(dir / "a.toml");
  run_pipeline(a);
  run_pipeline(RunConfig::load(dir / "b.toml"));
  const auto metrics_a = oracle::read_file((dir / "run_a" / "metrics.csv").string());
  CHECK(metrics_a == oracle::read_file((dir / "run_b" / "metrics.csv").string()));

  const auto c = RunConfig::load(dir / "c.toml");
  stage_ingest(c);
  stage_triplets(c);
  stage_split(c);
  stage_featurize(c);
  stage_train(c);
  stage_evaluate(c);
  CHECK(metrics_a == oracle::read_file((dir / "run_c" / "metrics.csv").string()));

  // 3 models x 2 splits x 2 ks x 4 metrics
  CHECK(std::count(metrics_a.begin(), metrics_a.end(), '\n') == 1 + 48);
  for (const auto& [key, m] : read_curves(dir / "run_a" / "metrics.csv").values) {
    CHECK(std::isfinite(m.map));
    CHECK(std::isfinite(m.novelty));
    CHECK(m.recall >= 0.0);
    CHECK(m.recall <= 1.0);
  }
  const auto log = oracle::read_file((dir / "run_a" / "run_log.txt").string());
  CHECK(log.find("triplets.triplets=") != std::string::npos);
  CHECK(log.find("cold.almm_beats_forbes_recall@10=") != std::string::npos);
  for (const char* f : {"catalog.tsv", "clicks.tsv", "popularity.tsv", "triplets.tsv", "tfidf.tsv",
                        "vocabulary.tsv", "summary.txt", "splits/cold/manifest.json",
                        "models/warm/oord/PsiY.mat"}) {
    CAPTURE(f);
    CHECK(std::filesystem::exists(dir / "run_a" / f));
  }
  CHECK(stage_report(a).find("Train (CS)") != std::string::npos);

  // a different seed gives a different run
  write_text(dir / "d.toml", light_config(dir / "data", dir / "run_d") + "[split]\n");
  auto d = RunConfig::load(dir / "d.toml");
  d.seed = 6;
  d.hyper.seed = 6;
  run_pipeline(d);
  CHECK(metrics_a != oracle::read_file((dir / "run_d" / "metrics.csv").string()));
}

TEST_CASE("command line") {
  TempDir dir("cli");
  const auto capture = dir / "out.txt";
  REQUIRE(run_cli("fixture --users 20 --articles 60 --dir " + (dir / "data").string(), capture) == 0);
  CHECK(oracle::read_file(capture.string()).find("articles=60") != std::string::npos);

  write_text(dir / "cfg.toml",
             "[data]\nnews = \"data/news.tsv\"\nbehaviors = \"data/behaviors.tsv\"\n"
             "embeddings = \"data/embeddings.tsv\"\n[run]\nout = \"out\"\n"
             "[model]\nd = 4\niterations = 2\nsgd_epochs = 2\n[eval]\nks = [5, 10]\n");
  const auto cfg = (dir / "cfg.toml").string();
  CHECK(run_cli("--config " + cfg + " --model almm run", capture) == 0);
  CHECK(oracle::read_file(capture.string()).find("Cold-start") != std::string::npos);
  CHECK(run_cli("--config " + cfg + " --model almm report", capture) == 0);
  CHECK(run_cli("--config " + cfg + " --model almm --features external train evaluate", capture) ==
        1);  // embeddings.tsv has not been featurized into the run directory yet
  CHECK(run_cli("--config " + cfg + " --model almm --features external featurize train evaluate",
                capture) == 0);
  CHECK(oracle::read_file((dir / "out" / "metrics.csv").string()).find("almm-external") !=
        std::string::npos);

  write_text(dir / "missing.toml", "[data]\nnews = \"nowhere/news.tsv\"\n");
  CHECK(run_cli("--config " + (dir / "missing.toml").string() + " run", capture) == 1);
  const auto message = oracle::read_file(capture.string());
  CHECK(message.find("error:") != std::string::npos);
  CHECK(message.find("nowhere/news.tsv") != std::string::npos);

  CHECK(run_cli("--model svd run", capture) != 0);
}
