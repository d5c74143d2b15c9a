#include "nextrec/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "nextrec/error.hpp"
#include "nextrec/eval.hpp"
#include "nextrec/ingest.hpp"
#include "nextrec/random.hpp"
#include "nextrec/transitions.hpp"
#include "text_io.hpp"

namespace nextrec {

namespace fs = std::filesystem;

namespace {

class RunLog {
 public:
  RunLog(const RunConfig& config, std::string stage) : stage_(std::move(stage)) {
    fs::create_directories(config.out);
    out_.open(config.out / "run_log.txt", std::ios::app);
    if (!out_) throw IoError("cannot open run log in " + config.out.string());
  }

  template <typename T>
  void counter(const std::string& key, const T& value) {
    out_ << stage_ << '.' << key << '=' << value << '\n';
  }
  void counter(const std::string& key, double value) {
    out_ << stage_ << '.' << key << '=' << detail::format_double(value) << '\n';
  }

 private:
  std::string stage_;
  std::ofstream out_;
};

void log_report(RunLog& log, const std::string& prefix, const ValidationReport& r) {
  log.counter(prefix + ".rows_read", r.rows_read);
  log.counter(prefix + ".rows_kept", r.rows_kept);
  log.counter(prefix + ".rows_skipped_malformed", r.rows_skipped_malformed);
  log.counter(prefix + ".duplicates_dropped", r.duplicates_dropped);
  log.counter(prefix + ".tokens_skipped_malformed", r.tokens_skipped_malformed);
  log.counter(prefix + ".clicks_dropped_unknown_article", r.clicks_dropped_unknown_article);
}

fs::path split_dir(const RunConfig& c, SplitKind kind) {
  return c.out / "splits" / std::string(to_string(kind));
}

fs::path model_dir(const RunConfig& c, SplitKind split, ModelKind model) {
  return c.out / "models" / std::string(to_string(split)) / model_label(model, c.features);
}

FeatureMatrix model_features(const RunConfig& c) {
  return read_features(c.out / (c.features == FeatureKind::tfidf ? "tfidf.tsv" : "embeddings.tsv"));
}

}  // namespace

std::string model_label(ModelKind kind, FeatureKind features) {
  std::string label(to_string(kind));
  if (features == FeatureKind::external) label += "-external";
  return label;
}

void stage_ingest(const RunConfig& config) {
  config.check_inputs();
  RunLog log(config, "ingest");
  auto news = parse_news(config.news);
  auto behaviors = parse_behaviors(config.behaviors);
  auto validated = validate_clicks(behaviors.log.streams, news.catalog);
  if (news.catalog.empty()) throw EmptyInputError("no valid articles in " + config.news.string());

  write_catalog(news.catalog, config.out / "catalog.tsv");
  write_clicks(validated.streams, config.out / "clicks.tsv");
  write_popularity(behaviors.log.total_popularity(), config.out / "popularity.tsv");

  log_report(log, "news", news.report);
  log_report(log, "behaviors", behaviors.report);
  log.counter("clicks_dropped_unknown_article", validated.report.clicks_dropped_unknown_article);
  std::size_t clicks = 0;
  for (const auto& s : validated.streams) clicks += s.events.size();
  log.counter("articles", news.catalog.size());
  log.counter("users", validated.streams.size());
  log.counter("clicks", clicks);
}

void stage_triplets(const RunConfig& config) {
  RunLog log(config, "triplets");
  const auto streams = read_clicks(config.out / "clicks.tsv");
  const auto tensor = build_tensor(streams, config.window_seconds);
  const auto triplets = build_triplets(tensor);
  write_triplets(triplets, config.out / "triplets.tsv");

  std::size_t sessions = 0;
  for (const auto& s : streams) sessions += transition_sessions(s, config.window_seconds).size();
  log.counter("window_seconds", config.window_seconds);
  log.counter("sessions", sessions);
  log.counter("transitions", tensor.total());
  log.counter("triplets", triplets.size());
  log.counter("users", triplets.users.size());
  log.counter("articles", triplets.articles.size());
}

void stage_split(const RunConfig& config) {
  RunLog log(config, "split");
  const auto triplets = read_triplets(config.out / "triplets.tsv");
  const auto seed = stage_seed(config.seed, "split");
  for (SplitKind kind : config.splits) {
    const auto split = kind == SplitKind::cold
                           ? make_cold_split(triplets, config.cold_holdout_fraction, seed)
                           : make_warm_split(triplets, config.warm_test_fraction, seed);
    save_split(split, split_dir(config, kind));
    const auto stats = split_stats(split);
    const std::string k(to_string(kind));
    log.counter(k + ".train.users", stats.train.n_users);
    log.counter(k + ".train.items", stats.train.n_items);
    log.counter(k + ".train.entries", stats.train.n_entries);
    log.counter(k + ".test.users", stats.test.n_users);
    log.counter(k + ".test.items", stats.test.n_items);
    log.counter(k + ".test.entries", stats.test.n_entries);
    log.counter(k + ".holdout_articles", split.holdout_articles.size());
  }
}

void stage_featurize(const RunConfig& config) {
  RunLog log(config, "featurize");
  const auto catalog = parse_news(config.out / "catalog.tsv").catalog;
  const auto vectorizer = fit_tfidf(catalog, config.tokenizer);
  const auto tfidf = transform(vectorizer, catalog);
  write_features(tfidf, config.out / "tfidf.tsv");
  write_vocabulary(vectorizer, config.out / "vocabulary.tsv");
  log.counter("tfidf.dim", tfidf.dim());
  log.counter("tfidf.nonzeros", static_cast<std::size_t>(tfidf.values.nonZeros()));
  if (config.features == FeatureKind::external) {
    const auto external = load_external_embeddings(*config.embeddings, catalog);
    write_features(external, config.out / "embeddings.tsv");
    log.counter("external.dim", external.dim());
  }
}

void stage_train(const RunConfig& config) {
  RunLog log(config, "train");
  const auto features = model_features(config);
  for (SplitKind split_kind : config.splits) {
    const auto split = load_split(split_dir(config, split_kind));
    const auto problem = make_problem(split.train, features, config.hyper);
    const std::string s(to_string(split_kind));
    log.counter(s + ".instances", problem.instances.size());
    for (ModelKind kind : config.models) {
      TrainingTrace trace;
      const auto started = std::chrono::steady_clock::now();
      const auto model = train(kind, problem, config.hyper, &trace);
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      save_model(model, model_dir(config, split_kind, kind));
      const std::string prefix = s + "." + model_label(kind, config.features);
      log.counter(prefix + ".objective_initial", trace.objective.front());
      log.counter(prefix + ".objective_final", objective(model, problem.content, problem.instances));
      // wall time is informative only; it never feeds metrics
      log.counter(prefix + ".seconds", seconds);
    }
  }
}

void stage_evaluate(const RunConfig& config) {
  RunLog log(config, "evaluate");
  const auto features = model_features(config);
  const auto tfidf = read_features(config.out / "tfidf.tsv");
  const auto popularity = read_popularity(config.out / "popularity.tsv");
  MetricReport report;
  for (SplitKind split_kind : config.splits) {
    const auto split = load_split(split_dir(config, split_kind));
    const auto train_popularity = train_side_popularity(popularity, split);
    const std::string s(to_string(split_kind));
    const auto candidates = candidate_universe(split).size() - 1;
    log.counter(s + ".queries", split.test.size());
    log.counter(s + ".candidates", candidates);
    for (std::size_t k : config.ks) {
      log.counter(s + ".random_recall@" + std::to_string(k),
                  std::min(1.0, static_cast<double>(k) / static_cast<double>(candidates)));
    }
    for (ModelKind kind : config.models) {
      const auto model = load_model(model_dir(config, split_kind, kind));
      const auto label = model_label(kind, config.features);
      const auto metrics = evaluate(
          EvaluationInput{model, split, features, tfidf, train_popularity, config.ks});
      report.add(label, s, config.ks, metrics);
      for (std::size_t n = 0; n < config.ks.size(); ++n) {
        const std::string key = s + "." + label + "@" + std::to_string(config.ks[n]);
        log.counter(key + ".map", metrics[n].map);
        log.counter(key + ".recall", metrics[n].recall);
      }
    }
  }
  // Cold-start ordering of ALMM against the baselines, for inspection.
  const auto first_k = config.ks.front();
  const auto almm = report.values.find(
      MetricKey{model_label(ModelKind::almm, config.features), "cold", first_k});
  if (almm != report.values.end()) {
    for (ModelKind other : {ModelKind::forbes, ModelKind::oord}) {
      auto it = report.values.find(MetricKey{model_label(other, config.features), "cold", first_k});
      if (it == report.values.end()) continue;
      log.counter("cold.almm_beats_" + std::string(to_string(other)) + "_recall@" +
                      std::to_string(first_k),
                  almm->second.recall > it->second.recall ? "yes" : "no");
    }
  }
  emit_curves(report, config.out / "metrics.csv");
  auto out = detail::open_output(config.out / "summary.txt");
  out << format_summary(report);
}

void run_pipeline(const RunConfig& config) {
  config.check_inputs();
  fs::create_directories(config.out);
  fs::remove(config.out / "run_log.txt");
  stage_ingest(config);
  stage_triplets(config);
  stage_split(config);
  stage_featurize(config);
  stage_train(config);
  stage_evaluate(config);
}

std::string stage_report(const RunConfig& config) {
  std::ostringstream out;
  out << "Split statistics\n";
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-12s %8s %8s %9s\n", "Data set", "#users", "#items", "#entries");
  out << buf;
  for (SplitKind kind : config.splits) {
    const auto dir = split_dir(config, kind);
    if (!fs::exists(dir / "manifest.json")) continue;
    const auto stats = split_stats(load_split(dir));
    const std::string tag = kind == SplitKind::warm ? "WS" : "CS";
    std::snprintf(buf, sizeof(buf), "%-12s %8zu %8zu %9zu\n", ("Train (" + tag + ")").c_str(),
                  stats.train.n_users, stats.train.n_items, stats.train.n_entries);
    out << buf;
    std::snprintf(buf, sizeof(buf), "%-12s %8zu %8zu %9zu\n", ("Test (" + tag + ")").c_str(),
                  stats.test.n_users, stats.test.n_items, stats.test.n_entries);
    out << buf;
  }
  out << '\n' << format_summary(read_curves(config.out / "metrics.csv"));
  return out.str();
}

}  // namespace nextrec
