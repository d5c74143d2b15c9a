#pragma once

// End-to-end orchestration. Every stage reads the previous stage's files
// from the run directory, so stages can be rerun independently:
//
//   ingest     -> catalog.tsv, clicks.tsv, popularity.tsv
//   triplets   -> triplets.tsv
//   split      -> splits/<kind>/{train.tsv,test.tsv,manifest.json}
//   featurize  -> tfidf.tsv, vocabulary.tsv [, embeddings.tsv]
//   train      -> models/<kind>/<model>/...
//   evaluate   -> metrics.csv, summary.txt
//
// Counters go to run_log.txt, one "stage.key=value" per line.

#include <string>

#include "nextrec/config.hpp"

namespace nextrec {

void stage_ingest(const RunConfig& config);
void stage_triplets(const RunConfig& config);
void stage_split(const RunConfig& config);
void stage_featurize(const RunConfig& config);
void stage_train(const RunConfig& config);
void stage_evaluate(const RunConfig& config);

// Clears run_log.txt and runs every stage in order.
void run_pipeline(const RunConfig& config);

// Summary table from metrics.csv plus split statistics.
std::string stage_report(const RunConfig& config);

// Label used in metrics.csv: the model name, suffixed with "-external" when
// trained on external embeddings.
std::string model_label(ModelKind kind, FeatureKind features);

}  // namespace nextrec
