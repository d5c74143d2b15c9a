#pragma once

// Run configuration, read from a small TOML subset:
//
//   # comment
//   [section]
//   key = "string" | 123 | 0.5 | true | [1, 2, "three"]
//
// Keys are addressed as "section.key".

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nextrec/features.hpp"
#include "nextrec/models.hpp"
#include "nextrec/splits.hpp"

namespace nextrec {

class ConfigTable {
 public:
  static ConfigTable parse(const std::string& text, const std::string& origin = "<config>");
  static ConfigTable load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key,
                                    const std::vector<std::string>& fallback) const;
  std::vector<std::string> keys() const;

 private:
  struct Value {
    std::vector<std::string> items;  // one item for scalars
    bool array = false;
  };
  const Value* find(const std::string& key) const;

  std::string origin_;
  std::map<std::string, Value> values_;
};

struct RunConfig {
  std::filesystem::path news;
  std::filesystem::path behaviors;
  std::optional<std::filesystem::path> embeddings;
  std::filesystem::path out = "run";

  std::int64_t window_seconds = kDefaultWindowSeconds;

  std::vector<SplitKind> splits{SplitKind::warm, SplitKind::cold};
  double cold_holdout_fraction = 0.1;
  double warm_test_fraction = 0.2;

  FeatureKind features = FeatureKind::tfidf;
  TokenizerConfig tokenizer;

  std::vector<ModelKind> models{ModelKind::almm, ModelKind::forbes, ModelKind::oord};
  Hyperparams hyper;

  std::vector<std::size_t> ks{10, 20, 50, 100};
  std::uint64_t seed = 42;

  // Relative data paths resolve against base_dir. Throws ParameterError or
  // FormatError on bad values.
  static RunConfig from_table(const ConfigTable& table, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& path);

  // Throws IoError naming the first input path that does not exist.
  void check_inputs() const;
};

}  // namespace nextrec
