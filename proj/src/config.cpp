#include "nextrec/config.hpp"

#include <fstream>
#include <sstream>

#include "nextrec/error.hpp"
#include "text_io.hpp"

namespace nextrec {

namespace {

std::string unquote(std::string_view token, const std::string& where) {
  token = detail::trim(token);
  if (token.size() >= 2 && token.front() == '"' && token.back() == '"') {
    return std::string(token.substr(1, token.size() - 2));
  }
  if (token.empty()) throw FormatError(where + ": empty value");
  if (token.find('"') != std::string_view::npos) throw FormatError(where + ": unbalanced quote");
  return std::string(token);
}

// Strips a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    if (line[k] == '"') quoted = !quoted;
    if (line[k] == '#' && !quoted) return line.substr(0, k);
  }
  return line;
}

}  // namespace

ConfigTable ConfigTable::parse(const std::string& text, const std::string& origin) {
  ConfigTable table;
  table.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = origin + ":" + std::to_string(line_no);
    const auto body = detail::trim(strip_comment(detail::strip_cr(line)));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']' || body.size() < 3) throw FormatError(where + ": bad section header");
      section = std::string(detail::trim(body.substr(1, body.size() - 2)));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw FormatError(where + ": expected key = value");
    const auto key = std::string(detail::trim(body.substr(0, eq)));
    const auto raw = detail::trim(body.substr(eq + 1));
    if (key.empty()) throw FormatError(where + ": empty key");
    Value value;
    if (!raw.empty() && raw.front() == '[') {
      if (raw.back() != ']') throw FormatError(where + ": unterminated array");
      value.array = true;
      const auto inner = detail::trim(raw.substr(1, raw.size() - 2));
      if (!inner.empty()) {
        for (auto item : detail::split(inner, ',')) {
          if (detail::trim(item).empty()) continue;  // trailing comma
          value.items.push_back(unquote(item, where));
        }
      }
    } else {
      value.items.push_back(unquote(raw, where));
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (!table.values_.emplace(full, std::move(value)).second) {
      throw FormatError(where + ": duplicate key " + full);
    }
  }
  return table;
}

ConfigTable ConfigTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

const ConfigTable::Value* ConfigTable::find(const std::string& key) const {
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

std::vector<std::string> ConfigTable::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

std::string ConfigTable::get_string(const std::string& key, const std::string& fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (v->array) throw FormatError(origin_ + ": " + key + " must be a scalar");
  return v->items.front();
}

double ConfigTable::get_double(const std::string& key, double fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  double out = 0.0;
  if (v->array || !detail::parse_number(v->items.front(), out)) {
    throw FormatError(origin_ + ": " + key + " must be a number");
  }
  return out;
}

std::int64_t ConfigTable::get_int(const std::string& key, std::int64_t fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  std::int64_t out = 0;
  if (v->array || !detail::parse_number(v->items.front(), out)) {
    throw FormatError(origin_ + ": " + key + " must be an integer");
  }
  return out;
}

bool ConfigTable::get_bool(const std::string& key, bool fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (!v->array && v->items.front() == "true") return true;
  if (!v->array && v->items.front() == "false") return false;
  throw FormatError(origin_ + ": " + key + " must be true or false");
}

std::vector<std::string> ConfigTable::get_list(const std::string& key,
                                               const std::vector<std::string>& fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  return v->items;
}

namespace {

std::size_t non_negative(std::int64_t value, const std::string& key) {
  if (value < 0) throw ParameterError(key + " must be non-negative");
  return static_cast<std::size_t>(value);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  std::filesystem::path p(value);
  return p.is_absolute() ? p : base / p;
}

}  // namespace

RunConfig RunConfig::from_table(const ConfigTable& t, const std::filesystem::path& base_dir) {
  RunConfig c;
  c.news = resolve(base_dir, t.get_string("data.news", "news.tsv"));
  c.behaviors = resolve(base_dir, t.get_string("data.behaviors", "behaviors.tsv"));
  if (t.has("data.embeddings")) c.embeddings = resolve(base_dir, t.get_string("data.embeddings", ""));
  c.out = resolve(base_dir, t.get_string("run.out", "run"));
  c.seed = static_cast<std::uint64_t>(t.get_int("run.seed", 42));

  c.window_seconds = t.get_int("transitions.window_seconds", kDefaultWindowSeconds);
  if (c.window_seconds <= 0) throw ParameterError("transitions.window_seconds must be positive");

  c.splits.clear();
  for (const auto& s : t.get_list("split.kinds", {"warm", "cold"})) c.splits.push_back(parse_split_kind(s));
  c.cold_holdout_fraction = t.get_double("split.cold_holdout_fraction", 0.1);
  c.warm_test_fraction = t.get_double("split.warm_test_fraction", 0.2);

  c.features = parse_feature_kind(t.get_string("features.kind", "tfidf"));
  c.tokenizer.min_token_len = non_negative(t.get_int("features.min_token_len", 2), "min_token_len");
  c.tokenizer.max_vocab = non_negative(t.get_int("features.max_vocab", 5000), "max_vocab");
  c.tokenizer.remove_stopwords = t.get_bool("features.stopwords", true);
  if (c.features == FeatureKind::external && !c.embeddings) {
    throw ParameterError("features.kind = external requires data.embeddings");
  }

  c.models.clear();
  for (const auto& m : t.get_list("model.kinds", {"almm", "forbes", "oord"})) c.models.push_back(parse_model_kind(m));
  auto& h = c.hyper;
  h.d = non_negative(t.get_int("model.d", 32), "model.d");
  h.lambda_u = t.get_double("model.lambda_u", 0.1);
  h.lambda_x = t.get_double("model.lambda_x", 0.1);
  h.lambda_y = t.get_double("model.lambda_y", 0.1);
  h.lambda_psi = t.get_double("model.lambda_psi", 1.0);
  h.alpha = t.get_double("model.alpha", 1.0);
  h.negatives = non_negative(t.get_int("model.negatives", 4), "model.negatives");
  h.iterations = non_negative(t.get_int("model.iterations", 15), "model.iterations");
  h.sgd_lr = t.get_double("model.sgd_lr", 0.01);
  h.sgd_decay = t.get_double("model.sgd_decay", 0.9);
  h.sgd_epochs = non_negative(t.get_int("model.sgd_epochs", 30), "model.sgd_epochs");
  h.seed = c.seed;
  h.validate();

  c.ks.clear();
  for (const auto& k : t.get_list("eval.ks", {"10", "20", "50", "100"})) {
    std::size_t value = 0;
    if (!detail::parse_number(k, value) || value == 0) throw ParameterError("eval.ks entries must be positive integers");
    c.ks.push_back(value);
  }
  if (c.ks.empty()) throw ParameterError("eval.ks must not be empty");
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  return from_table(ConfigTable::load(path), path.parent_path());
}

void RunConfig::check_inputs() const {
  for (const auto* p : {&news, &behaviors}) {
    if (!std::filesystem::exists(*p)) throw IoError("input file not found: " + p->string());
  }
  if (embeddings && !std::filesystem::exists(*embeddings)) {
    throw IoError("input file not found: " + embeddings->string());
  }
}

}  // namespace nextrec
