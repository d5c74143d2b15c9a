#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "nextrec/ingest.hpp"

namespace nextrec {

inline constexpr std::int64_t kDefaultWindowSeconds = 1800;
inline constexpr double kBaseConfidence = 1.0;
inline constexpr double kConfidenceStep = 0.1;

struct TransitionKey {
  std::string user;
  std::string last;
  std::string next;

  friend auto operator<=>(const TransitionKey&, const TransitionKey&) = default;
};

// Sparse (user, last article, next article) -> count.
struct TransitionTensor {
  std::map<TransitionKey, std::uint64_t> entries;
  std::int64_t window_seconds = kDefaultWindowSeconds;

  std::uint64_t total() const;
};

struct Triplet {
  std::string user;
  std::string last;
  std::string next;
  double confidence = kBaseConfidence;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

// Bijection id <-> 0..n-1 in insertion order.
class IndexMap {
 public:
  std::size_t add(const std::string& id);  // existing index if present
  bool contains(const std::string& id) const { return index_.count(id) != 0; }
  std::size_t at(const std::string& id) const;
  // Returns size() when absent.
  std::size_t find(const std::string& id) const;
  const std::string& id(std::size_t index) const { return ids_[index]; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }

  friend bool operator==(const IndexMap& a, const IndexMap& b) { return a.ids_ == b.ids_; }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct TripletSet {
  std::vector<Triplet> triplets;
  IndexMap users;
  IndexMap articles;  // union of last and next positions

  static TripletSet from_triplets(std::vector<Triplet> triplets);
  bool empty() const { return triplets.empty(); }
  std::size_t size() const { return triplets.size(); }
};

using Session = std::vector<ClickEvent>;

// Counts consecutive pairs with gap <= window_seconds and distinct articles.
TransitionTensor build_tensor(const std::vector<ClickStream>& streams,
                              std::int64_t window_seconds = kDefaultWindowSeconds);

// One triplet per tensor key; confidence = 1 + 0.1 * sum over users of
// the (i, j) count. Throws EmptyInputError on an empty tensor.
TripletSet build_triplets(const TransitionTensor& tensor);

// Maximal runs with consecutive gaps <= window_seconds; runs shorter than two
// clicks are discarded.
std::vector<Session> transition_sessions(const ClickStream& stream,
                                         std::int64_t window_seconds = kDefaultWindowSeconds);

// user<TAB>i<TAB>j<TAB>confidence, one triplet per line.
void write_triplets(const TripletSet& set, const std::filesystem::path& path);
TripletSet read_triplets(const std::filesystem::path& path);

}  // namespace nextrec
