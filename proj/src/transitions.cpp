#include "nextrec/transitions.hpp"

#include "nextrec/error.hpp"
#include "text_io.hpp"

namespace nextrec {

std::uint64_t TransitionTensor::total() const {
  std::uint64_t sum = 0;
  for (const auto& [key, count] : entries) sum += count;
  return sum;
}

std::size_t IndexMap::add(const std::string& id) {
  auto [it, inserted] = index_.emplace(id, ids_.size());
  if (inserted) ids_.push_back(id);
  return it->second;
}

std::size_t IndexMap::at(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw InputError("unknown id: " + id);
  return it->second;
}

std::size_t IndexMap::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? ids_.size() : it->second;
}

TripletSet TripletSet::from_triplets(std::vector<Triplet> triplets) {
  TripletSet set;
  for (const auto& t : triplets) {
    set.users.add(t.user);
    set.articles.add(t.last);
    set.articles.add(t.next);
  }
  set.triplets = std::move(triplets);
  return set;
}

TransitionTensor build_tensor(const std::vector<ClickStream>& streams,
                              std::int64_t window_seconds) {
  if (window_seconds <= 0) throw ParameterError("window_seconds must be positive");
  TransitionTensor tensor;
  tensor.window_seconds = window_seconds;
  for (const auto& stream : streams) {
    const auto& events = stream.events;
    for (std::size_t t = 1; t < events.size(); ++t) {
      const auto& prev = events[t - 1];
      const auto& curr = events[t];
      if (curr.timestamp - prev.timestamp > window_seconds) continue;
      if (prev.news == curr.news) continue;
      ++tensor.entries[TransitionKey{stream.user, prev.news, curr.news}];
    }
  }
  return tensor;
}

TripletSet build_triplets(const TransitionTensor& tensor) {
  if (tensor.entries.empty()) throw EmptyInputError("transition tensor is empty");
  std::map<std::pair<std::string, std::string>, std::uint64_t> global;
  for (const auto& [key, count] : tensor.entries) global[{key.last, key.next}] += count;

  std::vector<Triplet> triplets;
  triplets.reserve(tensor.entries.size());
  for (const auto& [key, count] : tensor.entries) {
    const auto k = global.at({key.last, key.next});
    triplets.push_back(Triplet{key.user, key.last, key.next,
                               kBaseConfidence + kConfidenceStep * static_cast<double>(k)});
  }
  return TripletSet::from_triplets(std::move(triplets));
}

std::vector<Session> transition_sessions(const ClickStream& stream, std::int64_t window_seconds) {
  std::vector<Session> sessions;
  Session current;
  auto flush = [&] {
    if (current.size() >= 2) sessions.push_back(std::move(current));
    current.clear();
  };
  for (const auto& event : stream.events) {
    if (!current.empty() && event.timestamp - current.back().timestamp > window_seconds) flush();
    current.push_back(event);
  }
  flush();
  return sessions;
}

void write_triplets(const TripletSet& set, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  for (const auto& t : set.triplets) {
    out << t.user << '\t' << t.last << '\t' << t.next << '\t'
        << detail::format_double(t.confidence) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

TripletSet read_triplets(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::vector<Triplet> triplets;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto columns = detail::split(detail::strip_cr(line), '\t');
    Triplet t;
    if (columns.size() != 4 || !detail::parse_number(columns[3], t.confidence) ||
        columns[0].empty() || columns[1].empty() || columns[2].empty()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": malformed triplet row");
    }
    t.user = std::string(columns[0]);
    t.last = std::string(columns[1]);
    t.next = std::string(columns[2]);
    triplets.push_back(std::move(t));
  }
  return TripletSet::from_triplets(std::move(triplets));
}

}  // namespace nextrec
