#include <algorithm>
#include <stdexcept>

#include "i2plive/correlate.hpp"

namespace i2plive {

int CategoryThresholds::threshold(Category c) const {
  auto it = per_session.find(c);
  if (it == per_session.end()) throw std::invalid_argument(std::string("no threshold for category ") + to_string(c));
  return it->second;
}

std::size_t AnonymitySetReport::size() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const AnonymityEntry& e) { return e.included; }));
}

bool AnonymitySetReport::contains(const RouterIdentity& id) const {
  return std::any_of(entries.begin(), entries.end(),
                     [&](const AnonymityEntry& e) { return e.included && e.identity == id; });
}

AnonymitySetReport anonymity_set(const BehaviorSequence& target, int n_sessions,
                                 const std::vector<Candidate>& candidates, const CategoryThresholds& thresholds) {
  if (n_sessions < 1) throw std::invalid_argument("n_sessions must be at least 1");
  AnonymitySetReport report;
  report.entries.reserve(candidates.size());
  for (const auto& c : candidates) {
    std::int64_t limit = static_cast<std::int64_t>(n_sessions) * thresholds.threshold(c.category);
    auto d = dtw_distance_bounded(target.values, c.sequence.values, limit);
    report.entries.push_back({c.identity, c.category, d.distance, d.exceeded, !d.exceeded});
  }
  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [](const AnonymityEntry& a, const AnonymityEntry& b) {
                     if (a.distance != b.distance) return a.distance < b.distance;
                     return a.identity.id_bytes < b.identity.id_bytes;
                   });
  return report;
}

Distinguishability pairwise_distinguishability(
    const std::vector<std::pair<RouterIdentity, BehaviorSequence>>& sequences, int global_threshold) {
  if (sequences.size() < 2) throw std::invalid_argument("need at least two sequences");
  const std::size_t n = sequences.size();
  std::vector<std::vector<bool>> close(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      auto d = dtw_distance_bounded(sequences[i].second.values, sequences[j].second.values, global_threshold);
      close[i][j] = close[j][i] = !d.exceeded;
    }
  Distinguishability out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<RouterIdentity> set;
    for (std::size_t j = 0; j < n; ++j)
      if (close[i][j]) set.push_back(sequences[j].first);
    out.emplace_back(sequences[i].first, std::move(set));
  }
  return out;
}

}  // namespace i2plive
