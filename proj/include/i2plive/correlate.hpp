#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "i2plive/trace_model.hpp"

namespace i2plive {

enum class ProbeResult { LeaseSetMiss, LeaseSetStaleNoConnect, Connected };
const char* to_string(ProbeResult r);

struct ProbeOutcome {
  TimePoint time{};
  ProbeResult result = ProbeResult::LeaseSetMiss;
};

// Signed minute counters: 1,2,3,... while online and -1,-2,... while offline.
struct BehaviorSequence {
  std::vector<int> values;
  Duration resolution = std::chrono::minutes(1);
};

// Probes at a random phase in [0, probe_period) after the schedule epoch,
// then every probe_period until the schedule ends.
std::vector<ProbeOutcome> simulate_probe(const BehaviorSchedule& service_schedule, Duration probe_period,
                                         Duration leaseset_ttl = std::chrono::minutes(10),
                                         std::uint64_t seed = 0);
std::vector<ProbeOutcome> simulate_probe(const std::vector<OnlineSession>& sessions, TimePoint from,
                                         TimePoint to, Duration probe_period,
                                         Duration leaseset_ttl, std::uint64_t seed);

// Online intervals implied by the probes. A transition between two probes
// is placed at their midpoint; the first and last states extend to the
// horizon edges.
std::vector<OnlineSession> probe_to_sessions(const std::vector<ProbeOutcome>& outcomes,
                                             TimePoint horizon_start, TimePoint horizon_end);

// Horizon runs from the first probe to one resolution step past the last.
BehaviorSequence probe_to_behavior(const std::vector<ProbeOutcome>& outcomes,
                                   Duration resolution = std::chrono::minutes(1));

// A slot is online when its start lies inside a session.
BehaviorSequence serialize_behavior(const std::vector<OnlineSession>& sessions, TimePoint horizon_start,
                                    TimePoint horizon_end, Duration resolution = std::chrono::minutes(1));

// Element cost: 0 if equal, 1 if same sign, 2 otherwise.
inline int element_distance(int x, int y) {
  if (x == y) return 0;
  return (x > 0) == (y > 0) ? 1 : 2;
}

std::int64_t dtw_distance(const std::vector<int>& a, const std::vector<int>& b,
                          std::optional<std::size_t> band = std::nullopt);
std::int64_t dtw_distance(const BehaviorSequence& a, const BehaviorSequence& b,
                          std::optional<std::size_t> band = std::nullopt);

// Early-abandoning DTW. When `exceeded` is set the distance is only known
// to be above `limit` and `distance` holds a lower bound.
struct BoundedDistance {
  std::int64_t distance = 0;
  bool exceeded = false;
};
BoundedDistance dtw_distance_bounded(const std::vector<int>& a, const std::vector<int>& b,
                                     std::int64_t limit);

// Lower bound: every element of either sequence is matched at least once.
std::int64_t dtw_lower_bound(const std::vector<int>& a, const std::vector<int>& b);

struct CategoryThresholds {
  std::map<Category, int> per_session{{Category::JRFF, 10}, {Category::JRnFF, 18}, {Category::JU, 33},
                                      {Category::CR, 7},    {Category::CU, 3}};
  int global = 200;
  int threshold(Category c) const;
};

struct AnonymityEntry {
  RouterIdentity identity;
  Category category = Category::JRFF;
  std::int64_t distance = 0;
  bool bounded = false;  // distance is a lower bound above the threshold
  bool included = false;
};

struct AnonymitySetReport {
  std::vector<AnonymityEntry> entries;  // ascending distance, then identity
  std::size_t size() const;
  bool contains(const RouterIdentity& id) const;
};

struct Candidate {
  RouterIdentity identity;
  BehaviorSequence sequence;
  Category category = Category::JRFF;
};

AnonymitySetReport anonymity_set(const BehaviorSequence& target, int n_sessions,
                                 const std::vector<Candidate>& candidates,
                                 const CategoryThresholds& thresholds = {});

using Distinguishability = std::vector<std::pair<RouterIdentity, std::vector<RouterIdentity>>>;
Distinguishability pairwise_distinguishability(
    const std::vector<std::pair<RouterIdentity, BehaviorSequence>>& sequences, int global_threshold = 200);

}  // namespace i2plive
