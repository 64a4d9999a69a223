#include <algorithm>
#include <stdexcept>

#include "i2plive/correlate.hpp"
#include "i2plive/random.hpp"

namespace i2plive {

const char* to_string(ProbeResult r) {
  switch (r) {
    case ProbeResult::LeaseSetMiss: return "LeaseSetMiss";
    case ProbeResult::LeaseSetStaleNoConnect: return "LeaseSetStaleNoConnect";
    case ProbeResult::Connected: return "Connected";
  }
  return "?";
}

std::vector<ProbeOutcome> simulate_probe(const std::vector<OnlineSession>& sessions, TimePoint from,
                                         TimePoint to, Duration probe_period, Duration leaseset_ttl,
                                         std::uint64_t seed) {
  if (probe_period <= Duration(0)) throw std::invalid_argument("probe period must be positive");
  Rng rng(derive_seed(seed, {0x70726f6265ULL}));
  Duration phase(uniform_int(rng, 0, probe_period.count() - 1));
  std::vector<ProbeOutcome> out;
  std::size_t k = 0;
  for (TimePoint t = from + phase; t < to; t += probe_period) {
    while (k < sessions.size() && sessions[k].end <= t) ++k;
    ProbeOutcome o{t, ProbeResult::LeaseSetMiss};
    if (k < sessions.size() && sessions[k].start <= t) {
      o.result = ProbeResult::Connected;
    } else if (k > 0 && t - sessions[k - 1].end <= leaseset_ttl) {
      o.result = ProbeResult::LeaseSetStaleNoConnect;
    }
    out.push_back(o);
  }
  return out;
}

std::vector<ProbeOutcome> simulate_probe(const BehaviorSchedule& service_schedule, Duration probe_period,
                                         Duration leaseset_ttl, std::uint64_t seed) {
  auto sessions = expand_schedule(service_schedule);
  TimePoint end = service_schedule.epoch_start + service_schedule.day_length() * service_schedule.repeat_days;
  return simulate_probe(sessions, service_schedule.epoch_start, end, probe_period, leaseset_ttl, seed);
}

std::vector<OnlineSession> probe_to_sessions(const std::vector<ProbeOutcome>& outcomes,
                                             TimePoint horizon_start, TimePoint horizon_end) {
  std::vector<OnlineSession> out;
  if (outcomes.empty()) return out;
  auto online = [&](std::size_t i) { return outcomes[i].result == ProbeResult::Connected; };
  auto midpoint = [&](std::size_t i) {
    return outcomes[i - 1].time + (outcomes[i].time - outcomes[i - 1].time) / 2;
  };
  std::optional<TimePoint> open;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    bool was = i > 0 && online(i - 1);
    if (online(i) && !was) open = i == 0 ? horizon_start : midpoint(i);
    if (!online(i) && was) {
      out.push_back({*open, midpoint(i), {}, StartQuality::CoarseOnly, EndQuality::CoarseOnly});
      open.reset();
    }
  }
  if (open) out.push_back({*open, horizon_end, {}, StartQuality::CoarseOnly, EndQuality::CoarseOnly});
  for (auto& s : out) {
    s.start = std::max(s.start, horizon_start);
    s.end = std::min(s.end, horizon_end);
  }
  std::erase_if(out, [](const OnlineSession& s) { return s.end <= s.start; });
  return out;
}

BehaviorSequence probe_to_behavior(const std::vector<ProbeOutcome>& outcomes, Duration resolution) {
  if (outcomes.empty()) throw std::invalid_argument("no probe outcomes");
  TimePoint from = outcomes.front().time, to = outcomes.back().time + resolution;
  return serialize_behavior(probe_to_sessions(outcomes, from, to), from, to, resolution);
}

BehaviorSequence serialize_behavior(const std::vector<OnlineSession>& sessions, TimePoint horizon_start,
                                    TimePoint horizon_end, Duration resolution) {
  if (resolution <= Duration(0)) throw std::invalid_argument("resolution must be positive");
  std::vector<OnlineSession> sorted = sessions;
  std::sort(sorted.begin(), sorted.end(),
            [](const OnlineSession& a, const OnlineSession& b) { return a.start < b.start; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].start < sorted[i - 1].end) throw std::invalid_argument("overlapping sessions");

  BehaviorSequence seq;
  seq.resolution = resolution;
  if (horizon_end <= horizon_start) return seq;
  const auto slots = (horizon_end - horizon_start + resolution - Duration(1)) / resolution;
  seq.values.reserve(static_cast<std::size_t>(slots));
  std::size_t k = 0;
  int run = 0;
  for (std::int64_t i = 0; i < slots; ++i) {
    TimePoint t = horizon_start + resolution * i;
    while (k < sorted.size() && sorted[k].end <= t) ++k;
    bool on = k < sorted.size() && sorted[k].start <= t;
    if (on) run = run > 0 ? run + 1 : 1;
    else run = run < 0 ? run - 1 : -1;
    seq.values.push_back(run);
  }
  return seq;
}

}  // namespace i2plive
