#include "i2plive/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace i2plive {

std::vector<SessionMatch> match_sessions(const SimOutput& sim, const std::vector<std::size_t>& kept,
                                         const std::vector<OnlineSession>& inferred) {
  // Full-trace index -> truth session.
  std::vector<std::size_t> owner(sim.full_trace.records.size(), 0);
  for (std::size_t s = 0; s < sim.ground_truth_sessions.size(); ++s)
    for (auto i : sim.ground_truth_sessions[s].record_indices) owner[i] = s;

  std::vector<std::map<std::size_t, std::size_t>> votes(sim.ground_truth_sessions.size());
  for (std::size_t k = 0; k < inferred.size(); ++k)
    for (auto obs : inferred[k].record_indices) {
      if (obs >= kept.size()) throw std::out_of_range("inferred session references an unknown record");
      ++votes[owner[kept[obs]]][k];
    }

  std::vector<SessionMatch> out;
  for (std::size_t s = 0; s < votes.size(); ++s) {
    if (votes[s].empty()) continue;
    std::size_t best = votes[s].begin()->first, count = 0;
    for (const auto& [k, c] : votes[s])
      if (c > count) best = k, count = c;
    const auto& truth = sim.ground_truth_sessions[s];
    const auto& inf = inferred[best];
    SessionMatch m;
    m.truth_session = s;
    m.inferred_session = best;
    m.join_bias_s = std::abs(to_seconds(inf.start - truth.start));
    m.leave_bias_s = std::abs(to_seconds(inf.end - truth.end));
    m.start_quality = inf.start_quality;
    m.end_quality = inf.end_quality;
    out.push_back(m);
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile outside [0, 1]");
  std::sort(values.begin(), values.end());
  double pos = q * static_cast<double>(values.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, values.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

}  // namespace i2plive
