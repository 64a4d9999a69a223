#pragma once

#include <optional>
#include <vector>

#include "i2plive/router_sim.hpp"

namespace i2plive {

// Ground-truth session paired with the inferred session that holds most of
// its captured records.
struct SessionMatch {
  std::size_t truth_session = 0;
  std::size_t inferred_session = 0;
  double join_bias_s = 0.0;   // absolute
  double leave_bias_s = 0.0;  // absolute
  StartQuality start_quality = StartQuality::CoarseOnly;
  EndQuality end_quality = EndQuality::CoarseOnly;
};

// `kept` maps observed indices to full-trace indices. Truth sessions with no
// captured record are skipped.
std::vector<SessionMatch> match_sessions(const SimOutput& sim, const std::vector<std::size_t>& kept,
                                         const std::vector<OnlineSession>& inferred);

// Linear interpolation between order statistics; q in [0, 1].
double quantile(std::vector<double> values, double q);
inline double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

}  // namespace i2plive
