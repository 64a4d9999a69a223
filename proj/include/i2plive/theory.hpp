#pragma once

#include <cstdint>
#include <vector>

namespace i2plive {

// On-period length i (1..k) has probability on_probs[i-1]; likewise for
// off-periods.
struct CycleDistribution {
  std::vector<double> on_probs;
  std::vector<double> off_probs;
  void validate() const;
};

// S_a * S_b: two independent processes pick the same (on, off) cycle.
double collision_prob_one_cycle(const CycleDistribution& dist);

// (1 - (S_a S_b)^m)^(n-1): the first of n processes matches no other over m cycles.
double uniqueness_prob(int n, int m, const CycleDistribution& dist);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

MonteCarloEstimate monte_carlo_uniqueness(int n, int m, const CycleDistribution& dist, std::uint64_t trials,
                                          std::uint64_t seed);

}  // namespace i2plive
