#include "i2plive/theory.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "i2plive/random.hpp"

namespace i2plive {

namespace {

void check_probs(const std::vector<double>& p, const char* what) {
  if (p.empty()) throw std::invalid_argument(std::string(what) + " distribution is empty");
  for (double x : p)
    if (!(x >= 0.0)) throw std::invalid_argument(std::string(what) + " distribution has a negative entry");
  double sum = std::accumulate(p.begin(), p.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument(std::string(what) + " distribution does not sum to 1");
}

double sum_squares(const std::vector<double>& p) {
  double s = 0.0;
  for (double x : p) s += x * x;
  return s;
}

std::size_t draw(const std::vector<double>& cdf, Rng& rng) {
  double u = uniform01(rng);
  for (std::size_t i = 0; i + 1 < cdf.size(); ++i)
    if (u < cdf[i]) return i;
  return cdf.size() - 1;
}

std::vector<double> cumulative(const std::vector<double>& p) {
  std::vector<double> c(p.size());
  std::partial_sum(p.begin(), p.end(), c.begin());
  return c;
}

}  // namespace

void CycleDistribution::validate() const {
  check_probs(on_probs, "on-period");
  check_probs(off_probs, "off-period");
}

double collision_prob_one_cycle(const CycleDistribution& dist) {
  dist.validate();
  return sum_squares(dist.on_probs) * sum_squares(dist.off_probs);
}

double uniqueness_prob(int n, int m, const CycleDistribution& dist) {
  if (n < 1 || m < 1) throw std::invalid_argument("n and m must be at least 1");
  double pc = collision_prob_one_cycle(dist);
  if (n == 1) return 1.0;
  double pm;
  if (pc <= 0.0) pm = 0.0;
  else if (pc >= 1.0) pm = 1.0;
  else pm = std::exp(static_cast<double>(m) * std::log(pc));
  if (pm >= 1.0) return 0.0;
  return std::exp(static_cast<double>(n - 1) * std::log1p(-pm));
}

MonteCarloEstimate monte_carlo_uniqueness(int n, int m, const CycleDistribution& dist, std::uint64_t trials,
                                          std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (n < 1 || m < 1) throw std::invalid_argument("n and m must be at least 1");
  dist.validate();
  const auto on = cumulative(dist.on_probs), off = cumulative(dist.off_probs);
  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(m)}));
  std::vector<std::pair<std::size_t, std::size_t>> first(static_cast<std::size_t>(m));
  std::uint64_t unique = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    for (auto& c : first) c = {draw(on, rng), draw(off, rng)};
    bool matched = false;
    for (int other = 1; other < n && !matched; ++other) {
      // Cycles are drawn only until the first difference.
      bool same = true;
      for (int c = 0; c < m && same; ++c) {
        std::size_t a = draw(on, rng), b = draw(off, rng);
        same = a == first[static_cast<std::size_t>(c)].first && b == first[static_cast<std::size_t>(c)].second;
      }
      matched = same;
    }
    if (!matched) ++unique;
  }
  MonteCarloEstimate est;
  est.estimate = static_cast<double>(unique) / static_cast<double>(trials);
  est.std_error = std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(trials));
  return est;
}

}  // namespace i2plive
