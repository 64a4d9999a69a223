#include <algorithm>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include "i2plive/correlate.hpp"

namespace i2plive {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

void require_nonempty(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("dtw on empty sequence");
}

std::int64_t one_sided_bound(const std::vector<int>& a, const std::vector<int>& b) {
  std::unordered_set<int> values(b.begin(), b.end());
  bool pos = false, neg = false;
  for (int v : b) (v > 0 ? pos : neg) = true;
  std::int64_t sum = 0;
  for (int v : a) {
    if (values.count(v)) continue;
    sum += (v > 0 ? pos : neg) ? 1 : 2;
  }
  return sum;
}

}  // namespace

std::int64_t dtw_distance(const std::vector<int>& a, const std::vector<int>& b, std::optional<std::size_t> band) {
  require_nonempty(a, b);
  const std::size_t n = a.size(), m = b.size();
  std::size_t w = m + n;
  if (band) w = std::max(*band, n > m ? n - m : m - n);
  std::vector<std::int64_t> prev(m + 1, kInf), cur(m + 1, kInf);
  prev[0] = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    std::fill(cur.begin(), cur.end(), kInf);
    std::size_t lo = i > w ? i - w : 1, hi = std::min(m, i + w);
    for (std::size_t j = lo; j <= hi; ++j) {
      std::int64_t best = std::min({prev[j - 1], prev[j], cur[j - 1]});
      cur[j] = best + element_distance(a[i - 1], b[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

std::int64_t dtw_distance(const BehaviorSequence& a, const BehaviorSequence& b, std::optional<std::size_t> band) {
  return dtw_distance(a.values, b.values, band);
}

BoundedDistance dtw_distance_bounded(const std::vector<int>& a, const std::vector<int>& b, std::int64_t limit) {
  require_nonempty(a, b);
  std::int64_t lb = dtw_lower_bound(a, b);
  if (lb > limit) return {lb, true};
  const std::size_t m = b.size();
  std::vector<std::int64_t> prev(m + 1, kInf), cur(m + 1, kInf);
  prev[0] = 0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = kInf;
    std::int64_t row_min = kInf;
    for (std::size_t j = 1; j <= m; ++j) {
      cur[j] = std::min({prev[j - 1], prev[j], cur[j - 1]}) + element_distance(a[i - 1], b[j - 1]);
      row_min = std::min(row_min, cur[j]);
    }
    // Every warping path crosses every row.
    if (row_min > limit) return {std::max(row_min, lb), true};
    std::swap(prev, cur);
  }
  return {prev[m], prev[m] > limit};
}

std::int64_t dtw_lower_bound(const std::vector<int>& a, const std::vector<int>& b) {
  require_nonempty(a, b);
  return std::max(one_sided_bound(a, b), one_sided_bound(b, a));
}

}  // namespace i2plive
