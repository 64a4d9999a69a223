#include <gtest/gtest.h>

#include <functional>
#include <limits>

#include "i2plive/capture.hpp"
#include "i2plive/complement.hpp"
#include "i2plive/correlate.hpp"
#include "i2plive/random.hpp"

using namespace i2plive;
using std::chrono::minutes;
using std::chrono::seconds;

namespace {

const TimePoint t0 = from_millis(1735689600000LL);

// Minimum over every monotone warping path, enumerated explicitly.
std::int64_t brute_force_dtw(const std::vector<int>& a, const std::vector<int>& b) {
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  std::function<void(std::size_t, std::size_t, std::int64_t)> walk = [&](std::size_t i, std::size_t j,
                                                                         std::int64_t acc) {
    acc += element_distance(a[i], b[j]);
    if (i + 1 == a.size() && j + 1 == b.size()) {
      best = std::min(best, acc);
      return;
    }
    if (i + 1 < a.size()) walk(i + 1, j, acc);
    if (j + 1 < b.size()) walk(i, j + 1, acc);
    if (i + 1 < a.size() && j + 1 < b.size()) walk(i + 1, j + 1, acc);
  };
  walk(0, 0, 0);
  return best;
}

std::vector<int> random_counters(Rng& rng, std::size_t len) {
  std::vector<int> v;
  int run = bernoulli(rng, 0.5) ? 1 : -1;
  for (std::size_t i = 0; i < len; ++i) {
    v.push_back(run);
    if (bernoulli(rng, 0.3)) run = run > 0 ? -1 : 1;
    else run += run > 0 ? 1 : -1;
  }
  return v;
}

OnlineSession session(double from, double to) {
  OnlineSession s;
  s.start = t0 + minutes_f(from);
  s.end = t0 + minutes_f(to);
  return s;
}

std::vector<ProbeOutcome> outcomes(const std::vector<ProbeResult>& rs) {
  std::vector<ProbeOutcome> out;
  for (std::size_t i = 0; i < rs.size(); ++i) out.push_back({t0 + minutes(static_cast<int>(i)), rs[i]});
  return out;
}

constexpr auto C = ProbeResult::Connected;
constexpr auto M = ProbeResult::LeaseSetMiss;
constexpr auto S = ProbeResult::LeaseSetStaleNoConnect;

}  // namespace

TEST(Probe, OutcomeByState) {
  std::vector<OnlineSession> sessions{session(0, 60)};
  auto at = [&](double m) {
    auto out = simulate_probe(sessions, t0 + minutes_f(m), t0 + minutes_f(m) + seconds(1), seconds(1),
                              minutes(10), 0);
    return out.at(0).result;
  };
  EXPECT_EQ(at(30), ProbeResult::Connected);
  EXPECT_EQ(at(65), ProbeResult::LeaseSetStaleNoConnect);
  EXPECT_EQ(at(90), ProbeResult::LeaseSetMiss);
}

TEST(Probe, ScheduleVariantCoversHorizon) {
  BehaviorSchedule sched{t0, {30, -30}, 2};
  auto out = simulate_probe(sched, minutes(1), minutes(10), 3);
  ASSERT_GE(out.size(), 119u);
  for (std::size_t i = 1; i < out.size(); ++i) EXPECT_EQ(out[i].time - out[i - 1].time, minutes(1));
  EXPECT_THROW(simulate_probe(sched, Duration(0)), std::invalid_argument);
}

TEST(ProbeToBehavior, AllConnected) {
  auto seq = probe_to_behavior(outcomes({C, C, C, C, C}));
  EXPECT_EQ(seq.values, (std::vector<int>{1, 2, 3, 4, 5}));
}

TEST(ProbeToBehavior, MidpointTransition) {
  auto sessions = probe_to_sessions(outcomes({C, S}), t0, t0 + minutes(2));
  ASSERT_EQ(sessions.size(), 1u);
  EXPECT_EQ(sessions[0].end, t0 + seconds(30));
  EXPECT_EQ(probe_to_behavior(outcomes({C, S})).values, (std::vector<int>{1, -1}));
}

TEST(ProbeToBehavior, Alternating) {
  EXPECT_EQ(probe_to_behavior(outcomes({C, M, C, M})).values, (std::vector<int>{1, -1, 1, -1}));
  EXPECT_EQ(probe_to_behavior(outcomes({M})).values, (std::vector<int>{-1}));
  EXPECT_THROW(probe_to_behavior({}), std::invalid_argument);
}

TEST(Serialize, Examples) {
  EXPECT_EQ(serialize_behavior({session(0, 5)}, t0, t0 + minutes(10)).values,
            (std::vector<int>{1, 2, 3, 4, 5, -1, -2, -3, -4, -5}));
  EXPECT_EQ(serialize_behavior({}, t0, t0 + minutes(3)).values, (std::vector<int>{-1, -2, -3}));
  EXPECT_EQ(serialize_behavior({session(0, 4)}, t0, t0 + minutes(4)).values, (std::vector<int>{1, 2, 3, 4}));
  EXPECT_THROW(serialize_behavior({session(0, 5), session(3, 8)}, t0, t0 + minutes(10)), std::invalid_argument);
}

TEST(Serialize, RunLengthDecodeRecoversSchedule) {
  Rng rng(17);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<int> pattern;
    int len = static_cast<int>(uniform_int(rng, 1, 6)) * 2;
    for (int i = 0; i < len; ++i) {
      int v = static_cast<int>(uniform_int(rng, 1, 90));
      pattern.push_back(i % 2 == 0 ? v : -v);
    }
    BehaviorSchedule s{t0, pattern, 1};
    auto seq = serialize_behavior(expand_schedule(s), t0, t0 + s.day_length());
    std::vector<int> decoded;
    for (std::size_t i = 0; i < seq.values.size(); ++i) {
      if (i + 1 == seq.values.size() || std::abs(seq.values[i + 1]) == 1) decoded.push_back(seq.values[i]);
    }
    EXPECT_EQ(decoded, pattern);
  }
}

TEST(Dtw, Examples) {
  EXPECT_EQ(dtw_distance(std::vector<int>{1, 2, 3}, std::vector<int>{1, 2, 3}), 0);
  EXPECT_EQ(dtw_distance(std::vector<int>{1, 2}, std::vector<int>{-1, -2}), 4);
  EXPECT_EQ(dtw_distance(std::vector<int>{1, 2, 3}, std::vector<int>{1, 2}), 1);
  EXPECT_THROW(dtw_distance(std::vector<int>{}, std::vector<int>{1}), std::invalid_argument);
}

TEST(Dtw, MatchesBruteForceOracle) {
  Rng rng(99);
  for (int iter = 0; iter < 2000; ++iter) {
    auto a = random_counters(rng, static_cast<std::size_t>(uniform_int(rng, 1, 6)));
    auto b = random_counters(rng, static_cast<std::size_t>(uniform_int(rng, 1, 6)));
    std::int64_t d = dtw_distance(a, b);
    ASSERT_EQ(d, brute_force_dtw(a, b));
    ASSERT_EQ(d, dtw_distance(b, a));
    ASSERT_EQ(dtw_distance(a, a), 0);
    ASSERT_LE(dtw_lower_bound(a, b), d);
  }
}

TEST(Dtw, BoundedAgreesBelowLimit) {
  Rng rng(5);
  for (int iter = 0; iter < 300; ++iter) {
    auto a = random_counters(rng, static_cast<std::size_t>(uniform_int(rng, 1, 60)));
    auto b = random_counters(rng, static_cast<std::size_t>(uniform_int(rng, 1, 60)));
    std::int64_t exact = dtw_distance(a, b);
    std::int64_t limit = uniform_int(rng, 0, 80);
    auto bounded = dtw_distance_bounded(a, b, limit);
    if (exact <= limit) {
      EXPECT_FALSE(bounded.exceeded);
      EXPECT_EQ(bounded.distance, exact);
    } else {
      EXPECT_TRUE(bounded.exceeded);
      EXPECT_GT(bounded.distance, limit);
      EXPECT_LE(bounded.distance, exact);
    }
  }
}

TEST(Dtw, BandNeverBelowUnbanded) {
  Rng rng(8);
  for (int iter = 0; iter < 200; ++iter) {
    auto a = random_counters(rng, 40);
    auto b = random_counters(rng, 40);
    EXPECT_GE(dtw_distance(a, b, std::size_t{3}), dtw_distance(a, b));
    EXPECT_EQ(dtw_distance(a, b, std::size_t{40}), dtw_distance(a, b));
  }
}

TEST(AnonymitySet, Thresholds) {
  BehaviorSequence target{{1, 2, 3}};
  Candidate same{RouterIdentity::from_label("same"), target, Category::JRFF};
  auto report = anonymity_set(target, 1, {same});
  EXPECT_TRUE(report.contains(same.identity));

  CategoryThresholds th;
  EXPECT_EQ(th.threshold(Category::JRFF), 10);
  EXPECT_EQ(th.threshold(Category::CU), 3);
  // 32 > 3 x 10 excludes; 6 <= 2 x 3 includes.
  std::vector<int> base(40, 0);
  for (int i = 0; i < 40; ++i) base[i] = i + 1;
  auto off_by = [&](int flips) {
    auto v = base;
    for (int i = 0; i < flips; ++i) v[i] = -(i + 1);
    return v;
  };
  BehaviorSequence tgt{base};
  Candidate far{RouterIdentity::from_label("far"), {off_by(16)}, Category::JRFF};
  Candidate near{RouterIdentity::from_label("near"), {off_by(3)}, Category::CU};
  ASSERT_EQ(dtw_distance(tgt, far.sequence), 32);
  ASSERT_EQ(dtw_distance(tgt, near.sequence), 6);
  auto r = anonymity_set(tgt, 3, {far, near});
  EXPECT_FALSE(r.contains(far.identity));
  auto r2 = anonymity_set(tgt, 2, {near});
  EXPECT_TRUE(r2.contains(near.identity));
  ASSERT_EQ(r.entries.size(), 2u);
  EXPECT_LE(r.entries[0].distance, r.entries[1].distance);
  EXPECT_THROW(anonymity_set(tgt, 0, {near}), std::invalid_argument);
  CategoryThresholds partial;
  partial.per_session.erase(Category::CU);
  EXPECT_THROW(anonymity_set(tgt, 1, {near}, partial), std::invalid_argument);
}

TEST(Distinguishability, SynchronizedGroup) {
  auto day = expand_schedule(BehaviorSchedule{t0, {100, -45, 200, -60, 90, -160}, 1});
  auto seq = serialize_behavior(day, t0, t0 + minutes(655));
  auto other = serialize_behavior(expand_schedule(BehaviorSchedule{t0, {-300, 200, -155}, 1}), t0,
                                  t0 + minutes(655));
  std::vector<std::pair<RouterIdentity, BehaviorSequence>> seqs;
  for (int k = 0; k < 4; ++k) seqs.push_back({RouterIdentity::from_label("sync" + std::to_string(k)), seq});
  seqs.push_back({RouterIdentity::from_label("lone"), other});
  auto result = pairwise_distinguishability(seqs);
  ASSERT_EQ(result.size(), 5u);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(result[k].second.size(), 3u);
  EXPECT_TRUE(result[4].second.empty());
  EXPECT_THROW(pairwise_distinguishability({seqs[0]}), std::invalid_argument);
}

TEST(Degradation, LowerCaptureRateRaisesDistance) {
  BehaviorSchedule sched{t0, {100, -45, 200, -60, 90, -160}, 2};
  const TimePoint end = t0 + sched.day_length() * 2;
  auto truth = serialize_behavior(expand_schedule(sched), t0, end);
  auto mean_distance = [&](double p) {
    double total = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      auto cfg = config_for(Category::JRnFF, RouterIdentity::from_label("deg"));
      auto sim = simulate_router(sched, cfg, seed);
      auto observed = capture(sim, CaptureModel::fixed(p), seed);
      auto inf = complement_sessions(infer_sessions(observed), observed, cfg.impl);
      std::vector<OnlineSession> clipped;
      for (auto s : inf.sessions) {
        s.start = std::max(s.start, t0);
        s.end = std::min(s.end, end);
        if (s.start < s.end) clipped.push_back(s);
      }
      total += static_cast<double>(dtw_distance(truth, serialize_behavior(clipped, t0, end)));
    }
    return total / 30;
  };
  double full = mean_distance(1.0), ninety = mean_distance(0.9), seventy = mean_distance(0.7);
  EXPECT_LE(full, ninety);
  EXPECT_LE(ninety, seventy);
}
