#include <gtest/gtest.h>

#include <cmath>

#include "i2plive/capture.hpp"
#include "i2plive/random.hpp"
#include "support/sha256_reference.hpp"

using namespace i2plive;

namespace {

const TimePoint t0 = from_millis(1735689600000LL);

SimOutput synthetic_output(std::size_t n) {
  SimOutput out;
  out.full_trace.identity = RouterIdentity::from_label("cap");
  for (std::size_t i = 0; i < n; ++i) {
    RouterInfoRecord r;
    r.identity = out.full_trace.identity;
    r.publish_time = t0 + std::chrono::seconds(i + 1);
    r.truth_kind = TruthKind::Routine;
    r.congestion = static_cast<CongestionFlag>(i % 4);
    out.full_trace.records.push_back(r);
  }
  return out;
}

std::vector<std::uint8_t> concat(const std::vector<std::uint8_t>& a, const std::string& b) {
  auto out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

TEST(RoutingKey, FrozenZeroIdentifier) {
  std::array<std::uint8_t, 32> zero{};
  auto key = compute_routing_key(zero.data(), zero.size(), "20250101");
  EXPECT_EQ(to_hex(key), "ca42854ae809516b59e3f255e4dd3b27057e75d2b85f3c57fc13b0d9ac67cac6");
}

TEST(RoutingKey, MatchesReferenceDoubleHash) {
  Rng rng(2025);
  for (int i = 0; i < 100; ++i) {
    std::vector<std::uint8_t> id(32);
    for (auto& b : id) b = static_cast<std::uint8_t>(uniform_int(rng, 0, 255));
    char date[9];
    std::snprintf(date, sizeof(date), "%04d%02d%02d", static_cast<int>(uniform_int(rng, 2000, 2099)),
                  static_cast<int>(uniform_int(rng, 1, 12)), static_cast<int>(uniform_int(rng, 1, 28)));
    auto inner = testsupport::sha256(id);
    auto expected = testsupport::sha256(concat({inner.begin(), inner.end()}, date));
    EXPECT_EQ(compute_routing_key(id.data(), id.size(), date), expected) << i;
  }
}

TEST(RoutingKey, Deterministic) {
  auto id = RouterIdentity::from_label("det");
  EXPECT_EQ(compute_routing_key(id, "20250101"), compute_routing_key(id, "20250101"));
}

TEST(RoutingKey, ChangesWithDay) {
  auto id = RouterIdentity::from_label("day");
  EXPECT_NE(compute_routing_key(id, "20250101"), compute_routing_key(id, "20250102"));
  EXPECT_EQ(routing_key_at(id, t0 + std::chrono::hours(23)), compute_routing_key(id, "20250101"));
  EXPECT_EQ(routing_key_at(id, t0 + std::chrono::hours(24)), compute_routing_key(id, "20250102"));
}

TEST(RoutingKey, BadInputs) {
  std::array<std::uint8_t, 31> short_id{};
  EXPECT_THROW(compute_routing_key(short_id.data(), short_id.size(), "20250101"), std::invalid_argument);
  std::array<std::uint8_t, 32> id{};
  EXPECT_THROW(compute_routing_key(id.data(), id.size(), "2025-01-01"), std::invalid_argument);
}

TEST(Capture, FullRateStripsAnnotationsOnly) {
  auto out = synthetic_output(50);
  auto observed = capture(out, CaptureModel::fixed(1.0), 9);
  ASSERT_EQ(observed.size(), 50u);
  auto back = to_router_trace(observed);
  for (std::size_t i = 0; i < 50; ++i) {
    auto expected = out.full_trace.records[i];
    expected.truth_kind.reset();
    EXPECT_EQ(back.records[i], expected);
  }
  EXPECT_TRUE(validate_trace(back, true).empty());
}

TEST(Capture, RetentionWithinBinomialBound) {
  auto out = synthetic_output(10'000);
  auto observed = capture(out, CaptureModel::fixed(0.9), 42);
  double sigma = std::sqrt(10'000 * 0.9 * 0.1);
  EXPECT_LE(std::abs(static_cast<double>(observed.size()) - 9'000.0), 3 * sigma);
}

TEST(Capture, ObservedIsSubsequence) {
  auto out = synthetic_output(2'000);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::vector<std::size_t> kept;
    auto observed = capture_indexed(out, CaptureModel::fixed(0.7), seed, &kept);
    ASSERT_EQ(kept.size(), observed.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
      if (i > 0) ASSERT_LT(kept[i - 1], kept[i]);
      ASSERT_EQ(observed.time(i), out.full_trace.records[kept[i]].publish_time);
    }
  }
}

TEST(Capture, BurstLossDropsRuns) {
  auto out = synthetic_output(5'000);
  auto model = CaptureModel::fixed(0.9);
  model.burst_q = 0.5;
  std::vector<std::size_t> kept;
  capture_indexed(out, model, 5, &kept);
  std::size_t longest = 0;
  for (std::size_t i = 1; i < kept.size(); ++i) longest = std::max(longest, kept[i] - kept[i - 1] - 1);
  EXPECT_GE(longest, 3u);
}

TEST(CaptureRate, FifteenFloodfillsIsNinetyPercent) {
  auto model = CaptureModel::curve(15);
  EXPECT_DOUBLE_EQ(capture_rate_for(15, model), 0.90);
  EXPECT_DOUBLE_EQ(model.retention_prob(), 0.90);
}

TEST(CaptureRate, ClampAndInterpolate) {
  auto model = CaptureModel::curve(15, {{10, 0.8}, {20, 0.9}});
  EXPECT_DOUBLE_EQ(capture_rate_for(5, model), 0.8);
  EXPECT_DOUBLE_EQ(capture_rate_for(40, model), 0.9);
  EXPECT_NEAR(capture_rate_for(15, model), 0.85, 1e-12);
}

TEST(CaptureRate, EmptyTableRejected) {
  auto model = CaptureModel::curve(15, {});
  EXPECT_THROW(capture_rate_for(15, model), std::invalid_argument);
}
