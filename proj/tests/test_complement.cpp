#include <gtest/gtest.h>

#include "i2plive/capture.hpp"
#include "i2plive/complement.hpp"
#include "i2plive/evaluation.hpp"

using namespace i2plive;
using std::chrono::minutes;
using std::chrono::seconds;

namespace {

const TimePoint t0 = from_millis(1735689600000LL);

ObservedTrace java_trace(const std::vector<double>& mins, bool ff = false) {
  ObservedTrace t;
  t.identity = RouterIdentity::from_label("java");
  for (double m : mins) {
    ObservedRecord o;
    o.publish_time = t0 + minutes_f(m);
    o.floodfill_flag = ff;
    o.addresses = {{TransportProtocol::NTCP2, 11, true, 0, false, false}};
    t.records.push_back(o);
  }
  return t;
}

ObservedTrace cpp_trace(const std::vector<std::pair<Duration, CongestionFlag>>& recs) {
  ObservedTrace t;
  t.identity = RouterIdentity::from_label("cpp");
  for (const auto& [d, level] : recs) {
    ObservedRecord o;
    o.publish_time = t0 + d;
    o.congestion = level;
    o.addresses = {{TransportProtocol::NTCP2, 3, true, 0, false, false}};
    t.records.push_back(o);
  }
  return t;
}

constexpr auto D = CongestionFlag::D;
constexpr auto E = CongestionFlag::E;

}  // namespace

TEST(ComplementParams, ExpectedIntervals) {
  ComplementParams p;
  EXPECT_EQ(p.E_Dc(), Duration(558'750));     // 9.3125 min
  EXPECT_EQ(p.E_f(), Duration(1'441'875));    // 24.03125 min
  EXPECT_EQ(p.E_f(), minutes(24) + Duration(1'875));
  EXPECT_EQ(p.min_update_interval(), Duration(483'750));
  EXPECT_EQ(p.max_update_interval(), Duration(633'750));
}

TEST(Concatenate, OneLostRoutineMerges) {
  auto trace = java_trace({0, 27, 63, 139, 175});
  auto inf = infer_sessions(trace);
  ASSERT_EQ(inf.sessions.size(), 2u);
  auto out = concatenate_sessions(inf, trace, ImplementationKind::JavaI2P);
  ASSERT_EQ(out.sessions.size(), 1u);
  EXPECT_EQ(out.sessions[0].start, t0);
  EXPECT_EQ(out.sessions[0].start_quality, StartQuality::ExactJoin);
}

TEST(Concatenate, LongGapStaysSplit) {
  auto trace = java_trace({0, 27, 63, 193, 229});
  auto inf = infer_sessions(trace);
  ASSERT_EQ(inf.sessions.size(), 2u);
  auto out = concatenate_sessions(inf, trace, ImplementationKind::JavaI2P);
  EXPECT_EQ(out.sessions.size(), 2u);
}

TEST(Concatenate, CppThreeWaySplitRepaired) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto fx = generate_case_fixture(CaseLabel::Case14, seed);
    auto inf = infer_sessions(fx.observed, {}, fx.config.impl);
    auto out = concatenate_sessions(inf, fx.observed, fx.config.impl);
    EXPECT_LT(out.sessions.size(), inf.sessions.size()) << "seed " << seed;
    const auto& truth = fx.sim.ground_truth_sessions[fx.target_session];
    int overlapping = 0;
    for (const auto& s : out.sessions) overlapping += s.start < truth.end && s.end > truth.start;
    EXPECT_EQ(overlapping, 1) << "seed " << seed;
  }
}

TEST(SupplementLeave, LastRecordIsRoutine) {
  auto trace = java_trace({0, 27, 63});
  auto out = supplement_leave(infer_sessions(trace), trace, ImplementationKind::JavaI2P);
  ASSERT_EQ(out.sessions.size(), 1u);
  EXPECT_EQ(out.sessions[0].end, t0 + minutes(63) + minutes_f(18.625));
  EXPECT_EQ(out.sessions[0].end_quality, EndQuality::SupplementedLeave);
}

TEST(SupplementLeave, TrailingRecordHalvesGap) {
  auto trace = java_trace({0, 27, 63, 73});
  auto out = supplement_leave(infer_sessions(trace), trace, ImplementationKind::JavaI2P);
  ASSERT_EQ(out.sessions.size(), 1u);
  EXPECT_EQ(out.sessions[0].end, t0 + minutes(63) + minutes_f(23.625));
}

TEST(SupplementLeave, CppFifteenMinutes) {
  auto trace = cpp_trace({{Duration(500), D}, {minutes(12), E}, {minutes(24), D}});
  auto out = supplement_leave(infer_sessions(trace), trace, ImplementationKind::CppI2P);
  ASSERT_EQ(out.sessions.size(), 1u);
  EXPECT_EQ(out.sessions[0].end, t0 + minutes(24) + minutes(15));
}

TEST(SupplementLeave, ExactLeaveUntouched) {
  auto trace = java_trace({0, 27, 63, 99}, true);
  trace.records.back().floodfill_flag = false;
  auto inf = infer_sessions(trace);
  auto out = supplement_leave(inf, trace, ImplementationKind::JavaI2P);
  EXPECT_EQ(out.sessions, inf.sessions);
}

TEST(SupplementJoin, ExpectedStartupInterval) {
  auto trace = java_trace({100, 136, 172});
  auto out = supplement_join(infer_sessions(trace), trace, ImplementationKind::JavaI2P);
  ASSERT_EQ(out.sessions.size(), 1u);
  EXPECT_EQ(out.sessions[0].start, t0 + minutes(100) - ComplementParams{}.E_f());
  EXPECT_EQ(out.sessions[0].start_quality, StartQuality::SupplementedJoin);
}

TEST(SupplementJoin, DisplacedInitial) {
  auto trace = java_trace({0, 66, 103});
  auto inf = infer_sessions(trace);
  auto out = complement_sessions(inf, trace, ImplementationKind::JavaI2P);
  ASSERT_EQ(out.sessions.size(), 1u);
  EXPECT_EQ(out.sessions[0].start, t0);
  EXPECT_EQ(out.sessions[0].start_quality, StartQuality::SupplementedJoin);
}

TEST(SolveCppStart, UniqueWithinLcm) {
  const InferenceParams p;
  const TimePoint init = t0 + minutes(1000) + Duration(500);
  const TimePoint peer = init + minutes(142);
  const TimePoint routine = init + minutes(36) - Duration(500);
  auto t = solve_cpp_start(peer, routine, init - minutes(852), routine, p);
  ASSERT_TRUE(t);
  EXPECT_EQ(*t, init);
  int fits = 0;
  for (int j = 1; j <= 12; ++j) {
    TimePoint c = peer - minutes(71) * j;
    fits += congruent(routine - c, -Duration(500), minutes(12), p.cpp_join_tolerance);
  }
  EXPECT_EQ(fits, 1);
}

TEST(SolveCppStart, NoCandidateAfterEarliest) {
  const InferenceParams p;
  const TimePoint init = t0 + minutes(500);
  auto t = solve_cpp_start(init + minutes(142), init + minutes(36) - Duration(500), init + minutes(1), init + minutes(35), p);
  EXPECT_FALSE(t);
}

namespace {

int exact_count(const SessionInference& inf) {
  int n = 0;
  for (const auto& s : inf.sessions)
    n += (s.start_quality == StartQuality::ExactJoin) + (s.end_quality == EndQuality::ExactLeave);
  return n;
}

}  // namespace

TEST(ComplementProperties, ExactBoundariesKeptAndOnlyMerges) {
  BehaviorSchedule sched{t0, {100, -45, 200, -60, 90, -160, 45, -30}, 3};
  for (auto c : {Category::JRFF, Category::JRnFF, Category::JU, Category::CR, Category::CU}) {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      auto cfg = config_for(c, RouterIdentity::from_label("prop"));
      auto sim = simulate_router(sched, cfg, seed);
      auto observed = capture(sim, CaptureModel::fixed(0.9), seed + 100);
      auto inf = infer_sessions(observed, {}, cfg.impl);
      auto concat = concatenate_sessions(inf, observed, cfg.impl);
      EXPECT_LE(concat.sessions.size(), inf.sessions.size());
      // Each concatenated session is a union of whole inferred sessions.
      for (const auto& s : inf.sessions) {
        int holders = 0;
        for (const auto& m : concat.sessions) {
          bool all = true, any = false;
          for (auto r : s.record_indices) {
            bool in = std::find(m.record_indices.begin(), m.record_indices.end(), r) != m.record_indices.end();
            all = all && in;
            any = any || in;
          }
          if (any) {
            EXPECT_TRUE(all) << to_string(c) << " seed " << seed;
            ++holders;
          }
        }
        EXPECT_EQ(holders, s.record_indices.empty() ? 0 : 1);
      }
      auto full = complement_sessions(inf, observed, cfg.impl);
      EXPECT_GE(exact_count(full), exact_count(inf)) << to_string(c) << " seed " << seed;
      for (const auto& s : full.sessions) {
        if (s.start_quality == StartQuality::ExactJoin) {
          bool found = false;
          for (const auto& o : inf.sessions) found = found || (o.start_quality == StartQuality::ExactJoin && o.start == s.start);
          EXPECT_TRUE(found);
        }
        if (s.end_quality == EndQuality::ExactLeave) {
          bool found = false;
          for (const auto& o : inf.sessions) found = found || (o.end_quality == EndQuality::ExactLeave && o.end == s.end);
          EXPECT_TRUE(found);
        }
      }
    }
  }
}

TEST(CaseFixtures, Deterministic) {
  auto a = generate_case_fixture(CaseLabel::Case8, 5);
  auto b = generate_case_fixture(CaseLabel::Case8, 5);
  EXPECT_EQ(a.sim.full_trace, b.sim.full_trace);
  EXPECT_EQ(a.kept, b.kept);
}

TEST(CaseFixtures, ExhibitTheirCase) {
  for (int id = 1; id <= 16; ++id) {
    auto label = case_from_int(id);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      auto fx = generate_case_fixture(label, seed);
      auto cases = detect_cases(fx.sim, fx.kept, fx.config);
      EXPECT_TRUE(case_set(cases).count(label)) << to_string(label) << " seed " << seed;
    }
  }
  EXPECT_THROW(case_from_int(17), std::invalid_argument);
}

TEST(CaseFixtures, MissingLeaveBoundedByRoutineInterval) {
  ComplementParams p;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto fx = generate_case_fixture(CaseLabel::Case9, seed);
    auto inf = infer_sessions(fx.observed, {}, fx.config.impl);
    auto out = complement_sessions(inf, fx.observed, fx.config.impl, p);
    auto matches = match_sessions(fx.sim, fx.kept, out.sessions);
    bool seen = false;
    for (const auto& m : matches)
      if (m.truth_session == fx.target_session) {
        seen = true;
        EXPECT_LE(m.leave_bias_s, to_seconds(p.max_update_interval() * 4)) << "seed " << seed;
      }
    EXPECT_TRUE(seen);
  }
}

TEST(CaseFixtures, SeverityTable) {
  EXPECT_EQ(severity_of(CaseLabel::Case11), Severity::Uncorrectable);
  EXPECT_EQ(severity_of(CaseLabel::Case12), Severity::Uncorrectable);
  EXPECT_EQ(severity_of(CaseLabel::Case2), Severity::Corrected);
}
