#include <gtest/gtest.h>

#include "i2plive/capture.hpp"
#include "i2plive/complement.hpp"
#include "i2plive/inference.hpp"

using namespace i2plive;
using std::chrono::minutes;

namespace {

const TimePoint t0 = from_millis(1735689600000LL);

struct Rec {
  double min;
  bool ff = false;
  CongestionFlag level = CongestionFlag::None;
};

ObservedTrace java_trace(const std::vector<Rec>& recs) {
  ObservedTrace t;
  t.identity = RouterIdentity::from_label("java");
  for (const auto& r : recs) {
    ObservedRecord o;
    o.publish_time = t0 + minutes_f(r.min);
    o.floodfill_flag = r.ff;
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

constexpr auto N = CongestionFlag::None;
constexpr auto D = CongestionFlag::D;
constexpr auto E = CongestionFlag::E;
constexpr auto G = CongestionFlag::G;

void expect_partition(const SessionInference& inf, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (std::size_t s = 0; s < inf.sessions.size(); ++s) {
    const auto& sess = inf.sessions[s];
    EXPECT_LE(sess.start, sess.end);
    if (s > 0) EXPECT_LT(inf.sessions[s - 1].end, sess.start);
    for (auto i : sess.record_indices) ++seen[i];
  }
  for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(seen[i], 1) << "record " << i;
}

}  // namespace

TEST(Implementation, CostProfiles) {
  EXPECT_EQ(identify_implementation(cpp_trace({{Duration(0), N}})), ImplementationKind::CppI2P);
  EXPECT_EQ(identify_implementation(java_trace({{0}})), ImplementationKind::JavaI2P);
  ObservedTrace bare;
  bare.records.resize(2);
  EXPECT_THROW(identify_implementation(bare), UndeterminableImplementation);
}

TEST(JavaCoarse, SingleRecord) {
  auto inf = infer_sessions_java_coarse(java_trace({{5}}));
  ASSERT_EQ(inf.sessions.size(), 1u);
  EXPECT_EQ(inf.sessions[0].start_quality, StartQuality::CoarseOnly);
  EXPECT_EQ(inf.sessions[0].end_quality, EndQuality::CoarseOnly);
}

TEST(JavaCoarse, EmptyTrace) {
  EXPECT_TRUE(infer_sessions_java_coarse(ObservedTrace{}).sessions.empty());
}

TEST(JavaCoarse, ChainsRoutinesAndSplitsOnLongGap) {
  auto trace = java_trace({{0}, {27}, {63}, {99}, {300}, {327}, {363}});
  auto inf = infer_sessions_java_coarse(trace);
  ASSERT_EQ(inf.sessions.size(), 2u);
  EXPECT_EQ(inf.sessions[0].record_indices.size(), 4u);
  EXPECT_TRUE(inf.routine_marks[2]);
  expect_partition(inf, trace.size());
}

TEST(JavaJoin, BranchA) {
  auto trace = java_trace({{0}, {27}, {63}, {99}});
  auto inf = identify_join_java(infer_sessions_java_coarse(trace), trace);
  ASSERT_EQ(inf.sessions.size(), 1u);
  EXPECT_EQ(inf.sessions[0].start, t0);
  EXPECT_EQ(inf.sessions[0].start_quality, StartQuality::ExactJoin);
}

TEST(JavaJoin, BranchB) {
  auto trace = java_trace({{0}, {19}, {55}, {91}});
  auto inf = identify_join_java(infer_sessions_java_coarse(trace), trace);
  ASSERT_EQ(inf.sessions.size(), 1u);
  EXPECT_EQ(inf.sessions[0].start_quality, StartQuality::ExactJoin);
  EXPECT_EQ(inf.sessions[0].start, t0);
}

TEST(JavaJoin, NoStartupGapLeavesCoarse) {
  auto trace = java_trace({{0}, {12}, {48}, {84}});
  auto inf = identify_join_java(infer_sessions_java_coarse(trace), trace);
  for (const auto& s : inf.sessions) EXPECT_NE(s.start_quality, StartQuality::ExactJoin);
}

TEST(JavaJoin, SplitsSessionAtInteriorStartup) {
  // A second session's Initial sits inside the first coarse group.
  auto trace = java_trace({{0}, {27}, {63}, {99}, {112}, {139}, {175}});
  auto inf = infer_sessions(trace);
  ASSERT_EQ(inf.sessions.size(), 2u);
  EXPECT_EQ(inf.sessions[1].start, t0 + minutes(112));
  EXPECT_EQ(inf.sessions[1].start_quality, StartQuality::ExactJoin);
  expect_partition(inf, trace.size());
}

TEST(JavaJoin, Idempotent) {
  auto trace = java_trace({{0}, {27}, {63}, {99}, {112}, {139}, {175}, {300}, {319}, {355}});
  auto once = identify_join_java(infer_sessions_java_coarse(trace), trace);
  auto twice = identify_join_java(once, trace);
  EXPECT_EQ(once.sessions, twice.sessions);
}

TEST(JavaLeave, FloodfillFlagDrop) {
  auto trace = java_trace({{0, true}, {27, true}, {63, true}, {99, true}, {100, false}});
  auto inf = infer_sessions(trace);
  ASSERT_EQ(inf.sessions.size(), 1u);
  EXPECT_EQ(inf.sessions[0].end, t0 + minutes(100));
  EXPECT_EQ(inf.sessions[0].end_quality, EndQuality::ExactLeave);
  EXPECT_EQ(inf.sessions[0].start_quality, StartQuality::ExactJoin);
}

TEST(JavaLeave, NonFloodfillNeverExact) {
  auto trace = java_trace({{0}, {27}, {63}, {99}, {100}});
  auto inf = infer_sessions(trace);
  for (const auto& s : inf.sessions) EXPECT_NE(s.end_quality, EndQuality::ExactLeave);
}

TEST(JavaLeave, InteriorLeaveSplits) {
  // Leave at 70, then a restart whose routines happen to continue the lattice.
  auto trace = java_trace({{0, true}, {27, true}, {63, true}, {70, false}, {80, true}, {99, true}, {135, true}});
  auto inf = identify_leave_java(infer_sessions_java_coarse(trace), trace);
  ASSERT_GE(inf.sessions.size(), 2u);
  EXPECT_EQ(inf.sessions[0].end, t0 + minutes(70));
  EXPECT_EQ(inf.sessions[0].end_quality, EndQuality::ExactLeave);
  EXPECT_EQ(inf.sessions[1].start, t0 + minutes(80));
  expect_partition(inf, trace.size());
}

TEST(CppCoarse, TwelveMinuteMultiplesStayTogether) {
  auto trace = cpp_trace({{minutes(0), N}, {minutes(12), D}, {minutes(36), E}, {minutes(72), D}});
  auto inf = infer_sessions_cpp(trace);
  EXPECT_EQ(inf.sessions.size(), 1u);
}

TEST(CppCoarse, OffLatticeGapSplits) {
  auto trace = cpp_trace({{minutes(0), N}, {minutes(12), D}, {minutes(29), E}});
  auto inf = infer_sessions_cpp(trace);
  EXPECT_EQ(inf.sessions.size(), 2u);
  EXPECT_EQ(inf.sessions[1].start, t0 + minutes(29));
}

TEST(CppCoarse, AlternatingFlagsAllRoutine) {
  std::vector<std::pair<Duration, CongestionFlag>> recs;
  for (int i = 0; i < 10; ++i) recs.push_back({minutes(12 * i), i % 2 ? D : E});
  auto inf = infer_sessions_cpp(cpp_trace(recs));
  for (std::size_t i = 1; i < recs.size(); ++i) EXPECT_TRUE(inf.routine_marks[i]);
  EXPECT_EQ(inf.sessions.size(), 1u);
}

TEST(CppJoin, HalfSecondSignature) {
  Duration first_routine = minutes(24) - Duration(500);
  auto trace = cpp_trace({{Duration(0), D}, {first_routine, E}, {first_routine + minutes(12), D}});
  auto inf = infer_sessions(trace);
  ASSERT_EQ(inf.sessions.size(), 1u);
  EXPECT_EQ(inf.sessions[0].start, t0);
  EXPECT_EQ(inf.sessions[0].start_quality, StartQuality::ExactJoin);
}

TEST(CppJoin, WholeMultipleIsNotAStartup) {
  auto trace = cpp_trace({{Duration(0), D}, {minutes(24), E}, {minutes(36), D}});
  auto inf = identify_join_cpp(infer_sessions_cpp(trace), trace);
  for (const auto& s : inf.sessions) EXPECT_NE(s.start_quality, StartQuality::ExactJoin);
}

TEST(CppLeave, GracefulTail) {
  Duration r1 = minutes(12) - Duration(500);
  auto trace = cpp_trace({{Duration(0), D}, {r1, E}, {r1 + minutes(12), G}});
  auto inf = infer_sessions(trace);
  ASSERT_EQ(inf.sessions.size(), 1u);
  EXPECT_EQ(inf.sessions[0].end, t0 + r1 + minutes(12));
  EXPECT_EQ(inf.sessions[0].end_quality, EndQuality::ExactLeave);
}

TEST(CppLeave, AbruptTailStaysCoarse) {
  Duration r1 = minutes(12) - Duration(500);
  auto trace = cpp_trace({{Duration(0), D}, {r1, E}, {r1 + minutes(12), D}});
  auto inf = infer_sessions(trace);
  ASSERT_EQ(inf.sessions.size(), 1u);
  EXPECT_EQ(inf.sessions[0].end_quality, EndQuality::CoarseOnly);
}

TEST(CppLeave, RecordsAfterGOpenNewSession) {
  Duration r1 = minutes(12) - Duration(500);
  Duration restart = minutes(100);
  auto trace = cpp_trace({{Duration(0), D}, {r1, E}, {r1 + minutes(12), G}, {restart, E},
                          {restart + minutes(36) - Duration(500), D}});
  auto inf = infer_sessions(trace);
  ASSERT_EQ(inf.sessions.size(), 2u);
  EXPECT_EQ(inf.sessions[0].end_quality, EndQuality::ExactLeave);
  EXPECT_EQ(inf.sessions[1].start, t0 + restart);
  expect_partition(inf, trace.size());
}

TEST(Firewalled, IntroducerChangesAreNotRoutine) {
  auto trace = java_trace({{0}, {27}, {40}, {63}, {99}});
  trace.records[0].reachability = Reachability::Undetermined;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    trace.records[i].reachability = i == 0 ? Reachability::Undetermined : Reachability::U;
    trace.records[i].addresses[0].ip_present = false;
    trace.records[i].addresses[0].introducer_set_id = i < 2 ? 1 : 2;
  }
  auto inf = identify_routine_firewalled_java(trace);
  EXPECT_FALSE(inf.routine_marks[2]);
  EXPECT_TRUE(inf.routine_marks[3]);
  ASSERT_EQ(inf.sessions.size(), 1u);
  EXPECT_EQ(inf.sessions[0].start, t0);
  EXPECT_EQ(inf.sessions[0].start_quality, StartQuality::ExactJoin);
}

TEST(Firewalled, NoIntroducerDataFallsBack) {
  auto trace = java_trace({{0}, {27}, {63}, {99}});
  EXPECT_FALSE(has_firewalled_indicators(trace));
  EXPECT_EQ(infer_sessions(trace).sessions, identify_join_java(identify_leave_java(infer_sessions_java_coarse(trace), trace), trace).sessions);
}

TEST(Case2, CoarseMergesPipelineSplits) {
  auto fx = generate_case_fixture(CaseLabel::Case2, 1);
  ASSERT_GE(fx.sim.ground_truth_sessions.size(), 2u);
  auto coarse = infer_sessions_java_coarse(fx.observed);
  auto full = infer_sessions(fx.observed, {}, fx.config.impl);
  EXPECT_LT(coarse.sessions.size(), full.sessions.size());
}

TEST(LosslessProperties, ExactMarksMatchTruth) {
  BehaviorSchedule sched{t0, {100, -45, 200, -60, 90, -160, 30, -50}, 2};
  for (auto c : {Category::JRFF, Category::JRnFF, Category::JU, Category::CR, Category::CU}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto cfg = config_for(c, RouterIdentity::from_label("lossless"));
      auto sim = simulate_router(sched, cfg, seed);
      auto observed = capture(sim, CaptureModel::fixed(1.0), seed);
      auto inf = infer_sessions(observed);
      expect_partition(inf, observed.size());
      for (const auto& s : inf.sessions) {
        bool ok_join = s.start_quality != StartQuality::ExactJoin;
        bool ok_leave = s.end_quality != EndQuality::ExactLeave;
        for (const auto& r : sim.full_trace.records) {
          ok_join = ok_join || (r.truth_kind == TruthKind::Initial && r.publish_time == s.start);
          // A one-record session is widened by 1 ms; its record is the leave.
          ok_leave = ok_leave || (r.truth_kind == TruthKind::Leave &&
                                  r.publish_time == observed.time(s.record_indices.back()));
        }
        EXPECT_TRUE(ok_join) << to_string(c) << " seed " << seed;
        EXPECT_TRUE(ok_leave) << to_string(c) << " seed " << seed;
      }
    }
  }
}

TEST(PatchedProperties, NoExactJoins) {
  BehaviorSchedule sched{t0, {100, -45, 200, -60}, 25};
  auto cfg = config_for(Category::JRFF, RouterIdentity::from_label("patched"), true);
  auto sim = simulate_router(sched, cfg, 3);
  ASSERT_GE(sim.ground_truth_sessions.size(), 50u);
  auto inf = infer_sessions(capture(sim, CaptureModel::fixed(1.0), 3));
  for (const auto& s : inf.sessions) EXPECT_NE(s.start_quality, StartQuality::ExactJoin);
}

TEST(Params, Validation) {
  InferenceParams p;
  EXPECT_NO_THROW(p.validate());
  p.cpp_tolerance = minutes(7);
  EXPECT_THROW(p.validate(), InvalidConfig);
}

TEST(Congruence, Residue) {
  EXPECT_EQ(residue(Duration(-1), Duration(10)), Duration(9));
  EXPECT_TRUE(congruent(minutes(24) - Duration(500), -Duration(500), minutes(12), Duration(200)));
  EXPECT_FALSE(congruent(minutes(24), -Duration(500), minutes(12), Duration(200)));
}
