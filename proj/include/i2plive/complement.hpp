#pragma once

#include <cstdint>
#include <set>

#include "i2plive/inference.hpp"
#include "i2plive/router_sim.hpp"

namespace i2plive {

struct ComplementParams {
  int T = 43;            // minutes
  int S_max = 10;        // minutes
  double E_S = 5.0;      // minutes
  int max_concat_k = 3;
  Duration cpp_leave_expectation = std::chrono::minutes(15);
  InferenceParams inference;

  Duration min_update_interval() const;  // 3T/16
  Duration max_update_interval() const;  // (3T + 4 S_max)/16
  Duration E_Dc() const;                 // (3T + 4 E_S)/16
  Duration E_f() const;                  // 45 s + (15T + 20 E_S)/32
};

SessionInference concatenate_sessions(const SessionInference& inference, const ObservedTrace& trace,
                                      ImplementationKind impl, const ComplementParams& params = {});
SessionInference supplement_join(const SessionInference& inference, const ObservedTrace& trace,
                                 ImplementationKind impl, const ComplementParams& params = {});
SessionInference supplement_leave(const SessionInference& inference, const ObservedTrace& trace,
                                  ImplementationKind impl, const ComplementParams& params = {});

// Concatenation, then join supplementation, then leave supplementation.
SessionInference complement_sessions(const SessionInference& inference, const ObservedTrace& trace,
                                     ImplementationKind impl, const ComplementParams& params = {});

// Solves for a C++ session start from one peer-test record and the first
// routine record. Returns the latest start t <= latest_start and > earliest
// that fits both lattices.
std::optional<TimePoint> solve_cpp_start(TimePoint peer_test, TimePoint first_routine,
                                         TimePoint earliest, TimePoint latest_start,
                                         const InferenceParams& params);

// Ground-truth case labelling. Uses the simulator annotations, so it is for
// fixtures and evaluation only.
struct DetectedCase {
  CaseLabel label;
  std::size_t truth_session;
};
std::vector<DetectedCase> detect_cases(const SimOutput& sim, const std::vector<std::size_t>& kept,
                                       const RouterConfig& config,
                                       const InferenceParams& params = {});
std::set<CaseLabel> case_set(const std::vector<DetectedCase>& cases);

struct CaseFixture {
  CaseLabel label;
  RouterConfig config;
  SimOutput sim;
  std::vector<std::size_t> kept;  // full-trace indices retained by capture
  ObservedTrace observed;
  std::size_t target_session = 0;  // ground-truth session the case concerns
  std::uint64_t attempts = 0;
};

CaseFixture generate_case_fixture(CaseLabel label, std::uint64_t seed);

}  // namespace i2plive
