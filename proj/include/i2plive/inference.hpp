#pragma once

#include <optional>
#include <string>
#include <vector>

#include "i2plive/trace_model.hpp"

namespace i2plive {

struct Window {
  Duration lo{};
  Duration hi{};
  bool contains(Duration d) const { return d >= lo && d <= hi; }
};

struct InferenceParams {
  Window java_routine_window{std::chrono::minutes(32), std::chrono::minutes(43)};
  Window java_startup_window_A{std::chrono::minutes(24), std::chrono::minutes(32)};
  Window java_startup_window_B{std::chrono::minutes(17), std::chrono::minutes(23)};
  Duration min_republish_delay = std::chrono::minutes(9);
  Duration cpp_period = std::chrono::minutes(12);
  Duration cpp_initial_offset = std::chrono::milliseconds(500);
  // Chaining tolerance for routine candidates.
  Duration cpp_tolerance = std::chrono::seconds(2);
  // Tolerance for the -500 ms startup signature. It must stay well below
  // cpp_initial_offset or an exact 12n-minute gap would also match.
  Duration cpp_join_tolerance = std::chrono::milliseconds(200);
  Duration peer_test_period = std::chrono::minutes(71);
  Duration cpp_forced_gap = std::chrono::minutes(30);

  void validate() const;
};

enum class CaseLabel {
  Case1 = 1, Case2, Case3, Case4, Case5, Case6, Case7, Case8,
  Case9, Case10, Case11, Case12, Case13, Case14, Case15, Case16
};
enum class Severity { Corrected, BoundedBias, Uncorrectable };

Severity severity_of(CaseLabel c);
const char* to_string(CaseLabel c);
const char* to_string(Severity s);
CaseLabel case_from_int(int id);

struct CaseDiagnostic {
  CaseLabel label;
  Severity severity;
  std::size_t session;  // index into the session list at the time of emission
  std::string note;
};

struct SessionInference {
  std::vector<OnlineSession> sessions;
  std::vector<bool> routine_marks;
  std::vector<CaseDiagnostic> diagnostics;
};

class UndeterminableImplementation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ImplementationKind identify_implementation(const ObservedTrace& trace);
ImplementationKind identify_implementation(const RouterTrace& trace);

SessionInference infer_sessions_java_coarse(const ObservedTrace& trace, const InferenceParams& params = {});
SessionInference identify_join_java(const SessionInference& inference, const ObservedTrace& trace,
                                    const InferenceParams& params = {});
SessionInference identify_leave_java(const SessionInference& inference, const ObservedTrace& trace);
// Coarse pass restricted to introducer-stable records, followed by the leave
// and join passes.
SessionInference identify_routine_firewalled_java(const ObservedTrace& trace,
                                                  const InferenceParams& params = {});

SessionInference infer_sessions_cpp(const ObservedTrace& trace, const InferenceParams& params = {});
SessionInference identify_join_cpp(const SessionInference& inference, const ObservedTrace& trace,
                                   const InferenceParams& params = {});
SessionInference identify_leave_cpp(const SessionInference& inference, const ObservedTrace& trace);

// Full fine-grained inference: implementation identification (unless given),
// coarse pass, leave pass, join pass.
SessionInference infer_sessions(const ObservedTrace& trace, const InferenceParams& params = {},
                                std::optional<ImplementationKind> impl = std::nullopt);

// Helpers shared with the complement module.
bool has_firewalled_indicators(const ObservedTrace& trace);
std::vector<bool> java_leave_marks(const ObservedTrace& trace);
std::vector<bool> cpp_leave_marks(const ObservedTrace& trace);
std::vector<bool> leave_marks(const ObservedTrace& trace, ImplementationKind impl);
// Residue of d modulo `period`, in [0, period).
Duration residue(Duration d, Duration period);
// True when d is congruent to `target` modulo `period` within `tol`.
bool congruent(Duration d, Duration target, Duration period, Duration tol);

}  // namespace i2plive
