#include "inference_internal.hpp"

#include <stdexcept>

namespace i2plive {

void InferenceParams::validate() const {
  for (const Window* w : {&java_routine_window, &java_startup_window_A, &java_startup_window_B})
    if (w->lo > w->hi) throw InvalidConfig("inference window is empty");
  if (cpp_period <= Duration(0)) throw InvalidConfig("cpp_period must be positive");
  if (cpp_tolerance * 2 >= cpp_period) throw InvalidConfig("cpp_tolerance must be below half the period");
  if (cpp_join_tolerance >= cpp_initial_offset)
    throw InvalidConfig("cpp_join_tolerance must be below cpp_initial_offset");
}

Severity severity_of(CaseLabel c) {
  switch (c) {
    case CaseLabel::Case7: return Severity::BoundedBias;
    case CaseLabel::Case11:
    case CaseLabel::Case12: return Severity::Uncorrectable;
    default: return Severity::Corrected;
  }
}

const char* to_string(CaseLabel c) {
  static const char* names[] = {"Case1",  "Case2",  "Case3",  "Case4",  "Case5",  "Case6",
                                "Case7",  "Case8",  "Case9",  "Case10", "Case11", "Case12",
                                "Case13", "Case14", "Case15", "Case16"};
  return names[static_cast<int>(c) - 1];
}

const char* to_string(Severity s) {
  switch (s) {
    case Severity::Corrected: return "Corrected";
    case Severity::BoundedBias: return "BoundedBias";
    case Severity::Uncorrectable: return "Uncorrectable";
  }
  return "?";
}

CaseLabel case_from_int(int id) {
  if (id < 1 || id > 16) throw std::invalid_argument("unsupported case id " + std::to_string(id));
  return static_cast<CaseLabel>(id);
}

Duration residue(Duration d, Duration period) {
  auto r = d.count() % period.count();
  if (r < 0) r += period.count();
  return Duration(r);
}

bool congruent(Duration d, Duration target, Duration period, Duration tol) {
  Duration r = residue(d - target, period);
  return r <= tol || period - r <= tol;
}

namespace {

int vote(const std::vector<RouterAddressSummary>& addresses) {
  // +1 Java, -1 C++, 0 no evidence. Stream transports decide first.
  for (const auto& a : addresses) {
    if (a.protocol != TransportProtocol::NTCP2) continue;
    if (a.cost == 3) return -1;
    if (a.cost >= 10 && a.cost <= 12) return 1;
  }
  bool ssu1 = false;
  for (const auto& a : addresses)
    if (a.protocol == TransportProtocol::SSU) ssu1 = true;
  for (const auto& a : addresses) {
    if (a.protocol == TransportProtocol::NTCP2) continue;
    if (a.cost >= 4 && a.cost <= 7) return 1;
    if (a.cost == 8) return (a.protocol == TransportProtocol::SSU2 && !ssu1) ? -1 : 1;
  }
  return 0;
}

ImplementationKind decide(int java, int cpp, bool any_address) {
  if (!any_address) throw UndeterminableImplementation("trace carries no address data");
  if (java == cpp)
    throw UndeterminableImplementation(java == 0 ? "no address matches a known cost profile"
                                                 : "conflicting implementation evidence");
  return java > cpp ? ImplementationKind::JavaI2P : ImplementationKind::CppI2P;
}

template <typename Records>
ImplementationKind identify(const Records& records) {
  int java = 0, cpp = 0;
  bool any = false;
  for (const auto& r : records) {
    if (!r.addresses.empty()) any = true;
    int v = vote(r.addresses);
    if (v > 0) ++java;
    if (v < 0) ++cpp;
  }
  return decide(java, cpp, any);
}

}  // namespace

ImplementationKind identify_implementation(const ObservedTrace& trace) {
  return identify(trace.records);
}

ImplementationKind identify_implementation(const RouterTrace& trace) {
  return identify(trace.records);
}

bool has_firewalled_indicators(const ObservedTrace& trace) {
  for (const auto& r : trace.records)
    if (r.introducer_set_id() != 0 || r.reachability == Reachability::Undetermined) return true;
  return false;
}

std::vector<bool> java_leave_marks(const ObservedTrace& trace) {
  std::vector<bool> out(trace.size(), false);
  bool floodfill_history = false;
  for (const auto& r : trace.records) floodfill_history = floodfill_history || r.floodfill_flag;
  if (!floodfill_history) return out;
  for (std::size_t i = 0; i < trace.size(); ++i) out[i] = !trace.records[i].floodfill_flag;
  return out;
}

std::vector<bool> cpp_leave_marks(const ObservedTrace& trace) {
  std::vector<bool> out(trace.size(), false);
  for (std::size_t i = 0; i < trace.size(); ++i)
    out[i] = trace.records[i].congestion == CongestionFlag::G;
  return out;
}

std::vector<bool> leave_marks(const ObservedTrace& trace, ImplementationKind impl) {
  return impl == ImplementationKind::JavaI2P ? java_leave_marks(trace) : cpp_leave_marks(trace);
}

namespace detail {

Segmentation Segmentation::from(const SessionInference& inf, std::size_t n) {
  Segmentation s;
  s.start.assign(n, false);
  s.exact_join.assign(n, false);
  s.exact_leave.assign(n, false);
  s.marks = inf.routine_marks;
  s.marks.resize(n, false);
  for (const auto& session : inf.sessions) {
    if (session.record_indices.empty()) continue;
    auto first = session.record_indices.front();
    auto last = session.record_indices.back();
    s.start[first] = true;
    if (session.start_quality == StartQuality::ExactJoin) s.exact_join[first] = true;
    if (session.end_quality == EndQuality::ExactLeave) s.exact_leave[last] = true;
  }
  if (n > 0) s.start[0] = true;
  return s;
}

SessionInference Segmentation::build(const ObservedTrace& trace,
                                     std::vector<CaseDiagnostic> diagnostics) const {
  SessionInference out;
  out.routine_marks = marks;
  out.diagnostics = std::move(diagnostics);
  const std::size_t n = trace.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || start[i]) {
      OnlineSession s;
      s.start = trace.time(i);
      s.start_quality = exact_join[i] ? StartQuality::ExactJoin : StartQuality::CoarseOnly;
      out.sessions.push_back(s);
    }
    auto& s = out.sessions.back();
    s.record_indices.push_back(i);
    s.end = trace.time(i);
    s.end_quality = exact_leave[i] ? EndQuality::ExactLeave : EndQuality::CoarseOnly;
  }
  // A single-record session still needs start < end.
  for (auto& s : out.sessions)
    if (s.end <= s.start) s.end = s.start + Duration(1);
  return out;
}

std::size_t Segmentation::session_end(std::size_t i) const {
  std::size_t j = i + 1;
  while (j < start.size() && !start[j]) ++j;
  return j;
}

void apply_anchor(Segmentation& seg, const std::vector<bool>& leave, std::size_t r,
                  std::optional<std::size_t> mark) {
  const std::size_t n = seg.start.size();
  if (mark) {
    // p: the last routine or leave mark before the anchor.
    std::ptrdiff_t p = -1;
    for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(r) - 1; j >= 0; --j)
      if (seg.marks[j] || leave[j]) {
        p = j;
        break;
      }
    for (std::size_t j = static_cast<std::size_t>(p + 1); j <= *mark && j < n; ++j) {
      if (j == 0) continue;
      bool protected_cut = leave[j - 1] || seg.exact_join[j];
      if (!protected_cut) seg.start[j] = false;
    }
  }
  seg.start[r] = true;
  seg.exact_join[r] = true;
  seg.marks[r] = false;
}

}  // namespace detail

SessionInference infer_sessions(const ObservedTrace& trace, const InferenceParams& params,
                                std::optional<ImplementationKind> impl) {
  params.validate();
  if (trace.size() == 0) return {};
  ImplementationKind kind = impl ? *impl : identify_implementation(trace);
  if (kind == ImplementationKind::JavaI2P) {
    if (has_firewalled_indicators(trace)) return identify_routine_firewalled_java(trace, params);
    auto inf = infer_sessions_java_coarse(trace, params);
    inf = identify_leave_java(inf, trace);
    return identify_join_java(inf, trace, params);
  }
  auto inf = infer_sessions_cpp(trace, params);
  inf = identify_leave_cpp(inf, trace);
  return identify_join_cpp(inf, trace, params);
}

}  // namespace i2plive
