#include <set>

#include "inference_internal.hpp"

namespace i2plive {

using detail::Segmentation;

namespace {

std::vector<std::size_t> mark_list(const std::vector<bool>& marks) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < marks.size(); ++i)
    if (marks[i]) out.push_back(i);
  return out;
}

// Every record between a presumed startup publication and the first routine
// must be a peer test (multiples of 71 min after it) or a forced publication
// one forced gap after the record before it.
bool explained_by_start(const ObservedTrace& trace, std::size_t r, std::size_t m,
                        const InferenceParams& p) {
  const Duration tol = p.cpp_join_tolerance;
  for (std::size_t x = r + 1; x < m; ++x) {
    Duration d = trace.time(x) - trace.time(r);
    bool peer = d > tol && congruent(d, Duration(0), p.peer_test_period, tol);
    Duration since = trace.time(x) - trace.time(x - 1);
    bool forced = since >= p.cpp_forced_gap - tol && since <= p.cpp_forced_gap + tol;
    if (!peer && !forced) return false;
  }
  return true;
}

// Whether record r can be read as a later publication of the session that
// started at s (a forced or peer-test publication).
bool continues_session(const ObservedTrace& trace, std::size_t s, std::size_t r, const InferenceParams& p) {
  const Duration tol = p.cpp_join_tolerance;
  if (r > 0) {
    Duration since = trace.time(r) - trace.time(r - 1);
    if (since >= p.cpp_forced_gap - tol && since <= p.cpp_forced_gap + tol) return true;
  }
  return r > s && congruent(trace.time(r) - trace.time(s), Duration(0), p.peer_test_period, tol);
}

}  // namespace

SessionInference infer_sessions_cpp(const ObservedTrace& trace, const InferenceParams& params) {
  const std::size_t n = trace.size();
  if (n == 0) return {};
  Segmentation seg;
  seg.start.assign(n, false);
  seg.exact_join.assign(n, false);
  seg.exact_leave.assign(n, false);
  seg.marks.assign(n, false);
  for (std::size_t i = 1; i < n; ++i)
    seg.marks[i] = trace.records[i].congestion != trace.records[i - 1].congestion;
  seg.start[0] = true;
  std::optional<std::size_t> prev;
  for (std::size_t i = 0; i < n; ++i) {
    if (!seg.marks[i]) continue;
    if (prev && !congruent(trace.time(i) - trace.time(*prev), Duration(0), params.cpp_period,
                           params.cpp_tolerance))
      seg.start[i] = true;
    prev = i;
  }
  return seg.build(trace, {});
}

SessionInference identify_leave_cpp(const SessionInference& inference, const ObservedTrace& trace) {
  const std::size_t n = trace.size();
  auto seg = Segmentation::from(inference, n);
  auto leave = cpp_leave_marks(trace);
  auto diags = inference.diagnostics;
  for (std::size_t l = 0; l < n; ++l) {
    if (!leave[l]) continue;
    seg.marks[l] = false;
    seg.exact_leave[l] = true;
    if (l + 1 < n && !seg.start[l + 1]) {
      seg.start[l + 1] = true;
      std::size_t end = seg.session_end(l + 1);
      bool has_routine = false;
      for (std::size_t j = l + 2; j < end; ++j) has_routine = has_routine || seg.marks[j];
      if (!has_routine)
        diags.push_back({CaseLabel::Case13, Severity::Corrected, 0, "leave mark split a coarse session"});
    }
  }
  return seg.build(trace, std::move(diags));
}

SessionInference identify_join_cpp(const SessionInference& inference, const ObservedTrace& trace,
                                   const InferenceParams& params) {
  const std::size_t n = trace.size();
  auto seg = Segmentation::from(inference, n);
  auto leave = cpp_leave_marks(trace);
  const Duration period = params.cpp_period;
  const Duration jtol = params.cpp_join_tolerance;
  const Duration startup = -params.cpp_initial_offset;
  auto marks = mark_list(seg.marks);

  struct Anchor {
    std::size_t r;
    std::size_t mark;
  };
  std::vector<Anchor> anchors;
  std::set<std::size_t> anchored;

  // A marked startup publication: the following mark sits 12n min - 0.5 s
  // after it.
  for (std::size_t j = 1; j < marks.size(); ++j) {
    std::size_t prev = marks[j - 1], m = marks[j];
    if (leave[prev] || leave[m]) continue;
    if (!congruent(trace.time(m) - trace.time(prev), startup, period, jtol)) continue;
    if (!explained_by_start(trace, prev, m, params)) continue;
    bool next_in_session = j + 1 < marks.size();
    for (std::size_t x = m + 1; next_in_session && x < marks[j + 1]; ++x) next_in_session = !leave[x];
    // Reject when the mark after continues the old lattice from prev instead.
    if (next_in_session &&
        !congruent(trace.time(marks[j + 1]) - trace.time(m), Duration(0), period, jtol) &&
        congruent(trace.time(marks[j + 1]) - trace.time(prev), Duration(0), period, jtol))
      continue;
    anchors.push_back({prev, m});
    anchored.insert(prev);
  }

  // An unmarked startup publication before a routine mark.
  for (std::size_t j = 0; j < marks.size(); ++j) {
    std::size_t m = marks[j];
    if (leave[m] || anchored.count(m)) continue;
    bool already = false;
    for (const auto& a : anchors) already = already || a.mark == m;
    if (already || m == 0) continue;
    std::size_t lo = j > 0 ? marks[j - 1] + 1 : 0;
    for (std::size_t l = m; l-- > lo;)
      if (leave[l]) {
        lo = l + 1;
        break;
      }
    const CongestionFlag level_before = trace.records[m - 1].congestion;
    for (std::size_t r = lo; r < m; ++r) {
      if (seg.marks[r] || leave[r]) continue;
      if (trace.records[r].congestion != level_before) continue;
      if (!congruent(trace.time(m) - trace.time(r), startup, period, jtol)) continue;
      if (!explained_by_start(trace, r, m, params)) continue;
      // The restart must not look like a publication of the running session.
      std::size_t s0 = r;
      while (s0 > 0 && !seg.start[s0]) --s0;
      for (const auto& a : anchors)
        if (a.r < r && a.r > s0) s0 = a.r;
      if (continues_session(trace, s0, r, params)) continue;
      anchors.push_back({r, m});
      break;
    }
  }

  for (const auto& a : anchors) detail::apply_anchor(seg, leave, a.r, a.mark);

  // The record after a leave opens the next session; it is the startup
  // publication unless a later mark in its session continues a 12-minute
  // lattice from it (which makes it a routine record).
  for (std::size_t l = 0; l + 1 < n; ++l) {
    if (!leave[l]) continue;
    std::size_t r = l + 1;
    if (leave[r]) continue;
    seg.start[r] = true;
    std::size_t end = seg.session_end(r);
    bool routine_lattice = false;
    for (std::size_t m = r + 1; m < end; ++m)
      if (seg.marks[m] && congruent(trace.time(m) - trace.time(r), Duration(0), period, jtol))
        routine_lattice = true;
    if (routine_lattice) continue;
    seg.marks[r] = false;
    // With the startup record lost, the first record is its forced or
    // peer-test follow-up and the join stays unpinned.
    std::optional<std::size_t> m;
    for (std::size_t x = r + 1; x < n && !m && !leave[x]; ++x)
      if (seg.marks[x]) m = x;
    bool follow_up = false;
    if (m && !congruent(trace.time(*m) - trace.time(r), startup, period, jtol))
      for (Duration lead : {params.cpp_forced_gap, params.peer_test_period})
        follow_up = follow_up || congruent(trace.time(*m) - trace.time(r) + lead, startup, period, jtol);
    seg.exact_join[r] = !follow_up;
  }
  return seg.build(trace, inference.diagnostics);
}

}  // namespace i2plive
