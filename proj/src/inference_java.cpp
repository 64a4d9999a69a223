#include <algorithm>

#include "inference_internal.hpp"

namespace i2plive {

using detail::Segmentation;

namespace {

struct CandidateFilter {
  std::vector<bool> candidate;  // may be routine
  bool relaxed = false;          // widen the window per interposed non-candidate
};

std::optional<std::size_t> partner(const ObservedTrace& trace, std::size_t a,
                                   const InferenceParams& p, const CandidateFilter& f) {
  const auto& w = p.java_routine_window;
  std::size_t skipped = 0;
  for (std::size_t b = a + 1; b < trace.size(); ++b) {
    Duration d = trace.time(b) - trace.time(a);
    if (!f.candidate[b]) {
      ++skipped;
      if (!f.relaxed && d > w.hi) break;
      continue;
    }
    Duration hi = w.hi + (f.relaxed ? p.min_republish_delay * static_cast<long>(skipped) : Duration(0));
    if (d < w.lo) continue;
    if (d <= hi) return b;
    if (!f.relaxed) break;
    // Later candidates only widen by interposed records, so the first
    // candidate beyond the widened bound ends the search.
    break;
  }
  return std::nullopt;
}

SessionInference coarse_java(const ObservedTrace& trace, const InferenceParams& p,
                             const CandidateFilter& f) {
  const std::size_t n = trace.size();
  Segmentation seg;
  seg.start.assign(n, false);
  seg.exact_join.assign(n, false);
  seg.exact_leave.assign(n, false);
  seg.marks.assign(n, false);
  if (n == 0) return {};

  std::vector<std::vector<std::size_t>> chains;
  std::size_t i = 0;
  while (i < n) {
    std::optional<std::size_t> a, b;
    for (std::size_t k = i; k < n; ++k) {
      if (!f.candidate[k]) continue;
      if (auto q = partner(trace, k, p, f)) {
        a = k;
        b = q;
        break;
      }
    }
    if (!a) break;
    std::vector<std::size_t> chain{*a};
    std::optional<std::size_t> next = b;
    while (next) {
      chain.push_back(*next);
      next = partner(trace, *next, p, f);
    }
    for (auto m : chain) seg.marks[m] = true;
    i = chain.back() + 1;
    chains.push_back(std::move(chain));
  }

  seg.start[0] = true;
  const Duration hi = p.java_routine_window.hi;
  for (std::size_t k = 0; k < chains.size(); ++k) {
    std::size_t last = chains[k].back();
    std::size_t limit = k + 1 < chains.size() ? chains[k + 1].front() : n;
    // Records within one routine interval of the last mark stay with it.
    std::size_t cut = limit;
    for (std::size_t j = last + 1; j < limit; ++j)
      if (trace.time(j) - trace.time(last) >= hi) {
        cut = j;
        break;
      }
    if (cut < n) seg.start[cut] = true;
  }
  return seg.build(trace, {});
}

CandidateFilter plain_filter(std::size_t n) { return {std::vector<bool>(n, true), false}; }

CandidateFilter firewalled_filter(const ObservedTrace& trace) {
  CandidateFilter f;
  f.relaxed = true;
  f.candidate.assign(trace.size(), false);
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const auto& r = trace.records[i];
    f.candidate[i] = r.reachability != Reachability::Undetermined &&
                     r.introducer_set_id() == trace.records[i - 1].introducer_set_id();
  }
  return f;
}

std::optional<std::size_t> next_mark(const std::vector<bool>& marks, std::size_t from) {
  for (std::size_t j = from; j < marks.size(); ++j)
    if (marks[j]) return j;
  return std::nullopt;
}

}  // namespace

SessionInference infer_sessions_java_coarse(const ObservedTrace& trace, const InferenceParams& params) {
  return coarse_java(trace, params, plain_filter(trace.size()));
}

SessionInference identify_leave_java(const SessionInference& inference, const ObservedTrace& trace) {
  const std::size_t n = trace.size();
  auto seg = Segmentation::from(inference, n);
  auto leave = java_leave_marks(trace);
  const InferenceParams defaults;
  std::vector<CaseDiagnostic> diags = inference.diagnostics;
  for (std::size_t l = 0; l < n; ++l) {
    if (!leave[l]) continue;
    seg.marks[l] = false;
    seg.exact_leave[l] = true;
    // A leave record cut off by a long gap (lost routines) still closes the
    // session before it.
    if (l > 0 && seg.start[l] && !leave[l - 1] &&
        trace.time(l) - trace.time(l - 1) <= defaults.java_routine_window.hi * 2 + defaults.min_republish_delay)
      seg.start[l] = false;
    if (l + 1 < n && !seg.start[l + 1]) {
      seg.start[l + 1] = true;
      // A split-off segment without any routine mark is a brief return.
      std::size_t end = seg.session_end(l + 1);
      bool has_routine = false;
      for (std::size_t j = l + 1; j < end; ++j) has_routine = has_routine || seg.marks[j];
      CaseLabel c = has_routine ? CaseLabel::Case4 : CaseLabel::Case5;
      diags.push_back({c, severity_of(c), 0, "leave mark split a coarse session"});
    }
  }
  auto out = seg.build(trace, std::move(diags));
  return out;
}

SessionInference identify_join_java(const SessionInference& inference, const ObservedTrace& trace,
                                    const InferenceParams& params) {
  const std::size_t n = trace.size();
  auto seg = Segmentation::from(inference, n);
  auto leave = java_leave_marks(trace);
  std::vector<CaseDiagnostic> diags = inference.diagnostics;

  bool undetermined_mode = false;
  for (const auto& r : trace.records)
    undetermined_mode = undetermined_mode || r.reachability == Reachability::Undetermined;

  struct Anchor {
    std::size_t r;
    std::optional<std::size_t> mark;
  };
  std::vector<Anchor> anchors;

  if (undetermined_mode) {
    // Firewalled routers flag their first publication explicitly.
    for (std::size_t r = 0; r < n; ++r)
      if (trace.records[r].reachability == Reachability::Undetermined && !leave[r])
        anchors.push_back({r, next_mark(seg.marks, r + 1)});
  } else {
    std::optional<std::size_t> prev_mark;
    std::optional<std::size_t> last_leave;
    for (std::size_t m = 0; m < n; ++m) {
      if (leave[m]) last_leave = m;
      if (!seg.marks[m]) continue;
      std::size_t lo = prev_mark.value_or(0);
      if (last_leave && *last_leave + 1 > lo) lo = *last_leave + 1;
      // Latest record whose gap to the routine mark fits a startup window.
      for (std::size_t r = m; r-- > lo;) {
        if (leave[r]) continue;
        Duration d = trace.time(m) - trace.time(r);
        if (params.java_startup_window_A.contains(d) || params.java_startup_window_B.contains(d)) {
          anchors.push_back({r, m});
          break;
        }
      }
      prev_mark = m;
    }
    // A startup record strictly between two marks breaks their link. If
    // that link was the earlier mark's only routine evidence, the earlier
    // mark was a startup or stray record, and any anchor built on it goes.
    const auto& w = params.java_routine_window;
    std::vector<std::size_t> false_marks;
    for (const auto& a : anchors) {
      std::optional<std::size_t> p;
      for (std::size_t j = *a.mark; j-- > 0;)
        if (seg.marks[j]) {
          p = j;
          break;
        }
      if (!p || *p >= a.r) continue;
      std::optional<std::size_t> pp;
      for (std::size_t j = *p; j-- > 0;)
        if (seg.marks[j]) {
          pp = j;
          break;
        }
      bool linked_before = pp && w.contains(trace.time(*p) - trace.time(*pp));
      if (!linked_before && w.contains(trace.time(*a.mark) - trace.time(*p))) false_marks.push_back(*p);
    }
    for (auto f : false_marks) {
      seg.marks[f] = false;
      std::erase_if(anchors, [&](const Anchor& a) { return a.mark == f; });
    }
  }

  for (const auto& a : anchors) {
    if (!seg.start[a.r] && a.mark) {
      bool was_mark = seg.marks[a.r];
      std::optional<std::size_t> prev;
      for (std::size_t j = *a.mark; j-- > 0;)
        if (j != a.r && (seg.marks[j] || leave[j]) && j < *a.mark) {
          prev = j;
          break;
        }
      CaseLabel c;
      if (was_mark) {
        c = (prev && leave[*prev]) ? CaseLabel::Case3 : CaseLabel::Case1;
      } else if (prev && *prev > a.r) {
        c = CaseLabel::Case1;
      } else {
        bool chained = prev && seg.marks[*prev] && !seg.start[*a.mark];
        bool after_leave = prev && leave[*prev];
        c = after_leave ? CaseLabel::Case4 : (chained ? CaseLabel::Case2 : CaseLabel::Case1);
      }
      diags.push_back({c, severity_of(c), 0, "join behavior re-anchored a session"});
    }
    detail::apply_anchor(seg, leave, a.r, a.mark);
  }

  // The first record after a leave opens the next session. It is the
  // startup publication unless it already acts as a routine record.
  for (std::size_t l = 0; l + 1 < n; ++l) {
    if (!leave[l]) continue;
    std::size_t r = l + 1;
    if (leave[r] || seg.marks[r]) continue;
    seg.start[r] = true;
    seg.exact_join[r] = true;
  }
  return seg.build(trace, std::move(diags));
}

SessionInference identify_routine_firewalled_java(const ObservedTrace& trace,
                                                  const InferenceParams& params) {
  bool introducer_data = false;
  for (const auto& r : trace.records)
    introducer_data = introducer_data || r.introducer_set_id() != 0 ||
                      r.reachability == Reachability::Undetermined;
  SessionInference inf = introducer_data ? coarse_java(trace, params, firewalled_filter(trace))
                                         : infer_sessions_java_coarse(trace, params);
  inf = identify_leave_java(inf, trace);
  return identify_join_java(inf, trace, params);
}

}  // namespace i2plive
