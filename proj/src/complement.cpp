#include "i2plive/complement.hpp"

#include <algorithm>

namespace i2plive {

Duration ComplementParams::min_update_interval() const { return update_interval(T, 0.0); }
Duration ComplementParams::max_update_interval() const { return update_interval(T, S_max); }
Duration ComplementParams::E_Dc() const { return minutes_f((3.0 * T + 4.0 * E_S) / 16.0); }
Duration ComplementParams::E_f() const {
  return std::chrono::seconds(45) + minutes_f((15.0 * T + 20.0 * E_S) / 32.0);
}

namespace {

std::vector<std::size_t> session_marks(const OnlineSession& s, const std::vector<bool>& marks) {
  std::vector<std::size_t> out;
  for (auto i : s.record_indices)
    if (marks[i]) out.push_back(i);
  return out;
}

void refresh_bounds(OnlineSession& s, const ObservedTrace& trace) {
  if (s.record_indices.empty()) return;
  if (s.start_quality == StartQuality::CoarseOnly) s.start = trace.time(s.record_indices.front());
  if (s.end_quality == EndQuality::CoarseOnly) s.end = trace.time(s.record_indices.back());
  if (s.end <= s.start) s.end = s.start + Duration(1);
}

void merge_into(OnlineSession& a, const OnlineSession& b) {
  a.record_indices.insert(a.record_indices.end(), b.record_indices.begin(), b.record_indices.end());
  a.end = b.end;
  a.end_quality = b.end_quality;
}

// The supplement windows that identify a startup publication displaced by a
// lost first routine record: 7 D_c or 90 s + 6 D_c.
bool in_extended_window(Duration d, const ComplementParams& p) {
  Duration lo = p.min_update_interval(), hi = p.max_update_interval();
  if (d >= lo * 7 && d <= hi * 7) return true;
  Duration off = std::chrono::seconds(90);
  return d >= off + lo * 6 && d <= off + hi * 6;
}

bool java_concat_ok(Duration gap, std::size_t interposed, const ComplementParams& p) {
  const Duration lo = p.min_update_interval(), hi = p.max_update_interval();
  const Duration slack = p.inference.min_republish_delay * static_cast<long>(interposed);
  for (int k = 2; k <= p.max_concat_k; ++k) {
    if (gap >= lo * (4 * k) && gap <= hi * (4 * k) + slack) return true;
  }
  return false;
}

// Startup times t (lattice of `first_routine`, minus the initial offset) for
// which every record of `seg` is a forced or peer-test publication of the
// session opened at t. The first record is taken as t + 30 min or t + 71 min.
std::optional<TimePoint> startup_chain(const std::vector<std::size_t>& seg, const ObservedTrace& trace,
                                       TimePoint first_routine, const InferenceParams& p) {
  if (seg.empty()) return std::nullopt;
  const Duration tol = p.cpp_join_tolerance;
  for (Duration lead : {p.cpp_forced_gap, p.peer_test_period}) {
    TimePoint t = trace.time(seg.front()) - lead;
    if (!congruent(first_routine - t, -p.cpp_initial_offset, p.cpp_period, tol)) continue;
    bool ok = true;
    for (std::size_t k = 1; ok && k < seg.size(); ++k) {
      Duration since = trace.time(seg[k]) - trace.time(seg[k - 1]);
      bool forced = std::chrono::abs(since - p.cpp_forced_gap) <= tol;
      bool peer = congruent(trace.time(seg[k]) - t, Duration(0), p.peer_test_period, tol);
      ok = forced || peer;
    }
    if (ok) return t;
  }
  return std::nullopt;
}

}  // namespace

SessionInference concatenate_sessions(const SessionInference& inference, const ObservedTrace& trace,
                                      ImplementationKind impl, const ComplementParams& params) {
  SessionInference out = inference;
  const auto& marks = out.routine_marks;
  const bool firewalled = has_firewalled_indicators(trace);
  auto& ss = out.sessions;

  if (impl == ImplementationKind::JavaI2P) {
    for (std::size_t i = 0; i + 1 < ss.size();) {
      OnlineSession& a = ss[i];
      const OnlineSession& b = ss[i + 1];
      auto ma = session_marks(a, marks), mb = session_marks(b, marks);
      // A tail fragment closed by a leave record but without routine marks
      // (its routines were lost) offers its first record instead.
      bool tail_fragment = mb.empty() && b.end_quality == EndQuality::ExactLeave && !b.record_indices.empty();
      bool eligible = b.start_quality != StartQuality::ExactJoin && a.end_quality != EndQuality::ExactLeave &&
                      !ma.empty() && (!mb.empty() || tail_fragment);
      if (eligible) {
        std::size_t last = ma.back(), first = mb.empty() ? b.record_indices.front() : mb.front();
        Duration gap = trace.time(first) - trace.time(last);
        // A lone leave record follows the last routine by less than one
        // routine interval per lost routine.
        bool lone_leave = tail_fragment && b.record_indices.size() == 1 &&
                          gap <= params.max_update_interval() * (4 * params.max_concat_k);
        bool displaced_start = false;
        for (std::size_t x = last + 1; x < first; ++x) {
          if (firewalled) {
            displaced_start = displaced_start || trace.records[x].reachability == Reachability::Undetermined;
          } else {
            displaced_start = displaced_start || in_extended_window(trace.time(first) - trace.time(x), params);
          }
        }
        std::size_t interposed = firewalled ? first - last - 1 : 0;
        if (!displaced_start && (lone_leave || java_concat_ok(gap, interposed, params))) {
          merge_into(a, b);
          ss.erase(ss.begin() + static_cast<long>(i) + 1);
          refresh_bounds(a, trace);
          out.diagnostics.push_back({CaseLabel::Case8, Severity::Corrected, i, "sessions concatenated"});
          continue;
        }
      }
      ++i;
    }
    return out;
  }

  const Duration period = params.inference.cpp_period;
  const Duration tol = params.inference.cpp_tolerance;
  for (std::size_t i = 0; i + 1 < ss.size();) {
    auto ma = session_marks(ss[i], marks);
    {
      // A segment made only of publications that follow a lost startup
      // record belongs to the next session.
      const OnlineSession& a = ss[i];
      const OnlineSession& b = ss[i + 1];
      auto mb = session_marks(b, marks);
      if (a.start_quality == StartQuality::CoarseOnly && a.end_quality != EndQuality::ExactLeave &&
          b.start_quality == StartQuality::CoarseOnly && !mb.empty()) {
        auto t = startup_chain(a.record_indices, trace, trace.time(mb.front()), params.inference);
        TimePoint before = i > 0 ? trace.time(ss[i - 1].record_indices.back()) : TimePoint::min();
        if (t && *t > before) {
          for (auto m : ma) out.routine_marks[m] = false;
          OnlineSession merged = a;
          merge_into(merged, b);
          merged.start_quality = StartQuality::CoarseOnly;
          ss[i] = std::move(merged);
          ss.erase(ss.begin() + static_cast<long>(i) + 1);
          refresh_bounds(ss[i], trace);
          out.diagnostics.push_back({CaseLabel::Case15, Severity::Corrected, i, "startup publications joined"});
          continue;
        }
      }
    }
    if (ma.empty() || ss[i].end_quality == EndQuality::ExactLeave) {
      ++i;
      continue;
    }
    auto on_lattice = [&](std::size_t m) {
      return congruent(trace.time(m) - trace.time(ma.back()), Duration(0), period, tol);
    };
    // A G leave record also sits on the 12-minute lattice.
    auto lattice_points = [&](const OnlineSession& s) {
      auto pts = session_marks(s, marks);
      if (s.end_quality == EndQuality::ExactLeave && !s.record_indices.empty())
        pts.push_back(s.record_indices.back());
      return pts;
    };
    const OnlineSession& b = ss[i + 1];
    auto mb = lattice_points(b);
    if (b.start_quality != StartQuality::ExactJoin && !mb.empty() && on_lattice(mb.front())) {
      merge_into(ss[i], b);
      ss.erase(ss.begin() + static_cast<long>(i) + 1);
      refresh_bounds(ss[i], trace);
      out.diagnostics.push_back({CaseLabel::Case14, Severity::Corrected, i, "sessions concatenated"});
      continue;
    }
    // The tail marks of the first session may be non-routine records that
    // only mimic a flag change after a lost routine. Strip them and retry
    // against the last real mark, or against the startup record itself.
    if (b.start_quality != StartQuality::ExactJoin && !mb.empty()) {
      const TimePoint f = trace.time(mb.front());
      std::size_t keep = ma.size();
      while (keep > 0 && !congruent(f - trace.time(ma[keep - 1]), Duration(0), period, tol)) --keep;
      const std::size_t first = ss[i].record_indices.front();
      bool startup_fit = keep == 0 && ss[i].start_quality == StartQuality::CoarseOnly &&
                         congruent(f - trace.time(first), -params.inference.cpp_initial_offset, period,
                                   params.inference.cpp_join_tolerance);
      if ((keep > 0 && keep < ma.size()) || startup_fit) {
        for (std::size_t k = keep; k < ma.size(); ++k) out.routine_marks[ma[k]] = false;
        merge_into(ss[i], b);
        ss.erase(ss.begin() + static_cast<long>(i) + 1);
        if (startup_fit) {
          ss[i].start = trace.time(first);
          ss[i].start_quality = StartQuality::SupplementedJoin;
        }
        refresh_bounds(ss[i], trace);
        out.diagnostics.push_back({CaseLabel::Case14, Severity::Corrected, i, "false routine marks removed"});
        continue;
      }
    }
    // Marks of the next session that are this session's peer tests or
    // forced publications after a lost routine.
    if (b.start_quality != StartQuality::ExactJoin && !mb.empty()) {
      const auto& ip = params.inference;
      const bool anchored = ss[i].start_quality == StartQuality::ExactJoin;
      auto continues = [&](std::size_t x) {
        if (x > 0 && std::chrono::abs(trace.time(x) - trace.time(x - 1) - ip.cpp_forced_gap) <= ip.cpp_join_tolerance)
          return true;
        // Forced 30 min after a lost lattice routine.
        Duration d = trace.time(x) - trace.time(ma.back());
        if (d >= ip.cpp_forced_gap && congruent(d, ip.cpp_forced_gap, period, ip.cpp_join_tolerance)) return true;
        return anchored && trace.time(x) > ss[i].start &&
               congruent(trace.time(x) - ss[i].start, Duration(0), ip.peer_test_period, ip.cpp_join_tolerance);
      };
      bool explained = true;
      for (auto m : mb) explained = explained && (on_lattice(m) || continues(m));
      if (explained && !on_lattice(mb.front())) {
        for (auto m : mb)
          if (!on_lattice(m)) out.routine_marks[m] = false;
        merge_into(ss[i], b);
        ss.erase(ss.begin() + static_cast<long>(i) + 1);
        refresh_bounds(ss[i], trace);
        out.diagnostics.push_back({CaseLabel::Case14, Severity::Corrected, i, "false routine marks removed"});
        continue;
      }
    }
    // Three-way: a lost routine let a non-routine record mimic a flag change,
    // splitting one session into three.
    if (i + 2 < ss.size()) {
      const OnlineSession& c = ss[i + 2];
      auto mc = lattice_points(c);
      bool middle_false = !mb.empty();
      for (auto m : mb) middle_false = middle_false && !on_lattice(m);
      if (middle_false && b.start_quality != StartQuality::ExactJoin &&
          b.end_quality != EndQuality::ExactLeave && c.start_quality != StartQuality::ExactJoin &&
          !mc.empty() && on_lattice(mc.front())) {
        for (auto m : mb) out.routine_marks[m] = false;
        OnlineSession bc = b;
        merge_into(ss[i], bc);
        merge_into(ss[i], c);
        ss.erase(ss.begin() + static_cast<long>(i) + 1, ss.begin() + static_cast<long>(i) + 3);
        refresh_bounds(ss[i], trace);
        out.diagnostics.push_back({CaseLabel::Case14, Severity::Corrected, i, "three-way split repaired"});
        continue;
      }
    }
    ++i;
  }
  return out;
}

std::optional<TimePoint> solve_cpp_start(TimePoint peer_test, TimePoint first_routine,
                                         TimePoint earliest, TimePoint latest_start,
                                         const InferenceParams& p) {
  // Peer tests repeat every 71 min and routines every 12 min, so the start is
  // unique within 71 x 12 = 852 min.
  const int max_j = static_cast<int>(p.cpp_period / std::chrono::minutes(1));
  std::optional<TimePoint> best;
  for (int j = 1; j <= max_j; ++j) {
    TimePoint t = peer_test - p.peer_test_period * j;
    if (t <= earliest) break;
    if (t > latest_start) continue;
    if (!congruent(first_routine - t, -p.cpp_initial_offset, p.cpp_period, p.cpp_join_tolerance)) continue;
    if (!best || t > *best) best = t;
  }
  return best;
}

SessionInference supplement_join(const SessionInference& inference, const ObservedTrace& trace,
                                 ImplementationKind impl, const ComplementParams& params) {
  SessionInference out = inference;
  auto& ss = out.sessions;
  const auto leave = leave_marks(trace, impl);
  const auto& marks = out.routine_marks;

  for (std::size_t i = 0; i < ss.size(); ++i) {
    OnlineSession& s = ss[i];
    if (s.start_quality != StartQuality::CoarseOnly || s.record_indices.empty()) continue;
    auto ms = session_marks(s, marks);
    if (ms.empty()) continue;
    const std::size_t first_mark = ms.front();
    const TimePoint prev_end = i > 0 ? ss[i - 1].end : TimePoint::min();
    const TimePoint first_record = trace.time(s.record_indices.front());

    if (impl == ImplementationKind::JavaI2P) {
      // Records after the last pinned record (routine, leave or exact join)
      // may be a displaced startup publication.
      std::size_t lo = 0;
      for (std::size_t x = first_mark; x-- > 0;) {
        bool pinned = marks[x] || leave[x];
        for (std::size_t k = 0; k < i && !pinned; ++k)
          pinned = ss[k].start_quality == StartQuality::ExactJoin && ss[k].record_indices.front() == x;
        if (pinned) {
          lo = x + 1;
          break;
        }
      }
      std::optional<std::size_t> hit;
      for (std::size_t x = first_mark; x-- > lo;) {
        if (in_extended_window(trace.time(first_mark) - trace.time(x), params)) {
          hit = x;
          break;
        }
      }
      if (hit) {
        // Move records [hit, first record) from the previous session.
        if (i > 0 && *hit < s.record_indices.front()) {
          auto& prev = ss[i - 1].record_indices;
          std::vector<std::size_t> moved;
          while (!prev.empty() && prev.back() >= *hit) {
            moved.insert(moved.begin(), prev.back());
            prev.pop_back();
          }
          s.record_indices.insert(s.record_indices.begin(), moved.begin(), moved.end());
          if (prev.empty()) {
            ss.erase(ss.begin() + static_cast<long>(i) - 1);
            --i;
          } else {
            refresh_bounds(ss[i - 1], trace);
          }
        }
        if (*hit > ss[i].record_indices.front()) {
          // Records ahead of the displaced startup record belong to an
          // earlier session whose end was not observed.
          OnlineSession head;
          auto& idx = ss[i].record_indices;
          auto split = std::find(idx.begin(), idx.end(), *hit);
          head.record_indices.assign(idx.begin(), split);
          idx.erase(idx.begin(), split);
          refresh_bounds(head, trace);
          ss.insert(ss.begin() + static_cast<long>(i), std::move(head));
          ++i;
        }
        OnlineSession& cur = ss[i];
        cur.start = trace.time(*hit);
        cur.start_quality = StartQuality::SupplementedJoin;
        if (cur.end <= cur.start) cur.end = cur.start + Duration(1);
        out.diagnostics.push_back({CaseLabel::Case6, Severity::Corrected, i, "displaced startup record"});
        continue;
      }
      TimePoint est = trace.time(first_mark) - params.E_f();
      est = std::min(est, first_record);
      if (est <= prev_end) est = prev_end + Duration(1);
      s.start = std::min(est, first_record);
      s.start_quality = StartQuality::SupplementedJoin;
      out.diagnostics.push_back({CaseLabel::Case10, Severity::Corrected, i, "startup interval estimate"});
      continue;
    }

    // C++: a first routine that repeats the previous session's congestion
    // level is not marked and stays behind in the previous session. Pull
    // back every trailing record from the first one on this lattice.
    std::size_t first_mark_cpp = first_mark;
    if (i > 0 && ss[i - 1].end_quality != EndQuality::ExactLeave) {
      const auto& ip = params.inference;
      auto& prev = ss[i - 1].record_indices;
      auto pm = session_marks(ss[i - 1], marks);
      std::size_t from = pm.empty() ? prev.size() : static_cast<std::size_t>(
                                                        std::find(prev.begin(), prev.end(), pm.back()) - prev.begin() + 1);
      for (std::size_t k = from; k < prev.size(); ++k) {
        std::size_t x = prev[k];
        std::vector<std::size_t> tail(prev.begin() + static_cast<long>(k), prev.end());
        auto t = startup_chain(tail, trace, trace.time(first_mark), ip);
        if (t && k > 0 && *t > trace.time(prev[k - 1])) {
          s.record_indices.insert(s.record_indices.begin(), tail.begin(), tail.end());
          prev.erase(prev.begin() + static_cast<long>(k), prev.end());
          break;
        }
        Duration d = trace.time(first_mark) - trace.time(x);
        if (!congruent(d, Duration(0), ip.cpp_period, ip.cpp_join_tolerance)) continue;
        Duration since = trace.time(x) - trace.time(x - 1);
        if (std::chrono::abs(since - ip.cpp_forced_gap) <= ip.cpp_join_tolerance) continue;
        if (!pm.empty() && congruent(trace.time(x) - trace.time(pm.back()), Duration(0), ip.cpp_period,
                                     ip.cpp_join_tolerance))
          continue;
        s.record_indices.insert(s.record_indices.begin(), prev.begin() + static_cast<long>(k), prev.end());
        prev.erase(prev.begin() + static_cast<long>(k), prev.end());
        out.routine_marks[x] = true;
        first_mark_cpp = x;
        break;
      }
      if (prev.empty()) {
        ss.erase(ss.begin() + static_cast<long>(i) - 1);
        --i;
      } else {
        refresh_bounds(ss[i - 1], trace);
      }
    }
    OnlineSession& sc = ss[i];
    const TimePoint prev_end_cpp = i > 0 ? ss[i - 1].end : TimePoint::min();
    const TimePoint first_record_cpp = trace.time(sc.record_indices.front());

    // Pin the start with a peer-test record and the routine lattice.
    std::optional<TimePoint> solved;
    for (std::size_t k = 0; k < sc.record_indices.size(); ++k) {
      std::size_t x = sc.record_indices[k];
      if (marks[x] || leave[x]) continue;
      // A record exactly one forced gap after its predecessor is a forced
      // publication, not a peer test.
      if (x > 0 && std::chrono::abs(trace.time(x) - trace.time(x - 1) - params.inference.cpp_forced_gap) <=
                       params.inference.cpp_join_tolerance)
        continue;
      auto t = solve_cpp_start(trace.time(x), trace.time(first_mark_cpp), prev_end_cpp, first_record_cpp, params.inference);
      if (t && (!solved || *t > *solved)) solved = t;
    }
    {
      std::vector<std::size_t> lead;
      for (auto x : sc.record_indices) {
        if (x >= first_mark_cpp) break;
        lead.push_back(x);
      }
      auto t = startup_chain(lead, trace, trace.time(first_mark_cpp), params.inference);
      if (t && *t > prev_end_cpp && (!solved || *t > *solved)) solved = t;
    }
    if (solved) {
      sc.start = *solved;
      sc.start_quality = StartQuality::SupplementedJoin;
      out.diagnostics.push_back({CaseLabel::Case15, Severity::Corrected, i, "peer-test lattice solved"});
    } else {
      TimePoint est = trace.time(first_mark_cpp) - params.inference.cpp_period + params.inference.cpp_initial_offset;
      est = std::min(est, first_record_cpp);
      if (est <= prev_end_cpp) est = prev_end_cpp + Duration(1);
      sc.start = std::min(est, first_record_cpp);
      sc.start_quality = StartQuality::SupplementedJoin;
      out.diagnostics.push_back({CaseLabel::Case15, Severity::Corrected, i, "12-minute back-projection estimate"});
    }
  }
  return out;
}

SessionInference supplement_leave(const SessionInference& inference, const ObservedTrace& trace,
                                  ImplementationKind impl, const ComplementParams& params) {
  SessionInference out = inference;
  auto& ss = out.sessions;
  bool floodfill_history = false;
  for (const auto& r : trace.records) floodfill_history = floodfill_history || r.floodfill_flag;

  for (std::size_t i = 0; i < ss.size(); ++i) {
    OnlineSession& s = ss[i];
    if (s.end_quality != EndQuality::CoarseOnly || s.record_indices.empty()) continue;
    const TimePoint t_f = trace.time(s.record_indices.back());
    TimePoint end;
    if (impl == ImplementationKind::JavaI2P) {
      auto ms = session_marks(s, out.routine_marks);
      const TimePoint t_r = ms.empty() ? t_f : trace.time(ms.back());
      // Midpoint between the last routine and last record, plus two expected
      // update intervals.
      end = t_r + (t_f - t_r) / 2 + params.E_Dc() * 2;
      if (floodfill_history)
        out.diagnostics.push_back({CaseLabel::Case9, Severity::Corrected, i, "floodfill leave record missing"});
    } else {
      end = t_f + params.cpp_leave_expectation;
    }
    end = std::max(end, t_f);
    if (i + 1 < ss.size() && end >= ss[i + 1].start) end = ss[i + 1].start - Duration(1);
    if (end <= s.start) end = s.start + Duration(1);
    s.end = end;
    s.end_quality = EndQuality::SupplementedLeave;
  }
  return out;
}

SessionInference complement_sessions(const SessionInference& inference, const ObservedTrace& trace,
                                     ImplementationKind impl, const ComplementParams& params) {
  auto out = concatenate_sessions(inference, trace, impl, params);
  out = supplement_join(out, trace, impl, params);
  return supplement_leave(out, trace, impl, params);
}

}  // namespace i2plive
