#include <algorithm>
#include <functional>
#include <stdexcept>

#include "i2plive/complement.hpp"
#include "i2plive/random.hpp"

namespace i2plive {

namespace {

struct SessionView {
  std::vector<std::size_t> all;       // full-trace indices
  std::vector<std::size_t> captured;  // subset retained
  std::optional<std::size_t> initial, leave;
  std::vector<std::size_t> routines;
};

bool extended_window(Duration d) {
  ComplementParams p;
  Duration lo = p.min_update_interval(), hi = p.max_update_interval();
  Duration off = std::chrono::seconds(90);
  return (d >= lo * 7 && d <= hi * 7) || (d >= off + lo * 6 && d <= off + hi * 6);
}

}  // namespace

std::set<CaseLabel> case_set(const std::vector<DetectedCase>& cases) {
  std::set<CaseLabel> out;
  for (const auto& c : cases) out.insert(c.label);
  return out;
}

std::vector<DetectedCase> detect_cases(const SimOutput& sim, const std::vector<std::size_t>& kept,
                                       const RouterConfig& config, const InferenceParams& params) {
  const auto& recs = sim.full_trace.records;
  std::vector<bool> cap(recs.size(), false);
  for (auto k : kept) cap[k] = true;
  auto t = [&](std::size_t i) { return recs[i].publish_time; };
  auto kind = [&](std::size_t i) { return recs[i].truth_kind.value_or(TruthKind::Other); };

  std::vector<SessionView> views;
  for (const auto& s : sim.ground_truth_sessions) {
    SessionView v;
    v.all = s.record_indices;
    for (auto i : s.record_indices) {
      if (cap[i]) v.captured.push_back(i);
      switch (kind(i)) {
        case TruthKind::Initial: v.initial = i; break;
        case TruthKind::Leave: v.leave = i; break;
        case TruthKind::Routine: v.routines.push_back(i); break;
        default: break;
      }
    }
    views.push_back(std::move(v));
  }

  std::vector<DetectedCase> out;
  auto add = [&](CaseLabel c, std::size_t k) { out.push_back({c, k}); };
  const auto& window = params.java_routine_window;

  for (std::size_t k = 0; k < views.size(); ++k) {
    const auto& v = views[k];
    std::vector<std::size_t> cap_routines;
    for (auto r : v.routines)
      if (cap[r]) cap_routines.push_back(r);

    if (config.impl == ImplementationKind::JavaI2P) {
      if (v.initial && cap[*v.initial] && !v.routines.empty() && !cap[v.routines.front()] &&
          !cap_routines.empty())
        add(CaseLabel::Case6, k);
      bool leave_seen = v.leave && cap[*v.leave];
      if (v.routines.size() >= 2 && !cap[v.routines.back()] && !cap_routines.empty() && !leave_seen)
        add(CaseLabel::Case7, k);
      for (std::size_t j = 1; j + 1 < v.routines.size(); ++j) {
        if (cap[v.routines[j]]) continue;
        bool before = false, after = false;
        for (std::size_t q = 0; q < j; ++q) before = before || cap[v.routines[q]];
        for (std::size_t q = j + 1; q < v.routines.size(); ++q) after = after || cap[v.routines[q]];
        if (before && after) {
          add(CaseLabel::Case8, k);
          break;
        }
      }
      if (config.floodfill && v.leave && !cap[*v.leave]) add(CaseLabel::Case9, k);
      if (v.initial && !cap[*v.initial] && !cap_routines.empty()) {
        std::optional<std::size_t> last;
        if (k > 0)
          for (auto r : views[k - 1].routines)
            if (cap[r]) last = r;
        CaseLabel c = CaseLabel::Case10;
        if (!config.floodfill && last) {
          Duration g = t(cap_routines.front()) - t(*last);
          if (window.contains(g)) c = CaseLabel::Case12;
          else if (extended_window(g)) c = CaseLabel::Case11;
        }
        add(c, k);
      }
      if (k >= 1 && !v.captured.empty()) {
        const auto& pv = views[k - 1];
        std::optional<std::size_t> lr, lx, fi, fr;
        for (auto r : pv.routines)
          if (cap[r]) lr = r;
        if (!pv.captured.empty()) lx = pv.captured.back();
        if (v.initial && cap[*v.initial] && v.captured.front() == *v.initial) fi = *v.initial;
        if (!cap_routines.empty()) fr = cap_routines.front();
        bool lx_nonroutine = lx && kind(*lx) != TruthKind::Routine;
        if (lr && fi && window.contains(t(*fi) - t(*lr))) add(CaseLabel::Case1, k);
        // Without the Initial this relation is the uncorrectable Case 12.
        bool initial_seen = v.initial && cap[*v.initial];
        if (lr && fr && initial_seen && window.contains(t(*fr) - t(*lr))) add(CaseLabel::Case2, k);
        if (lx_nonroutine && fi && window.contains(t(*fi) - t(*lx))) add(CaseLabel::Case3, k);
        if (lx_nonroutine && fr && window.contains(t(*fr) - t(*lx))) add(CaseLabel::Case4, k);
        if (cap_routines.empty()) add(CaseLabel::Case5, k);
      }
    } else {
      if (k >= 1 && !v.captured.empty() && v.routines.empty()) add(CaseLabel::Case13, k);
      for (auto r : v.routines) {
        if (cap[r]) continue;
        std::optional<std::size_t> before, after;
        for (auto i : v.all) {
          if (i < r && cap[i]) before = i;
          if (i > r && cap[i] && !after) after = i;
        }
        if (before && after && kind(*after) != TruthKind::Routine && kind(*after) != TruthKind::Leave &&
            recs[*after].congestion != recs[*before].congestion) {
          add(CaseLabel::Case14, k);
          break;
        }
      }
      (void)params;
      if (v.initial && !cap[*v.initial] && !cap_routines.empty()) add(CaseLabel::Case15, k);
      if (v.leave && !cap[*v.leave]) add(CaseLabel::Case16, k);
    }
  }
  return out;
}

namespace {

struct Range {
  double lo, hi;  // minutes
};

struct Plan {
  Category category;
  // Alternating online/offline ranges, starting online.
  std::vector<Range> segments;
  double graceful_prob = 0.5;
  // Chooses full-trace indices to drop; returns false when the sample does
  // not admit the case.
  std::function<bool(const SimOutput&, Rng&, std::vector<std::size_t>&, std::size_t&)> drop;
  std::function<bool(const SimOutput&, const std::vector<std::size_t>&)> accept;
};

std::vector<std::size_t> of_kind(const SimOutput& sim, std::size_t session, TruthKind k) {
  std::vector<std::size_t> out;
  for (auto i : sim.ground_truth_sessions[session].record_indices)
    if (sim.full_trace.records[i].truth_kind == k) out.push_back(i);
  return out;
}

bool drop_first(const SimOutput& sim, std::size_t session, TruthKind k, std::vector<std::size_t>& d) {
  if (session >= sim.ground_truth_sessions.size()) return false;
  auto v = of_kind(sim, session, k);
  if (v.empty()) return false;
  d.push_back(v.front());
  return true;
}

Range twelve_multiple_plus(Rng& rng) {
  // 12k + x minutes with k in [5,10] and x in [1,9]: the last evaluation
  // falls inside the shutdown window.
  double k = static_cast<double>(uniform_int(rng, 5, 10));
  double x = 1.0 + 8.0 * uniform01(rng);
  double v = 12.0 * k + x;
  return {v, v};
}

Plan plan_for(CaseLabel label, Rng& rng) {
  Plan p;
  const Range off300{300, 300};
  switch (label) {
    case CaseLabel::Case1:
    case CaseLabel::Case2:
      p.category = Category::JRnFF;
      p.segments = {{80, 140}, {5, 45}, {80, 140}, off300};
      break;
    case CaseLabel::Case3:
    case CaseLabel::Case4:
      p.category = Category::JRFF;
      p.segments = {{80, 140}, {5, 45}, {80, 140}, off300};
      break;
    case CaseLabel::Case5:
      p.category = Category::JRFF;
      p.segments = {{80, 140}, {3, 10}, {5, 12}, {3, 10}, {80, 140}, off300};
      break;
    case CaseLabel::Case6:
      p.category = Category::JRnFF;
      p.segments = {{120, 200}, {60, 120}, {120, 200}, off300};
      p.drop = [](const SimOutput& s, Rng&, std::vector<std::size_t>& d, std::size_t& target) {
        target = 1;
        return drop_first(s, 1, TruthKind::Routine, d);
      };
      break;
    case CaseLabel::Case7:
      p.category = Category::JRnFF;
      p.segments = {{90, 200}, {60, 120}, {120, 200}, off300};
      p.drop = [](const SimOutput& s, Rng&, std::vector<std::size_t>& d, std::size_t& target) {
        target = 0;
        auto v = of_kind(s, 0, TruthKind::Routine);
        if (v.size() < 2) return false;
        d.push_back(v.back());
        // The session must end shortly after the lost record.
        return s.ground_truth_sessions[0].end - s.full_trace.records[v.back()].publish_time <=
               std::chrono::minutes(3);
      };
      break;
    case CaseLabel::Case8:
      p.category = Category::JRnFF;
      p.segments = {{150, 250}, {60, 120}, {100, 200}, off300};
      p.drop = [](const SimOutput& s, Rng& rng, std::vector<std::size_t>& d, std::size_t& target) {
        target = 0;
        auto v = of_kind(s, 0, TruthKind::Routine);
        if (v.size() < 3) return false;
        d.push_back(v[static_cast<std::size_t>(uniform_int(rng, 1, static_cast<std::int64_t>(v.size()) - 2))]);
        return true;
      };
      break;
    case CaseLabel::Case9:
      p.category = Category::JRFF;
      p.segments = {{100, 200}, {60, 120}, {100, 200}, off300};
      p.drop = [](const SimOutput& s, Rng&, std::vector<std::size_t>& d, std::size_t& target) {
        target = 0;
        return drop_first(s, 0, TruthKind::Leave, d);
      };
      break;
    case CaseLabel::Case10:
      p.category = Category::JRnFF;
      p.segments = {{100, 200}, {150, 300}, {100, 200}, off300};
      p.drop = [](const SimOutput& s, Rng&, std::vector<std::size_t>& d, std::size_t& target) {
        target = 1;
        return drop_first(s, 1, TruthKind::Initial, d);
      };
      break;
    case CaseLabel::Case11:
    case CaseLabel::Case12:
      p.category = Category::JRnFF;
      p.segments = {{100, 200}, {5, 60}, {100, 200}, off300};
      p.drop = [](const SimOutput& s, Rng&, std::vector<std::size_t>& d, std::size_t& target) {
        target = 1;
        return drop_first(s, 1, TruthKind::Initial, d);
      };
      break;
    case CaseLabel::Case13:
      p.category = Category::CR;
      p.graceful_prob = 1.0;
      p.segments = {twelve_multiple_plus(rng), {5, 20}, {2, 11}, {5, 20}, {100, 200}, off300};
      break;
    case CaseLabel::Case14:
      p.category = Category::CR;
      p.segments = {{150, 300}, off300};
      p.drop = [](const SimOutput& s, Rng& rng, std::vector<std::size_t>& d, std::size_t& target) {
        target = 0;
        const auto& idx = s.ground_truth_sessions[0].record_indices;
        std::vector<std::size_t> options;
        for (std::size_t j = 1; j + 1 < idx.size(); ++j) {
          const auto& cur = s.full_trace.records[idx[j]];
          const auto& nxt = s.full_trace.records[idx[j + 1]];
          if (cur.truth_kind == TruthKind::Routine && nxt.truth_kind != TruthKind::Routine &&
              nxt.truth_kind != TruthKind::Leave)
            options.push_back(idx[j]);
        }
        if (options.empty()) return false;
        d.push_back(options[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(options.size()) - 1))]);
        return true;
      };
      break;
    case CaseLabel::Case15:
      p.category = Category::CR;
      p.segments = {{100, 200}, {30, 60}, {150, 300}, off300};
      p.drop = [](const SimOutput& s, Rng&, std::vector<std::size_t>& d, std::size_t& target) {
        target = 1;
        if (of_kind(s, 1, TruthKind::PeerTest).empty()) return false;
        return drop_first(s, 1, TruthKind::Initial, d);
      };
      break;
    case CaseLabel::Case16:
      p.category = Category::CR;
      p.graceful_prob = 1.0;
      p.segments = {twelve_multiple_plus(rng), {30, 60}, {100, 200}, off300};
      p.drop = [](const SimOutput& s, Rng&, std::vector<std::size_t>& d, std::size_t& target) {
        target = 0;
        return drop_first(s, 0, TruthKind::Leave, d);
      };
      break;
  }
  return p;
}

std::size_t lossless_target(CaseLabel label) {
  switch (label) {
    case CaseLabel::Case5:
    case CaseLabel::Case13: return 1;
    default: return 1;
  }
}

}  // namespace

CaseFixture generate_case_fixture(CaseLabel label, std::uint64_t seed) {
  const int id = static_cast<int>(label);
  if (id < 1 || id > 16) throw std::invalid_argument("unsupported case id");
  const TimePoint epoch = from_millis(1735689600000LL);  // 2025-01-01T00:00:00Z
  for (std::uint64_t attempt = 0; attempt < 200000; ++attempt) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(id), attempt}));
    Plan plan = plan_for(label, rng);
    std::vector<OnlineSession> sessions;
    TimePoint t = epoch;
    for (std::size_t k = 0; k < plan.segments.size(); ++k) {
      const Range& r = plan.segments[k];
      Duration len = minutes_f(r.lo + (r.hi - r.lo) * uniform01(rng));
      if (k % 2 == 0) {
        OnlineSession s;
        s.start = t;
        s.end = t + len;
        s.start_quality = StartQuality::ExactJoin;
        s.end_quality = EndQuality::ExactLeave;
        sessions.push_back(s);
      }
      t += len;
    }
    RouterConfig cfg = config_for(plan.category, RouterIdentity::from_label("fixture-" + std::to_string(id)));
    CppSimParams cpp;
    cpp.graceful_prob = plan.graceful_prob;
    SimOutput sim = simulate_router_sessions(sessions, cfg, derive_seed(seed, {static_cast<std::uint64_t>(id), attempt, 7}),
                                             JavaSimParams{}, cpp);
    std::vector<std::size_t> drop;
    std::size_t target = lossless_target(label);
    if (plan.drop && !plan.drop(sim, rng, drop, target)) continue;
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < sim.full_trace.records.size(); ++i)
      if (std::find(drop.begin(), drop.end(), i) == drop.end()) kept.push_back(i);
    auto detected = detect_cases(sim, kept, cfg);
    if (case_set(detected) != std::set<CaseLabel>{label}) continue;

    CaseFixture f;
    f.label = label;
    f.config = cfg;
    f.observed.identity = sim.full_trace.identity;
    for (auto i : kept) {
      const auto& r = sim.full_trace.records[i];
      f.observed.records.push_back({r.publish_time, r.floodfill_flag, r.congestion, r.reachability, r.addresses});
    }
    f.sim = std::move(sim);
    f.kept = std::move(kept);
    f.target_session = detected.front().truth_session;
    f.attempts = attempt + 1;
    (void)target;
    return f;
  }
  throw std::runtime_error(std::string("could not construct a fixture for ") + to_string(label));
}

}  // namespace i2plive
