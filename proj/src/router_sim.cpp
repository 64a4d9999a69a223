#include "i2plive/router_sim.hpp"

#include <algorithm>

#include "i2plive/random.hpp"

namespace i2plive {

using std::chrono::milliseconds;
using std::chrono::minutes;

Duration update_interval(int T, double s_minutes) {
  return minutes_f((0.75 * T + s_minutes) / 4.0);
}

Duration JavaSimParams::min_update_interval() const { return update_interval(T, 0.0); }
Duration JavaSimParams::max_update_interval() const { return update_interval(T, S_max); }

namespace {

Duration uniform_duration(Rng& rng, Duration lo, Duration hi) {
  return Duration(uniform_int(rng, lo.count(), hi.count()));
}

struct AddressPlan {
  int ntcp2_cost;
  int ssu2_cost;
};

AddressPlan plan_addresses(const RouterConfig& cfg, Rng& rng) {
  if (cfg.impl == ImplementationKind::CppI2P) return {3, 8};
  return {static_cast<int>(uniform_int(rng, 10, 12)), static_cast<int>(uniform_int(rng, 4, 7))};
}

std::vector<RouterAddressSummary> make_addresses(const RouterConfig& cfg, const AddressPlan& plan) {
  RouterAddressSummary ntcp2;
  ntcp2.protocol = TransportProtocol::NTCP2;
  ntcp2.cost = plan.ntcp2_cost;
  ntcp2.ip_present = cfg.reachable;
  RouterAddressSummary ssu2;
  ssu2.protocol = TransportProtocol::SSU2;
  ssu2.cost = plan.ssu2_cost;
  ssu2.ip_present = cfg.reachable;
  ssu2.peer_test = true;
  ssu2.introducer = cfg.reachable;
  return {ntcp2, ssu2};
}

class TraceBuilder {
 public:
  TraceBuilder(const RouterConfig& cfg, const AddressPlan& plan) : cfg_(cfg), plan_(plan) {
    out_.full_trace.identity = cfg.identity;
  }

  void begin_session(const OnlineSession& truth) {
    OnlineSession s = truth;
    s.record_indices.clear();
    s.start_quality = StartQuality::ExactJoin;
    s.end_quality = EndQuality::ExactLeave;
    out_.ground_truth_sessions.push_back(s);
  }

  TimePoint last_time() const {
    return out_.full_trace.records.empty() ? TimePoint::min() : out_.full_trace.records.back().publish_time;
  }

  void emit(TimePoint t, TruthKind kind, bool ff, CongestionFlag level) {
    RouterInfoRecord r;
    r.identity = cfg_.identity;
    r.publish_time = t;
    r.floodfill_flag = ff;
    r.congestion = level;
    r.reachability = cfg_.reachable ? Reachability::R : Reachability::U;
    r.addresses = make_addresses(cfg_, plan_);
    r.truth_kind = kind;
    out_.ground_truth_sessions.back().record_indices.push_back(out_.full_trace.records.size());
    out_.full_trace.records.push_back(std::move(r));
  }

  SimOutput take() { return std::move(out_); }

 private:
  const RouterConfig& cfg_;
  AddressPlan plan_;
  SimOutput out_;
};

Duration sample_update_interval(Rng& rng, const JavaSimParams& p) {
  std::uniform_real_distribution<double> s(0.0, static_cast<double>(p.S_max));
  return update_interval(p.T, s(rng));
}

void java_session(TraceBuilder& b, const OnlineSession& truth, const RouterConfig& cfg,
                  const JavaSimParams& p, Rng& rng) {
  const TimePoint s = truth.start;
  const TimePoint e = truth.end;
  const bool ff = cfg.floodfill;
  Duration window = std::min<Duration>(p.startup_first_publish_window, e - s);
  TimePoint first = s + uniform_duration(rng, Duration(0), window);
  TimePoint last_pub;

  if (!cfg.patched) {
    b.emit(first, TruthKind::Initial, ff, CongestionFlag::None);
    last_pub = first;
    const bool ack = bernoulli(rng, p.ack_success_prob);
    // The second task is queued 90 s out. When the first upload has already
    // been acknowledged the delay rule holds it until the next interval.
    TimePoint next = ack ? first + std::max(sample_update_interval(rng, p), p.min_republish_delay)
                         : first + p.second_task_offset;
    bool first_task = true;
    int counter = 1;
    while (true) {
      TimePoint exec = next;
      if (!first_task || ack) exec = std::max(exec, last_pub + p.min_republish_delay);
      if (exec > e) break;
      ++counter;
      if (counter % 4 == 0) {
        b.emit(exec, TruthKind::Routine, ff, CongestionFlag::None);
        last_pub = exec;
      }
      next = exec + sample_update_interval(rng, p);
      first_task = false;
    }
  } else {
    int counter = 0;
    TimePoint exec = first;
    last_pub = TimePoint::min();
    while (exec <= e) {
      if (counter % 4 == 0 && !bernoulli(rng, p.patched_skip_prob)) {
        b.emit(exec, TruthKind::Routine, ff, CongestionFlag::None);
        last_pub = exec;
      }
      ++counter;
      TimePoint next = exec + sample_update_interval(rng, p);
      exec = last_pub == TimePoint::min() ? next : std::max(next, last_pub + p.min_republish_delay);
    }
  }

  if (ff && !cfg.patched) {
    TimePoint leave = e - uniform_duration(rng, Duration(0), p.leave_lead);
    leave = std::max(leave, b.last_time() + milliseconds(1));
    if (leave <= e) b.emit(leave, TruthKind::Leave, false, CongestionFlag::None);
  }
}

CongestionFlag random_level(Rng& rng) {
  return static_cast<CongestionFlag>(uniform_int(rng, 0, 2));
}

CongestionFlag different_level(Rng& rng, CongestionFlag current) {
  int pick = static_cast<int>(uniform_int(rng, 0, 1));
  int cur = static_cast<int>(current);
  int v = pick < cur ? pick : pick + 1;
  return static_cast<CongestionFlag>(v);
}

void cpp_session(TraceBuilder& b, const OnlineSession& truth, const CppSimParams& p, Rng& rng) {
  const TimePoint s = truth.start;
  const TimePoint e = truth.end;
  const TimePoint init = s + p.initial_publish_delay;
  if (init > e) return;
  CongestionFlag level = random_level(rng);
  const bool graceful = bernoulli(rng, p.graceful_prob);
  b.emit(init, TruthKind::Initial, false, level);
  TimePoint last_pub = init;
  std::int64_t n_eval = 1;
  std::int64_t n_peer = 1;
  while (true) {
    TimePoint eval = s + p.congestion_eval_period * n_eval;
    TimePoint peer = init + p.peer_test_period * n_peer;
    TimePoint forced = last_pub + p.forced_publish_gap;
    TimePoint t = std::min({eval, peer, forced});
    if (t > e) break;
    if (t == eval) {
      ++n_eval;
      if (graceful && t > e - p.graceful_shutdown_window) {
        b.emit(t, TruthKind::Leave, false, CongestionFlag::G);
        return;
      }
      if (!bernoulli(rng, p.congestion_change_prob)) continue;
      level = different_level(rng, level);
      b.emit(t, TruthKind::Routine, false, level);
    } else if (t == peer) {
      ++n_peer;
      b.emit(t, TruthKind::PeerTest, false, level);
    } else {
      b.emit(t, TruthKind::Other, false, level);
    }
    last_pub = t;
  }
}

}  // namespace

SimOutput simulate_java_sessions(const std::vector<OnlineSession>& sessions,
                                 const RouterConfig& config, const JavaSimParams& params,
                                 std::uint64_t seed) {
  if (config.impl != ImplementationKind::JavaI2P)
    throw InvalidConfig("simulate_java requires a JavaI2P router");
  if (params.T <= 0 || params.S_max < 0 || params.ack_success_prob < 0 ||
      params.ack_success_prob > 1)
    throw InvalidConfig("invalid Java simulation parameters");
  Rng rng(seed);
  TraceBuilder b(config, plan_addresses(config, rng));
  for (const auto& s : sessions) {
    b.begin_session(s);
    java_session(b, s, config, params, rng);
  }
  return b.take();
}

SimOutput simulate_cpp_sessions(const std::vector<OnlineSession>& sessions,
                                const RouterConfig& config, const CppSimParams& params,
                                std::uint64_t seed) {
  if (config.impl != ImplementationKind::CppI2P)
    throw InvalidConfig("simulate_cpp requires a CppI2P router");
  for (Duration d : {params.congestion_eval_period, params.initial_publish_delay,
                     params.peer_test_period, params.forced_publish_gap,
                     params.graceful_shutdown_window})
    if (d <= Duration(0)) throw InvalidConfig("C++ simulation durations must be positive");
  Rng rng(seed);
  TraceBuilder b(config, plan_addresses(config, rng));
  for (const auto& s : sessions) {
    b.begin_session(s);
    cpp_session(b, s, params, rng);
  }
  return b.take();
}

SimOutput simulate_java(const BehaviorSchedule& schedule, const RouterConfig& config,
                        const JavaSimParams& params, std::uint64_t seed) {
  return simulate_java_sessions(expand_schedule(schedule), config, params, seed);
}

SimOutput simulate_cpp(const BehaviorSchedule& schedule, const RouterConfig& config,
                       const CppSimParams& params, std::uint64_t seed) {
  return simulate_cpp_sessions(expand_schedule(schedule), config, params, seed);
}

SimOutput apply_firewalled_overlay(const SimOutput& output, std::uint64_t seed,
                                   const JavaSimParams& p) {
  Rng rng(seed);
  SimOutput out;
  out.full_trace.identity = output.full_trace.identity;
  std::int64_t next_introducer_id = 1;
  const auto& src = output.full_trace.records;

  for (const auto& truth : output.ground_truth_sessions) {
    OnlineSession session = truth;
    session.record_indices.clear();
    std::vector<RouterInfoRecord> recs;
    for (auto i : truth.record_indices) recs.push_back(src[i]);

    std::vector<RouterInfoRecord> merged;
    if (!recs.empty()) {
      const RouterInfoRecord& templ = recs.front();
      auto set_introducer = [](RouterInfoRecord& r, std::int64_t id) {
        for (auto& a : r.addresses) {
          a.ip_present = false;
          a.introducer_set_id = a.protocol == TransportProtocol::SSU2 ? id : 0;
        }
      };

      std::size_t i = 0;
      TimePoint last_pub = recs[0].publish_time;
      std::int64_t current = 0;
      if (recs[0].truth_kind == TruthKind::Initial) {
        RouterInfoRecord r = recs[0];
        r.reachability = Reachability::Undetermined;
        set_introducer(r, 0);
        merged.push_back(r);
        i = 1;
      }

      // Leave (floodfill shutdown) bounds the session's last event.
      TimePoint limit = truth.end;
      for (const auto& r : recs)
        if (r.truth_kind == TruthKind::Leave) limit = r.publish_time;

      TimePoint next_intro =
          recs[0].publish_time + uniform_duration(rng, p.introducer_first_min, p.introducer_first_max);
      auto emit_intros_before = [&](TimePoint t) {
        while (next_intro < t && next_intro < limit) {
          RouterInfoRecord r = templ;
          r.publish_time = next_intro;
          r.reachability = Reachability::U;
          r.truth_kind = TruthKind::IntroducerUpdate;
          current = next_introducer_id++;
          set_introducer(r, current);
          merged.push_back(r);
          last_pub = next_intro;
          next_intro += uniform_duration(rng, p.introducer_refresh_min, p.introducer_refresh_max);
        }
      };

      Duration shift(0);
      bool dropping = false;
      for (; i < recs.size(); ++i) {
        RouterInfoRecord r = recs[i];
        if (r.truth_kind == TruthKind::Routine) {
          if (dropping) continue;
          TimePoint t = r.publish_time + shift;
          emit_intros_before(t);
          TimePoint delayed = std::max(t, last_pub + p.min_republish_delay);
          shift += delayed - t;
          if (delayed >= limit || delayed > truth.end) {
            dropping = true;
            continue;
          }
          r.publish_time = delayed;
          set_introducer(r, current);
          merged.push_back(r);
          last_pub = delayed;
        } else {
          emit_intros_before(r.publish_time);
          set_introducer(r, current);
          merged.push_back(r);
          last_pub = std::max(last_pub, r.publish_time);
        }
      }
      emit_intros_before(limit);
    }

    for (auto& r : merged) {
      session.record_indices.push_back(out.full_trace.records.size());
      out.full_trace.records.push_back(std::move(r));
    }
    out.ground_truth_sessions.push_back(std::move(session));
  }
  return out;
}

SimOutput simulate_router_sessions(const std::vector<OnlineSession>& sessions,
                                   const RouterConfig& config, std::uint64_t seed,
                                   const JavaSimParams& java, const CppSimParams& cpp) {
  if (config.impl == ImplementationKind::CppI2P)
    return simulate_cpp_sessions(sessions, config, cpp, seed);
  SimOutput out = simulate_java_sessions(sessions, config, java, seed);
  if (!config.reachable) out = apply_firewalled_overlay(out, derive_seed(seed, {0xf1}), java);
  return out;
}

SimOutput simulate_router(const BehaviorSchedule& schedule, const RouterConfig& config,
                          std::uint64_t seed, const JavaSimParams& java, const CppSimParams& cpp) {
  return simulate_router_sessions(expand_schedule(schedule), config, seed, java, cpp);
}

}  // namespace i2plive
