#pragma once

#include <cstdint>

#include "i2plive/trace_model.hpp"

namespace i2plive {

struct JavaSimParams {
  int T = 43;      // minutes
  int S_max = 10;  // minutes
  Duration min_republish_delay = std::chrono::minutes(9);
  Duration startup_first_publish_window = std::chrono::seconds(10);
  Duration second_task_offset = std::chrono::seconds(90);
  double ack_success_prob = 0.5;
  // Floodfill shutdown record lands this far (at most) before session end.
  Duration leave_lead = std::chrono::seconds(5);
  // Introducer refresh cadence for firewalled routers.
  Duration introducer_first_min = std::chrono::seconds(30);
  Duration introducer_first_max = std::chrono::seconds(90);
  Duration introducer_refresh_min = std::chrono::minutes(20);
  Duration introducer_refresh_max = std::chrono::minutes(60);
  double patched_skip_prob = 1.0 / 32.0;

  Duration min_update_interval() const;  // 3T/16
  Duration max_update_interval() const;  // (3T + 4 S_max)/16
};

struct CppSimParams {
  Duration congestion_eval_period = std::chrono::minutes(12);
  Duration initial_publish_delay = std::chrono::milliseconds(500);
  Duration peer_test_period = std::chrono::minutes(71);
  Duration forced_publish_gap = std::chrono::minutes(30);
  Duration graceful_shutdown_window = std::chrono::minutes(10);
  double congestion_change_prob = 0.5;
  double graceful_prob = 0.5;
};

struct SimOutput {
  RouterTrace full_trace;
  std::vector<OnlineSession> ground_truth_sessions;
};

// Update-task interval D_c = (3T/4 + s)/4 for s in [0, S_max] minutes.
Duration update_interval(int T, double s_minutes);

SimOutput simulate_java(const BehaviorSchedule& schedule, const RouterConfig& config,
                        const JavaSimParams& params, std::uint64_t seed);
SimOutput simulate_cpp(const BehaviorSchedule& schedule, const RouterConfig& config,
                       const CppSimParams& params, std::uint64_t seed);

SimOutput apply_firewalled_overlay(const SimOutput& output, std::uint64_t seed,
                                   const JavaSimParams& params = {});

// Dispatches on config.impl and applies the firewalled overlay to
// unreachable Java routers.
SimOutput simulate_router(const BehaviorSchedule& schedule, const RouterConfig& config,
                          std::uint64_t seed, const JavaSimParams& java = {},
                          const CppSimParams& cpp = {});

// Session-list variants used when the ground truth is built directly.
SimOutput simulate_java_sessions(const std::vector<OnlineSession>& sessions,
                                 const RouterConfig& config, const JavaSimParams& params,
                                 std::uint64_t seed);
SimOutput simulate_cpp_sessions(const std::vector<OnlineSession>& sessions,
                                const RouterConfig& config, const CppSimParams& params,
                                std::uint64_t seed);
SimOutput simulate_router_sessions(const std::vector<OnlineSession>& sessions,
                                   const RouterConfig& config, std::uint64_t seed,
                                   const JavaSimParams& java = {}, const CppSimParams& cpp = {});

}  // namespace i2plive
