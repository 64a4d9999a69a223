#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "i2plive/capture.hpp"
#include "i2plive/complement.hpp"
#include "i2plive/correlate.hpp"
#include "i2plive/evaluation.hpp"

namespace i2plive {

// Failure inside one pipeline stage; `stage` names it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Daily on/off patterns of the controlled-router scenarios. S1-S4 repeat
// every day; S5-S7 are long-lived single sessions.
std::vector<int> named_pattern(const std::string& name);

struct ScenarioRouter {
  std::string label;
  Category category = Category::JRFF;
  bool patched = false;
  std::vector<int> pattern;  // minutes, repeated from the epoch
  int replicas = 1;
};

// A hidden service on a declared router. A replicated host yields one
// service per replica.
struct TargetService {
  std::string host;
  Duration probe_period = std::chrono::minutes(1);
  Duration leaseset_ttl = std::chrono::minutes(10);
};

// Synthetic background routers with random on/off schedules.
struct NoiseConfig {
  int count = 0;
  double always_online_prob = 0.25;
  int on_min = 20, on_max = 480;   // minutes
  int off_min = 5, off_max = 240;  // minutes
};

struct Scenario {
  std::string name = "custom";
  TimePoint epoch_start = from_millis(1735689600000LL);  // 2025-01-01T00:00:00Z
  int duration_days = 1;
  std::uint64_t seed = 1;
  std::vector<ScenarioRouter> routers;
  std::vector<TargetService> targets;
  CaptureModel capture = CaptureModel::fixed(1.0);
  NoiseConfig noise;
  CategoryThresholds thresholds;
  ComplementParams complement;
  JavaSimParams java;
  CppSimParams cpp;
  bool with_complement = true;

  TimePoint end() const { return epoch_start + std::chrono::hours(24) * duration_days; }
  // Throws InvalidConfig.
  void validate() const;
};

Scenario scenario_from_json(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

// One concrete router of a scenario: a declared replica or a noise router.
struct PlannedRouter {
  std::string label;
  std::string group;  // declared label before replica expansion
  RouterConfig config;
  bool noise = false;
  std::vector<OnlineSession> sessions;  // ground-truth schedule, clipped to the horizon
  std::uint64_t seed = 0;
};

std::vector<PlannedRouter> plan_routers(const Scenario& scenario);

SimOutput simulate_stage(const PlannedRouter& router, const Scenario& scenario);
ObservedTrace capture_stage(const SimOutput& sim, const PlannedRouter& router, const Scenario& scenario,
                            std::vector<std::size_t>* kept);
SessionInference infer_stage(const ObservedTrace& observed, const Scenario& scenario);
SessionInference complement_stage(const SessionInference& inference, const ObservedTrace& observed,
                                  const Scenario& scenario);

// Category as an observer would assign it from the trace alone.
Category infer_category(const ObservedTrace& observed);

struct ServiceProbe {
  std::string service;
  std::string host;
  std::vector<ProbeOutcome> outcomes;
};
std::vector<ServiceProbe> probe_stage(const Scenario& scenario, const std::vector<PlannedRouter>& routers);

struct CorrelationInput {
  std::string label;
  RouterIdentity identity;
  Category category = Category::JRFF;
  std::vector<OnlineSession> sessions;  // inferred
};

struct ServiceDay {
  std::string service;
  std::string host;
  int day = 1;                // 1-based
  int target_sessions = 0;    // probe-derived sessions that day
  std::size_t set_size = 0;   // routers consistent with every day so far
  bool host_included = false;
};

struct CorrelationOutput {
  std::vector<ServiceDay> series;
  // Parallel to `series`; `included` reflects every day so far.
  std::vector<AnonymitySetReport> reports;
};

CorrelationOutput correlate_stage(const Scenario& scenario, const std::vector<ServiceProbe>& probes,
                                  const std::vector<CorrelationInput>& routers);

struct BiasRow {
  std::string router;
  Category category = Category::JRFF;
  SessionMatch match;
};

struct CategoryBias {
  Category category = Category::JRFF;
  std::size_t sessions = 0;
  double join_median_s = 0, join_uq_s = 0, leave_median_s = 0, leave_uq_s = 0;
};

struct BiasReport {
  std::vector<BiasRow> rows;
  std::vector<CategoryBias> per_category;  // categories with at least one row
};

BiasReport summarize_bias(std::vector<BiasRow> rows);

struct RouterRun {
  PlannedRouter plan;
  SimOutput sim;
  std::vector<std::size_t> kept;
  ObservedTrace observed;
  SessionInference inference;  // before complement
  SessionInference final;      // after complement when enabled
};

struct ScenarioResult {
  std::string scenario;
  bool with_complement = true;
  std::vector<RouterRun> routers;
  BiasReport bias;  // declared routers only
  std::vector<ServiceProbe> probes;
  CorrelationOutput correlation;
};

ScenarioResult run_scenario(const Scenario& scenario, bool with_complement);

// Writes bias.csv, bias_summary.csv, cases.csv, anonymity_series.csv,
// anonymity_sets.csv and anonymity_plot.csv. Throws on an empty result or
// an unwritable directory.
void emit_report(const ScenarioResult& result, const std::filesystem::path& out_dir);

}  // namespace i2plive
