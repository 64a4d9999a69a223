#include "i2plive/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "i2plive/random.hpp"

namespace i2plive {

using json = nlohmann::json;

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw InvalidConfig(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) throw InvalidConfig("unknown key '" + it.key() + "' in " + where);
}

// Online runs of a pattern repeated from `from`, clipped to `to`.
std::vector<OnlineSession> sessions_from_pattern(const std::vector<int>& pattern, TimePoint from, TimePoint to) {
  std::vector<OnlineSession> out;
  TimePoint t = from;
  while (t < to) {
    for (int len : pattern) {
      if (t >= to) break;
      TimePoint next = t + std::chrono::minutes(std::abs(len));
      if (len > 0) {
        TimePoint e = std::min(next, to);
        if (!out.empty() && out.back().end == t) out.back().end = e;
        else out.push_back({t, e, {}, StartQuality::ExactJoin, EndQuality::ExactLeave});
      }
      t = next;
    }
  }
  return out;
}

std::vector<OnlineSession> noise_sessions(const NoiseConfig& cfg, TimePoint from, TimePoint to, Rng& rng) {
  std::vector<OnlineSession> out;
  if (bernoulli(rng, cfg.always_online_prob)) {
    out.push_back({from, to, {}, StartQuality::ExactJoin, EndQuality::ExactLeave});
    return out;
  }
  auto draw = [&](int lo, int hi) { return std::chrono::minutes(uniform_int(rng, lo, hi)); };
  bool on = bernoulli(rng, 0.5);
  // The first run starts part-way through.
  Duration first = on ? Duration(draw(cfg.on_min, cfg.on_max)) : Duration(draw(cfg.off_min, cfg.off_max));
  TimePoint t = from - std::chrono::duration_cast<Duration>(first * uniform01(rng));
  while (t < to) {
    Duration len = on ? Duration(draw(cfg.on_min, cfg.on_max)) : Duration(draw(cfg.off_min, cfg.off_max));
    if (on) {
      TimePoint s = std::max(t, from), e = std::min(t + len, to);
      if (e > s) out.push_back({s, e, {}, StartQuality::ExactJoin, EndQuality::ExactLeave});
    }
    t += len;
    on = !on;
  }
  return out;
}

template <typename F>
auto staged(const char* stage, const std::string& who, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, who + ": " + e.what());
  }
}

}  // namespace

std::vector<int> named_pattern(const std::string& name) {
  static const std::map<std::string, std::vector<int>> patterns = {
      {"S1", {100, -45, 110, -50, 120, -55, 130, -60, 100, -55, 110, -50, 120, -45, 130, -160}},
      {"S2", {120, -30, 110, -35, 100, -40, 120, -45, 110, -40, 100, -30, 10, -35, 120, -30, 10, -35, 100, -40, 120, -60}},
      {"S3", {140, -10, 130, -5, 120, -10, 110, -5, 10, -10, 100, -10, 130, -5, 10,
              -10, 120, -10, 110, -5, 100, -10, 110, -5, 10, -10, 120, -15}},
      {"S4", {160, -20, 160, -15, 160, -10, 10, -5, 160, -30, 160, -40, 10, -10, 160, -50, 160, -60, 10, -50}},
      {"S5", {9 * 1440, -1440}},
      {"S6", {28 * 1440, -1440}},
      {"S7", {50 * 1440, -1440}},
  };
  auto it = patterns.find(name);
  if (it == patterns.end()) throw InvalidConfig("unknown schedule '" + name + "'");
  return it->second;
}

void Scenario::validate() const {
  if (duration_days < 1) throw InvalidConfig("duration_days must be at least 1");
  if (routers.empty() && noise.count == 0) throw InvalidConfig("scenario has no routers");
  std::set<std::string> labels;
  for (const auto& r : routers) {
    if (r.label.empty()) throw InvalidConfig("router label is empty");
    if (!labels.insert(r.label).second) throw InvalidConfig("duplicate router label '" + r.label + "'");
    if (r.replicas < 1) throw InvalidConfig("replicas must be at least 1 for '" + r.label + "'");
    if (r.pattern.empty()) throw InvalidConfig("empty schedule for '" + r.label + "'");
    for (int v : r.pattern)
      if (v == 0) throw InvalidConfig("zero-length schedule entry for '" + r.label + "'");
  }
  for (const auto& t : targets) {
    if (!labels.count(t.host)) throw InvalidConfig("target host '" + t.host + "' is not a declared router");
    if (t.probe_period <= Duration(0)) throw InvalidConfig("probe period must be positive");
    if (t.leaseset_ttl < Duration(0)) throw InvalidConfig("lease set ttl must be non-negative");
  }
  if (noise.count < 0) throw InvalidConfig("noise count must be non-negative");
  if (noise.on_min < 1 || noise.on_max < noise.on_min || noise.off_min < 1 || noise.off_max < noise.off_min)
    throw InvalidConfig("bad noise duration ranges");
  if (capture.p < 0.0 || capture.p > 1.0) throw InvalidConfig("capture rate outside [0, 1]");
  if (capture.burst_q < 0.0 || capture.burst_q >= 1.0) throw InvalidConfig("burst_q outside [0, 1)");
  for (const auto& [c, v] : thresholds.per_session)
    if (v <= 0) throw InvalidConfig(std::string("threshold for ") + to_string(c) + " must be positive");
  if (thresholds.global <= 0) throw InvalidConfig("global threshold must be positive");
  try {
    complement.inference.validate();
  } catch (const std::exception& e) {
    throw InvalidConfig(e.what());
  }
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("scenario is not valid JSON: ") + e.what());
  }
  Scenario sc;
  try {
    check_keys(j, {"name", "epoch_start", "duration_days", "seed", "routers", "targets", "capture", "noise",
                   "thresholds", "with_complement"},
               "scenario");
    sc.name = j.value("name", sc.name);
    if (j.contains("epoch_start")) {
      const auto& e = j["epoch_start"];
      sc.epoch_start = e.is_number_integer() ? from_millis(e.get<std::int64_t>())
                                             : parse_time_string(e.get<std::string>());
    }
    sc.duration_days = j.value("duration_days", sc.duration_days);
    sc.seed = j.value("seed", sc.seed);
    sc.with_complement = j.value("with_complement", sc.with_complement);
    for (const auto& r : j.value("routers", json::array())) {
      check_keys(r, {"label", "category", "schedule", "replicas", "patched"}, "router");
      ScenarioRouter sr;
      sr.label = r.at("label").get<std::string>();
      sr.category = category_from_string(r.at("category").get<std::string>());
      const auto& s = r.at("schedule");
      sr.pattern = s.is_string() ? named_pattern(s.get<std::string>()) : s.get<std::vector<int>>();
      sr.replicas = r.value("replicas", 1);
      sr.patched = r.value("patched", false);
      sc.routers.push_back(std::move(sr));
    }
    for (const auto& t : j.value("targets", json::array())) {
      check_keys(t, {"host", "probe_period_s", "leaseset_ttl_s"}, "target");
      TargetService ts;
      ts.host = t.at("host").get<std::string>();
      ts.probe_period = std::chrono::seconds(t.value("probe_period_s", 60));
      ts.leaseset_ttl = std::chrono::seconds(t.value("leaseset_ttl_s", 600));
      sc.targets.push_back(ts);
    }
    if (j.contains("capture")) {
      const auto& c = j["capture"];
      check_keys(c, {"mode", "p", "floodfill_count", "table", "burst_q"}, "capture");
      std::string mode = c.value("mode", std::string("fixed"));
      if (mode == "fixed") {
        sc.capture = CaptureModel::fixed(c.value("p", 1.0));
      } else if (mode == "curve") {
        auto table = CaptureModel::default_curve();
        if (c.contains("table")) {
          table.clear();
          for (auto it = c["table"].begin(); it != c["table"].end(); ++it)
            table[std::stoi(it.key())] = it.value().get<double>();
        }
        sc.capture = CaptureModel::curve(c.value("floodfill_count", 15), table);
      } else {
        throw InvalidConfig("unknown capture mode '" + mode + "'");
      }
      sc.capture.burst_q = c.value("burst_q", 0.0);
    }
    if (j.contains("noise")) {
      const auto& n = j["noise"];
      check_keys(n, {"count", "always_online_prob", "on_min", "on_max", "off_min", "off_max"}, "noise");
      sc.noise.count = n.value("count", 0);
      sc.noise.always_online_prob = n.value("always_online_prob", sc.noise.always_online_prob);
      sc.noise.on_min = n.value("on_min", sc.noise.on_min);
      sc.noise.on_max = n.value("on_max", sc.noise.on_max);
      sc.noise.off_min = n.value("off_min", sc.noise.off_min);
      sc.noise.off_max = n.value("off_max", sc.noise.off_max);
    }
    if (j.contains("thresholds")) {
      const auto& t = j["thresholds"];
      if (!t.is_object()) throw InvalidConfig("thresholds must be an object");
      for (auto it = t.begin(); it != t.end(); ++it) {
        if (it.key() == "global") sc.thresholds.global = it.value().get<int>();
        else sc.thresholds.per_session[category_from_string(it.key())] = it.value().get<int>();
      }
    }
  } catch (const InvalidConfig&) {
    throw;
  } catch (const std::exception& e) {
    throw InvalidConfig(e.what());
  }
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open scenario " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

std::vector<PlannedRouter> plan_routers(const Scenario& scenario) {
  std::vector<PlannedRouter> out;
  for (const auto& r : scenario.routers) {
    auto sessions = sessions_from_pattern(r.pattern, scenario.epoch_start, scenario.end());
    for (int k = 0; k < r.replicas; ++k) {
      PlannedRouter p;
      p.label = r.replicas > 1 ? r.label + "-" + std::to_string(k + 1) : r.label;
      p.group = r.label;
      p.config = config_for(r.category, RouterIdentity::from_label(p.label), r.patched);
      p.sessions = sessions;
      p.seed = derive_seed(scenario.seed, {fnv1a(p.label)});
      out.push_back(std::move(p));
    }
  }
  static const Category kinds[] = {Category::JRFF, Category::JRnFF, Category::JU, Category::CR, Category::CU};
  Rng rng(derive_seed(scenario.seed, {0x6e6f697365ULL}));
  for (int i = 0; i < scenario.noise.count; ++i) {
    PlannedRouter p;
    char buf[32];
    std::snprintf(buf, sizeof buf, "noise-%04d", i + 1);
    p.label = buf;
    p.group = "noise";
    p.noise = true;
    p.config = config_for(kinds[uniform_int(rng, 0, 4)], RouterIdentity::from_label(p.label));
    p.sessions = noise_sessions(scenario.noise, scenario.epoch_start, scenario.end(), rng);
    p.seed = derive_seed(scenario.seed, {fnv1a(p.label)});
    out.push_back(std::move(p));
  }
  return out;
}

SimOutput simulate_stage(const PlannedRouter& router, const Scenario& scenario) {
  return simulate_router_sessions(router.sessions, router.config, router.seed, scenario.java, scenario.cpp);
}

ObservedTrace capture_stage(const SimOutput& sim, const PlannedRouter& router, const Scenario& scenario,
                            std::vector<std::size_t>* kept) {
  return capture_indexed(sim, scenario.capture, derive_seed(router.seed, {2}), kept);
}

SessionInference infer_stage(const ObservedTrace& observed, const Scenario& scenario) {
  if (observed.records.empty()) return {};
  return infer_sessions(observed, scenario.complement.inference);
}

SessionInference complement_stage(const SessionInference& inference, const ObservedTrace& observed,
                                  const Scenario& scenario) {
  if (observed.records.empty()) return inference;
  return complement_sessions(inference, observed, identify_implementation(observed), scenario.complement);
}

Category infer_category(const ObservedTrace& observed) {
  if (identify_implementation(observed) == ImplementationKind::CppI2P) {
    for (const auto& r : observed.records)
      if (r.reachability == Reachability::U) return Category::CU;
    return Category::CR;
  }
  if (has_firewalled_indicators(observed)) return Category::JU;
  for (const auto& r : observed.records)
    if (r.floodfill_flag) return Category::JRFF;
  return Category::JRnFF;
}

std::vector<ServiceProbe> probe_stage(const Scenario& scenario, const std::vector<PlannedRouter>& routers) {
  std::vector<ServiceProbe> out;
  for (const auto& t : scenario.targets) {
    for (const auto& r : routers) {
      if (r.noise || r.group != t.host) continue;
      ServiceProbe p;
      p.service = "svc-" + r.label;
      p.host = r.label;
      p.outcomes = simulate_probe(r.sessions, scenario.epoch_start, scenario.end(), t.probe_period, t.leaseset_ttl,
                                  derive_seed(scenario.seed, {fnv1a(p.service), 3}));
      out.push_back(std::move(p));
    }
  }
  return out;
}

CorrelationOutput correlate_stage(const Scenario& scenario, const std::vector<ServiceProbe>& probes,
                                  const std::vector<CorrelationInput>& routers) {
  CorrelationOutput out;
  const int days = scenario.duration_days;
  const Duration day = std::chrono::hours(24);
  // Router sequences per day, shared by every service.
  std::vector<std::vector<BehaviorSequence>> daily(static_cast<std::size_t>(days));
  for (int d = 0; d < days; ++d) {
    TimePoint ds = scenario.epoch_start + day * d;
    for (const auto& r : routers) daily[static_cast<std::size_t>(d)].push_back(serialize_behavior(r.sessions, ds, ds + day));
  }
  for (const auto& p : probes) {
    const RouterIdentity* host = nullptr;
    for (const auto& r : routers)
      if (r.label == p.host) host = &r.identity;
    auto target_sessions = probe_to_sessions(p.outcomes, scenario.epoch_start, scenario.end());
    std::vector<bool> alive(routers.size(), true);
    for (int d = 0; d < days; ++d) {
      TimePoint ds = scenario.epoch_start + day * d, de = ds + day;
      auto target = serialize_behavior(target_sessions, ds, de);
      int n = 0;
      for (const auto& s : target_sessions)
        if (s.start < de && s.end > ds) ++n;
      std::vector<Candidate> candidates;
      std::vector<std::size_t> index;
      for (std::size_t i = 0; i < routers.size(); ++i) {
        if (!alive[i]) continue;
        candidates.push_back({routers[i].identity, daily[static_cast<std::size_t>(d)][i], routers[i].category});
        index.push_back(i);
      }
      auto report = anonymity_set(target, std::max(1, n), candidates, scenario.thresholds);
      for (std::size_t k = 0; k < index.size(); ++k)
        alive[index[k]] = report.contains(routers[index[k]].identity);
      ServiceDay sd;
      sd.service = p.service;
      sd.host = p.host;
      sd.day = d + 1;
      sd.target_sessions = n;
      sd.set_size = report.size();
      sd.host_included = host && report.contains(*host);
      out.series.push_back(sd);
      out.reports.push_back(std::move(report));
    }
  }
  return out;
}

BiasReport summarize_bias(std::vector<BiasRow> rows) {
  BiasReport report;
  static const Category order[] = {Category::JRFF, Category::JRnFF, Category::JU, Category::CR, Category::CU};
  for (Category c : order) {
    std::vector<double> join, leave;
    for (const auto& r : rows)
      if (r.category == c) {
        join.push_back(r.match.join_bias_s);
        leave.push_back(r.match.leave_bias_s);
      }
    if (join.empty()) continue;
    CategoryBias b;
    b.category = c;
    b.sessions = join.size();
    b.join_median_s = quantile(join, 0.5);
    b.join_uq_s = quantile(join, 0.75);
    b.leave_median_s = quantile(leave, 0.5);
    b.leave_uq_s = quantile(leave, 0.75);
    report.per_category.push_back(b);
  }
  report.rows = std::move(rows);
  return report;
}

ScenarioResult run_scenario(const Scenario& scenario, bool with_complement) {
  scenario.validate();
  ScenarioResult result;
  result.scenario = scenario.name;
  result.with_complement = with_complement;
  auto planned = plan_routers(scenario);
  std::vector<BiasRow> rows;
  std::vector<CorrelationInput> inputs;
  for (auto& p : planned) {
    RouterRun run;
    run.sim = staged("simulate", p.label, [&] { return simulate_stage(p, scenario); });
    run.observed = staged("capture", p.label, [&] { return capture_stage(run.sim, p, scenario, &run.kept); });
    run.inference = staged("infer", p.label, [&] { return infer_stage(run.observed, scenario); });
    run.final = with_complement
                    ? staged("complement", p.label, [&] { return complement_stage(run.inference, run.observed, scenario); })
                    : run.inference;
    if (!p.noise)
      for (const auto& m : match_sessions(run.sim, run.kept, run.final.sessions))
        rows.push_back({p.label, category_of(p.config), m});
    Category seen = run.observed.records.empty() ? category_of(p.config) : infer_category(run.observed);
    inputs.push_back({p.label, p.config.identity, seen, run.final.sessions});
    run.plan = p;
    result.routers.push_back(std::move(run));
  }
  result.bias = summarize_bias(std::move(rows));
  if (!scenario.targets.empty()) {
    result.probes = staged("probe", scenario.name, [&] { return probe_stage(scenario, planned); });
    result.correlation =
        staged("correlate", scenario.name, [&] { return correlate_stage(scenario, result.probes, inputs); });
  }
  return result;
}

}  // namespace i2plive
