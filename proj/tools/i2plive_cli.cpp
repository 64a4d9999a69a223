#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "i2plive/scenario.hpp"
#include "i2plive/theory.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace i2plive;

namespace {

constexpr int kConfigError = 2;
constexpr int kStageError = 3;

struct Options {
  std::string scenario;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
};

Scenario load(const Options& o) {
  Scenario sc = load_scenario(o.scenario);
  if (o.seed) sc.seed = *o.seed;
  return sc;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return json::parse(in);
}

void write_json(const fs::path& p, const json& j) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << j.dump() << '\n';
}

fs::path stage_file(const Options& o, const char* stage, const std::string& label, const char* ext = ".jsonl") {
  return fs::path(o.out) / stage / (label + ext);
}

SimOutput load_sim(const Options& o, const PlannedRouter& r) {
  SimOutput sim;
  sim.full_trace = read_trace(stage_file(o, "traces", r.label), r.config.identity);
  sim.ground_truth_sessions = read_sessions(stage_file(o, "truth", r.label));
  return sim;
}

json inference_meta(const SessionInference& inf) {
  json marks = json::array(), diags = json::array();
  for (std::size_t i = 0; i < inf.routine_marks.size(); ++i)
    if (inf.routine_marks[i]) marks.push_back(i);
  for (const auto& d : inf.diagnostics)
    diags.push_back({{"case", static_cast<int>(d.label)}, {"session", d.session}, {"note", d.note}});
  return {{"routine_marks", marks}, {"diagnostics", diags}};
}

SessionInference load_inference(const Options& o, const char* stage, const PlannedRouter& r, std::size_t n) {
  SessionInference inf;
  inf.sessions = read_sessions(stage_file(o, stage, r.label));
  json meta = read_json(stage_file(o, stage, r.label, ".meta.json"));
  inf.routine_marks.assign(n, false);
  for (auto i : meta.at("routine_marks")) inf.routine_marks.at(i.get<std::size_t>()) = true;
  for (const auto& d : meta.at("diagnostics")) {
    CaseLabel c = case_from_int(d.at("case").get<int>());
    inf.diagnostics.push_back({c, severity_of(c), d.at("session").get<std::size_t>(), d.at("note").get<std::string>()});
  }
  return inf;
}

ObservedTrace load_observed(const Options& o, const PlannedRouter& r) {
  return observe(read_trace(stage_file(o, "observed", r.label), r.config.identity));
}

template <typename F>
void each_router(const Scenario& sc, const char* stage, F&& f) {
  for (const auto& r : plan_routers(sc)) {
    try {
      f(r);
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(stage, r.label + ": " + e.what());
    }
  }
}

void cmd_simulate(const Options& o) {
  Scenario sc = load(o);
  json manifest = json::array();
  each_router(sc, "simulate", [&](const PlannedRouter& r) {
    SimOutput sim = simulate_stage(r, sc);
    fs::create_directories(fs::path(o.out) / "traces");
    fs::create_directories(fs::path(o.out) / "truth");
    write_trace(sim.full_trace, stage_file(o, "traces", r.label));
    write_sessions(r.config.identity, sim.ground_truth_sessions, stage_file(o, "truth", r.label));
    manifest.push_back({{"label", r.label},
                        {"group", r.group},
                        {"identity", r.config.identity.hex()},
                        {"category", to_string(category_of(r.config))},
                        {"patched", r.config.patched},
                        {"synthetic", r.noise}});
  });
  write_json(fs::path(o.out) / "routers.json", {{"format", "i2plive-routers"}, {"version", 1}, {"routers", manifest}});
}

void cmd_capture(const Options& o) {
  Scenario sc = load(o);
  each_router(sc, "capture", [&](const PlannedRouter& r) {
    SimOutput sim = load_sim(o, r);
    std::vector<std::size_t> kept;
    ObservedTrace obs = capture_stage(sim, r, sc, &kept);
    fs::create_directories(fs::path(o.out) / "observed");
    write_trace(to_router_trace(obs), stage_file(o, "observed", r.label));
    write_json(stage_file(o, "observed", r.label, ".kept.json"), kept);
  });
}

void cmd_infer(const Options& o) {
  Scenario sc = load(o);
  each_router(sc, "infer", [&](const PlannedRouter& r) {
    ObservedTrace obs = load_observed(o, r);
    SessionInference inf = infer_stage(obs, sc);
    fs::create_directories(fs::path(o.out) / "inferred");
    write_sessions(r.config.identity, inf.sessions, stage_file(o, "inferred", r.label));
    write_json(stage_file(o, "inferred", r.label, ".meta.json"), inference_meta(inf));
  });
}

void cmd_complement(const Options& o) {
  Scenario sc = load(o);
  each_router(sc, "complement", [&](const PlannedRouter& r) {
    ObservedTrace obs = load_observed(o, r);
    SessionInference inf = load_inference(o, "inferred", r, obs.size());
    SessionInference out = complement_stage(inf, obs, sc);
    fs::create_directories(fs::path(o.out) / "complemented");
    write_sessions(r.config.identity, out.sessions, stage_file(o, "complemented", r.label));
    write_json(stage_file(o, "complemented", r.label, ".meta.json"), inference_meta(out));
  });
}

void cmd_probe(const Options& o) {
  Scenario sc = load(o);
  auto routers = plan_routers(sc);
  // Probe against the recorded ground truth of each host.
  for (auto& r : routers)
    if (!r.noise) r.sessions = read_sessions(stage_file(o, "truth", r.label));
  std::vector<ServiceProbe> probes;
  try {
    probes = probe_stage(sc, routers);
  } catch (const std::exception& e) {
    throw StageError("probe", e.what());
  }
  fs::create_directories(fs::path(o.out) / "probes");
  for (const auto& p : probes) {
    std::ofstream out(stage_file(o, "probes", p.service));
    if (!out) throw StageError("probe", "cannot write probes for " + p.service);
    out << json{{"format", "i2plive-probes"}, {"version", 1}, {"service", p.service}, {"host", p.host}}.dump() << '\n';
    for (const auto& x : p.outcomes)
      out << json{{"time", format_time(x.time)}, {"result", to_string(x.result)}}.dump() << '\n';
  }
}

std::vector<ProbeOutcome> read_probes(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<ProbeOutcome> out;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    ProbeOutcome p;
    p.time = parse_time_string(j.at("time").get<std::string>());
    std::string r = j.at("result").get<std::string>();
    if (r == "Connected") p.result = ProbeResult::Connected;
    else if (r == "LeaseSetStaleNoConnect") p.result = ProbeResult::LeaseSetStaleNoConnect;
    else if (r == "LeaseSetMiss") p.result = ProbeResult::LeaseSetMiss;
    else throw std::runtime_error("bad probe result '" + r + "'");
    out.push_back(p);
  }
  return out;
}

void cmd_correlate(const Options& o) {
  Scenario sc = load(o);
  ScenarioResult result;
  result.scenario = sc.name;
  result.with_complement = fs::exists(fs::path(o.out) / "complemented");
  const char* stage = result.with_complement ? "complemented" : "inferred";
  std::vector<BiasRow> rows;
  std::vector<CorrelationInput> inputs;
  each_router(sc, "correlate", [&](const PlannedRouter& r) {
    RouterRun run;
    run.plan = r;
    run.sim = load_sim(o, r);
    run.observed = load_observed(o, r);
    for (auto i : read_json(stage_file(o, "observed", r.label, ".kept.json"))) run.kept.push_back(i.get<std::size_t>());
    run.final = load_inference(o, stage, r, run.observed.size());
    if (!r.noise)
      for (const auto& m : match_sessions(run.sim, run.kept, run.final.sessions))
        rows.push_back({r.label, category_of(r.config), m});
    Category seen = run.observed.records.empty() ? category_of(r.config) : infer_category(run.observed);
    inputs.push_back({r.label, r.config.identity, seen, run.final.sessions});
    result.routers.push_back(std::move(run));
  });
  result.bias = summarize_bias(std::move(rows));
  try {
    for (const auto& t : sc.targets)
      for (const auto& r : result.routers) {
        if (r.plan.noise || r.plan.group != t.host) continue;
        ServiceProbe p;
        p.service = "svc-" + r.plan.label;
        p.host = r.plan.label;
        p.outcomes = read_probes(stage_file(o, "probes", p.service));
        result.probes.push_back(std::move(p));
      }
    result.correlation = correlate_stage(sc, result.probes, inputs);
    emit_report(result, fs::path(o.out) / "reports");
  } catch (const std::exception& e) {
    throw StageError("correlate", e.what());
  }
}

std::vector<double> parse_probs(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

void cmd_run(const Options& o) {
  Scenario sc = load(o);
  ScenarioResult result = run_scenario(sc, sc.with_complement);
  try {
    emit_report(result, o.out);
  } catch (const std::exception& e) {
    throw StageError("report", e.what());
  }
  for (const auto& s : result.correlation.series)
    std::printf("%s day %d set_size %zu host_included %d\n", s.service.c_str(), s.day, s.set_size,
                s.host_included ? 1 : 0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Live-behavior inference toolkit for I2P router traces"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", opt.scenario, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--seed", opt.seed, "Seed overriding the scenario file");
  };
  struct Stage {
    const char* name;
    const char* help;
    void (*fn)(const Options&);
  };
  const Stage stages[] = {
      {"simulate", "Simulate publication traces and ground truth", cmd_simulate},
      {"capture", "Apply the capture model to simulated traces", cmd_capture},
      {"infer", "Infer online sessions from observed traces", cmd_infer},
      {"complement", "Complement inferred sessions", cmd_complement},
      {"probe", "Probe the target services", cmd_probe},
      {"correlate", "Correlate probes with inferred sessions and write reports", cmd_correlate},
      {"run", "Run the whole pipeline and write reports", cmd_run},
  };
  void (*chosen)(const Options&) = nullptr;
  for (const auto& s : stages) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common(sub);
    sub->callback([&chosen, fn = s.fn] { chosen = fn; });
  }

  std::string on = "0.5,0.5", off = "0.5,0.5";
  std::uint64_t trials = 100000, theory_seed = 1;
  std::vector<int> ns{2, 3, 5}, ms{1, 2, 5, 10};
  auto* theory = app.add_subcommand("theory", "Closed-form uniqueness probability against Monte Carlo");
  theory->add_option("--on", on, "On-period probabilities, comma separated");
  theory->add_option("--off", off, "Off-period probabilities, comma separated");
  theory->add_option("--trials", trials, "Monte Carlo trials per grid point");
  theory->add_option("--seed", theory_seed, "Monte Carlo seed");
  theory->add_option("--n", ns, "Numbers of processes");
  theory->add_option("--m", ms, "Numbers of cycles");
  bool run_theory = false;
  theory->callback([&] { run_theory = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  try {
    if (run_theory) {
      CycleDistribution dist{parse_probs(on), parse_probs(off)};
      dist.validate();
      std::printf("n,m,P_A,mc_estimate,mc_stderr\n");
      for (int n : ns)
        for (int m : ms) {
          auto mc = monte_carlo_uniqueness(n, m, dist, trials, theory_seed);
          std::printf("%d,%d,%.6f,%.6f,%.6f\n", n, m, uniqueness_prob(n, m, dist), mc.estimate, mc.std_error);
        }
      return 0;
    }
    chosen(opt);
    return 0;
  } catch (const InvalidConfig& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const StageError& e) {
    std::fprintf(stderr, "stage error [%s]\n", e.what());
    return kStageError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kStageError;
  }
}
