#include <fstream>
#include <set>

#include <json.hpp>

#include "i2plive/trace_model.hpp"

namespace i2plive {

using nlohmann::json;

namespace {

constexpr int kTraceVersion = 1;
constexpr int kSessionsVersion = 1;

template <typename E, std::size_t N>
E parse_enum(const std::string& s, const E (&values)[N], const char* field) {
  for (E v : values)
    if (s == to_string(v)) return v;
  throw std::invalid_argument(std::string("bad value '") + s + "' for field '" + field + "'");
}

void check_fields(const json& obj, std::initializer_list<const char*> allowed) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) throw std::invalid_argument("unknown field '" + it.key() + "'");
}

std::int64_t parse_time(const json& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_string()) {
    // ISO-8601 UTC: YYYY-MM-DDTHH:MM:SS[.mmm]Z
    std::string s = v.get<std::string>();
    std::tm tm{};
    int ms = 0;
    char frac[8] = {0};
    if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d", &tm.tm_year, &tm.tm_mon, &tm.tm_mday,
                    &tm.tm_hour, &tm.tm_min, &tm.tm_sec) != 6)
      throw std::invalid_argument("bad timestamp '" + s + "'");
    auto dot = s.find('.');
    if (dot != std::string::npos) {
      std::sscanf(s.c_str() + dot + 1, "%3[0-9]", frac);
      std::string f(frac);
      while (f.size() < 3) f += '0';
      ms = std::stoi(f);
    }
    tm.tm_year -= 1900;
    tm.tm_mon -= 1;
    return static_cast<std::int64_t>(timegm(&tm)) * 1000 + ms;
  }
  throw std::invalid_argument("timestamp must be an integer or ISO-8601 string");
}

json address_to_json(const RouterAddressSummary& a) {
  std::string abilities;
  if (a.peer_test) abilities += 'B';
  if (a.introducer) abilities += 'C';
  return json{{"protocol", to_string(a.protocol)},
              {"cost", a.cost},
              {"ip_present", a.ip_present},
              {"introducer_set_id", a.introducer_set_id},
              {"abilities", abilities}};
}

RouterAddressSummary address_from_json(const json& j) {
  check_fields(j, {"protocol", "cost", "ip_present", "introducer_set_id", "abilities"});
  static constexpr TransportProtocol kProtocols[] = {TransportProtocol::NTCP2, TransportProtocol::SSU,
                                                     TransportProtocol::SSU2};
  RouterAddressSummary a;
  a.protocol = parse_enum(j.at("protocol").get<std::string>(), kProtocols, "protocol");
  a.cost = j.at("cost").get<int>();
  a.ip_present = j.value("ip_present", true);
  a.introducer_set_id = j.value("introducer_set_id", std::int64_t{0});
  std::string abilities = j.value("abilities", std::string());
  for (char c : abilities) {
    if (c == 'B') a.peer_test = true;
    else if (c == 'C') a.introducer = true;
    else throw std::invalid_argument(std::string("bad ability '") + c + "'");
  }
  return a;
}

json record_to_json(const RouterInfoRecord& r, const RouterIdentity& header) {
  json j;
  j["publish_time"] = millis(r.publish_time);
  if (!(r.identity == header) || r.identity.label != header.label) {
    j["identity"] = r.identity.hex();
    j["label"] = r.identity.label;
  }
  j["floodfill_flag"] = r.floodfill_flag;
  j["congestion"] = to_string(r.congestion);
  j["reachability"] = to_string(r.reachability);
  j["addresses"] = json::array();
  for (const auto& a : r.addresses) j["addresses"].push_back(address_to_json(a));
  if (r.truth_kind) j["truth_kind"] = to_string(*r.truth_kind);
  return j;
}

RouterInfoRecord record_from_json(const json& j, const RouterIdentity& header) {
  check_fields(j, {"publish_time", "identity", "label", "floodfill_flag", "congestion",
                   "reachability", "addresses", "truth_kind"});
  static constexpr CongestionFlag kFlags[] = {CongestionFlag::None, CongestionFlag::D,
                                              CongestionFlag::E, CongestionFlag::G};
  static constexpr Reachability kReach[] = {Reachability::R, Reachability::U,
                                            Reachability::Undetermined};
  static constexpr TruthKind kKinds[] = {TruthKind::Initial, TruthKind::Routine,
                                         TruthKind::PeerTest, TruthKind::Leave,
                                         TruthKind::IntroducerUpdate, TruthKind::Other};
  RouterInfoRecord r;
  r.identity = header;
  if (j.contains("identity"))
    r.identity = RouterIdentity::from_hex(j["identity"].get<std::string>(),
                                          j.value("label", std::string()));
  r.publish_time = from_millis(parse_time(j.at("publish_time")));
  r.floodfill_flag = j.value("floodfill_flag", false);
  r.congestion = parse_enum(j.value("congestion", std::string("None")), kFlags, "congestion");
  r.reachability = parse_enum(j.value("reachability", std::string("R")), kReach, "reachability");
  if (j.contains("addresses"))
    for (const auto& a : j["addresses"]) r.addresses.push_back(address_from_json(a));
  if (j.contains("truth_kind"))
    r.truth_kind = parse_enum(j["truth_kind"].get<std::string>(), kKinds, "truth_kind");
  return r;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_trace(const RouterTrace& trace, const std::filesystem::path& path) {
  auto out = open_out(path);
  json header{{"format", "i2plive-trace"},
              {"version", kTraceVersion},
              {"identity", trace.identity.hex()},
              {"label", trace.identity.label}};
  out << header.dump() << '\n';
  for (const auto& r : trace.records) out << record_to_json(r, trace.identity).dump() << '\n';
}

RouterTrace read_trace(const std::filesystem::path& path,
                       const std::optional<RouterIdentity>& declared) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  RouterTrace trace;
  if (declared) trace.identity = *declared;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      if (!have_header) {
        check_fields(j, {"format", "version", "identity", "label"});
        if (j.value("format", std::string()) != "i2plive-trace")
          throw std::invalid_argument("missing i2plive-trace header");
        if (j.value("version", 0) != kTraceVersion)
          throw std::invalid_argument("unsupported trace version");
        trace.identity = RouterIdentity::from_hex(j.at("identity").get<std::string>(),
                                                  j.value("label", std::string()));
        have_header = true;
        continue;
      }
      trace.records.push_back(record_from_json(j, trace.identity));
    } catch (const std::exception& e) {
      throw ParseError(path.string(), lineno, e.what());
    }
  }
  return trace;
}

void write_sessions(const RouterIdentity& identity, const std::vector<OnlineSession>& sessions,
                    const std::filesystem::path& path) {
  auto out = open_out(path);
  json header{{"format", "i2plive-sessions"},
              {"version", kSessionsVersion},
              {"identity", identity.hex()},
              {"label", identity.label}};
  out << header.dump() << '\n';
  for (const auto& s : sessions) {
    json j{{"start", millis(s.start)},
           {"end", millis(s.end)},
           {"start_quality", to_string(s.start_quality)},
           {"end_quality", to_string(s.end_quality)},
           {"record_indices", s.record_indices}};
    out << j.dump() << '\n';
  }
}

std::vector<OnlineSession> read_sessions(const std::filesystem::path& path,
                                         RouterIdentity* identity) {
  static constexpr StartQuality kStart[] = {StartQuality::ExactJoin, StartQuality::SupplementedJoin,
                                            StartQuality::CoarseOnly};
  static constexpr EndQuality kEnd[] = {EndQuality::ExactLeave, EndQuality::SupplementedLeave,
                                        EndQuality::CoarseOnly};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<OnlineSession> out;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      if (!have_header) {
        if (j.value("format", std::string()) != "i2plive-sessions")
          throw std::invalid_argument("missing i2plive-sessions header");
        if (identity)
          *identity = RouterIdentity::from_hex(j.at("identity").get<std::string>(),
                                               j.value("label", std::string()));
        have_header = true;
        continue;
      }
      check_fields(j, {"start", "end", "start_quality", "end_quality", "record_indices"});
      OnlineSession s;
      s.start = from_millis(parse_time(j.at("start")));
      s.end = from_millis(parse_time(j.at("end")));
      s.start_quality = parse_enum(j.at("start_quality").get<std::string>(), kStart, "start_quality");
      s.end_quality = parse_enum(j.at("end_quality").get<std::string>(), kEnd, "end_quality");
      s.record_indices = j.value("record_indices", std::vector<std::size_t>{});
      out.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw ParseError(path.string(), lineno, e.what());
    }
  }
  return out;
}

TimePoint parse_time_string(const std::string& s) { return from_millis(parse_time(json(s))); }

}  // namespace i2plive
