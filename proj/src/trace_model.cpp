#include "i2plive/trace_model.hpp"

#include <openssl/sha.h>

#include <cmath>
#include <ctime>
#include <iomanip>
#include <sstream>

namespace i2plive {

Duration minutes_f(double minutes) {
  return Duration(static_cast<std::int64_t>(std::llround(minutes * 60000.0)));
}

double to_minutes(Duration d) { return static_cast<double>(d.count()) / 60000.0; }
double to_seconds(Duration d) { return static_cast<double>(d.count()) / 1000.0; }
std::int64_t millis(TimePoint t) { return t.time_since_epoch().count(); }
TimePoint from_millis(std::int64_t ms) { return TimePoint(Duration(ms)); }

ParseError::ParseError(const std::string& path, std::size_t line, const std::string& what)
    : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

std::string RouterIdentity::hex() const {
  std::ostringstream out;
  out << std::hex << std::setfill('0');
  for (auto b : id_bytes) out << std::setw(2) << static_cast<int>(b);
  return out.str();
}

RouterIdentity RouterIdentity::from_hex(const std::string& hex, std::string label) {
  if (hex.size() != 64) throw std::invalid_argument("identity hex must be 64 characters");
  RouterIdentity id;
  id.label = std::move(label);
  for (std::size_t i = 0; i < 32; ++i) {
    unsigned v = 0;
    std::istringstream in(hex.substr(2 * i, 2));
    if (!(in >> std::hex >> v)) throw std::invalid_argument("identity hex is not hexadecimal");
    id.id_bytes[i] = static_cast<std::uint8_t>(v);
  }
  return id;
}

RouterIdentity RouterIdentity::from_label(const std::string& label) {
  RouterIdentity id;
  id.label = label;
  SHA256(reinterpret_cast<const unsigned char*>(label.data()), label.size(), id.id_bytes.data());
  return id;
}

Category category_of(const RouterConfig& c) {
  if (c.impl == ImplementationKind::CppI2P) return c.reachable ? Category::CR : Category::CU;
  if (!c.reachable) return Category::JU;
  return c.floodfill ? Category::JRFF : Category::JRnFF;
}

const char* to_string(Category c) {
  switch (c) {
    case Category::JRFF: return "J-R-FF";
    case Category::JRnFF: return "J-R-nFF";
    case Category::JU: return "J-U";
    case Category::CR: return "C-R";
    case Category::CU: return "C-U";
  }
  return "?";
}

Category category_from_string(const std::string& s) {
  for (auto c : {Category::JRFF, Category::JRnFF, Category::JU, Category::CR, Category::CU})
    if (s == to_string(c)) return c;
  throw InvalidConfig("unknown router category '" + s + "'");
}

RouterConfig config_for(Category c, RouterIdentity identity, bool patched) {
  RouterConfig cfg;
  cfg.identity = std::move(identity);
  cfg.patched = patched;
  switch (c) {
    case Category::JRFF: cfg.floodfill = true; break;
    case Category::JRnFF: break;
    case Category::JU: cfg.reachable = false; break;
    case Category::CR: cfg.impl = ImplementationKind::CppI2P; break;
    case Category::CU:
      cfg.impl = ImplementationKind::CppI2P;
      cfg.reachable = false;
      break;
  }
  return cfg;
}

namespace {

std::int64_t first_introducer(const std::vector<RouterAddressSummary>& addrs) {
  for (const auto& a : addrs)
    if (a.introducer_set_id != 0) return a.introducer_set_id;
  return 0;
}

bool ip_absent(const std::vector<RouterAddressSummary>& addrs) {
  for (const auto& a : addrs)
    if (!a.ip_present) return true;
  return false;
}

}  // namespace

std::int64_t RouterInfoRecord::introducer_set_id() const { return first_introducer(addresses); }
bool RouterInfoRecord::any_ip_absent() const { return ip_absent(addresses); }
std::int64_t ObservedRecord::introducer_set_id() const { return first_introducer(addresses); }
bool ObservedRecord::any_ip_absent() const { return ip_absent(addresses); }

ObservedTrace observe(const RouterTrace& trace) {
  ObservedTrace out;
  out.identity = trace.identity;
  out.records.reserve(trace.records.size());
  for (const auto& r : trace.records)
    out.records.push_back({r.publish_time, r.floodfill_flag, r.congestion, r.reachability, r.addresses});
  return out;
}

RouterTrace to_router_trace(const ObservedTrace& trace) {
  RouterTrace out;
  out.identity = trace.identity;
  for (const auto& r : trace.records) {
    RouterInfoRecord rec;
    rec.identity = trace.identity;
    rec.publish_time = r.publish_time;
    rec.floodfill_flag = r.floodfill_flag;
    rec.congestion = r.congestion;
    rec.reachability = r.reachability;
    rec.addresses = r.addresses;
    out.records.push_back(std::move(rec));
  }
  return out;
}

Duration BehaviorSchedule::day_length() const {
  std::int64_t total = 0;
  for (int p : pattern) total += std::abs(p);
  return std::chrono::minutes(total);
}

std::vector<OnlineSession> expand_schedule(const BehaviorSchedule& schedule) {
  for (int p : schedule.pattern)
    if (p == 0) throw InvalidSchedule("schedule pattern contains a zero entry");
  if (schedule.repeat_days < 0) throw InvalidSchedule("repeat_days must be non-negative");

  std::vector<OnlineSession> out;
  TimePoint t = schedule.epoch_start;
  for (int day = 0; day < schedule.repeat_days; ++day) {
    for (int p : schedule.pattern) {
      Duration len = std::chrono::minutes(std::abs(p));
      if (p > 0) {
        // Online runs that touch (across a day boundary or written back to
        // back) describe one continuous session.
        if (!out.empty() && out.back().end == t) {
          out.back().end = t + len;
        } else {
          OnlineSession s;
          s.start = t;
          s.end = t + len;
          s.start_quality = StartQuality::ExactJoin;
          s.end_quality = EndQuality::ExactLeave;
          out.push_back(s);
        }
      }
      t += len;
    }
  }
  return out;
}

std::vector<TraceViolation> validate_trace(const RouterTrace& trace, bool observed) {
  std::vector<TraceViolation> out;
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& r = trace.records[i];
    if (!(r.identity == trace.identity)) out.push_back({i, "identity mismatch"});
    if (i > 0 && r.publish_time <= trace.records[i - 1].publish_time)
      out.push_back({i, "non-increasing time"});
    if (millis(r.publish_time) < 0) out.push_back({i, "negative time"});
    if (observed && r.truth_kind) out.push_back({i, "truth_kind leakage"});
  }
  return out;
}

const char* to_string(CongestionFlag f) {
  switch (f) {
    case CongestionFlag::None: return "None";
    case CongestionFlag::D: return "D";
    case CongestionFlag::E: return "E";
    case CongestionFlag::G: return "G";
  }
  return "?";
}

const char* to_string(Reachability r) {
  switch (r) {
    case Reachability::R: return "R";
    case Reachability::U: return "U";
    case Reachability::Undetermined: return "Undetermined";
  }
  return "?";
}

const char* to_string(TransportProtocol p) {
  switch (p) {
    case TransportProtocol::NTCP2: return "NTCP2";
    case TransportProtocol::SSU: return "SSU";
    case TransportProtocol::SSU2: return "SSU2";
  }
  return "?";
}

const char* to_string(TruthKind k) {
  switch (k) {
    case TruthKind::Initial: return "Initial";
    case TruthKind::Routine: return "Routine";
    case TruthKind::PeerTest: return "PeerTest";
    case TruthKind::Leave: return "Leave";
    case TruthKind::IntroducerUpdate: return "IntroducerUpdate";
    case TruthKind::Other: return "Other";
  }
  return "?";
}

const char* to_string(StartQuality q) {
  switch (q) {
    case StartQuality::ExactJoin: return "ExactJoin";
    case StartQuality::SupplementedJoin: return "SupplementedJoin";
    case StartQuality::CoarseOnly: return "CoarseOnly";
  }
  return "?";
}

const char* to_string(EndQuality q) {
  switch (q) {
    case EndQuality::ExactLeave: return "ExactLeave";
    case EndQuality::SupplementedLeave: return "SupplementedLeave";
    case EndQuality::CoarseOnly: return "CoarseOnly";
  }
  return "?";
}

const char* to_string(ImplementationKind k) {
  return k == ImplementationKind::JavaI2P ? "JavaI2P" : "CppI2P";
}

std::string format_time(TimePoint t) {
  auto ms = millis(t);
  std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0')
      << (ms % 1000) << 'Z';
  return out.str();
}

}  // namespace i2plive
