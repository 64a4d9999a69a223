#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace i2plive {

using Duration = std::chrono::milliseconds;
using TimePoint = std::chrono::sys_time<Duration>;

// Fractional minutes, rounded to the nearest millisecond.
Duration minutes_f(double minutes);
double to_minutes(Duration d);
double to_seconds(Duration d);
std::int64_t millis(TimePoint t);
TimePoint from_millis(std::int64_t ms);

class InvalidSchedule : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct RouterIdentity {
  std::array<std::uint8_t, 32> id_bytes{};
  std::string label;

  std::string hex() const;
  static RouterIdentity from_hex(const std::string& hex, std::string label = {});
  // Deterministic identity derived from a label (SHA-256 of the label).
  static RouterIdentity from_label(const std::string& label);

  friend bool operator==(const RouterIdentity& a, const RouterIdentity& b) {
    return a.id_bytes == b.id_bytes;
  }
};

enum class ImplementationKind { JavaI2P, CppI2P };

// Ordered: None < D < E < G.
enum class CongestionFlag { None = 0, D = 1, E = 2, G = 3 };

enum class Reachability { R, U, Undetermined };

enum class TransportProtocol { NTCP2, SSU, SSU2 };

enum class TruthKind { Initial, Routine, PeerTest, Leave, IntroducerUpdate, Other };

enum class StartQuality { ExactJoin, SupplementedJoin, CoarseOnly };
enum class EndQuality { ExactLeave, SupplementedLeave, CoarseOnly };

struct RouterConfig {
  RouterIdentity identity;
  ImplementationKind impl = ImplementationKind::JavaI2P;
  bool floodfill = false;
  bool reachable = true;
  bool patched = false;
};

// Evaluation category: J-R-FF, J-R-nFF, J-U, C-R, C-U.
enum class Category { JRFF, JRnFF, JU, CR, CU };
Category category_of(const RouterConfig& config);
const char* to_string(Category c);
Category category_from_string(const std::string& s);
RouterConfig config_for(Category c, RouterIdentity identity, bool patched = false);

struct RouterAddressSummary {
  TransportProtocol protocol = TransportProtocol::NTCP2;
  int cost = 0;
  bool ip_present = true;
  std::int64_t introducer_set_id = 0;
  bool peer_test = false;   // 'B'
  bool introducer = false;  // 'C'

  friend bool operator==(const RouterAddressSummary&, const RouterAddressSummary&) = default;
};

struct RouterInfoRecord {
  RouterIdentity identity;
  TimePoint publish_time{};
  bool floodfill_flag = false;
  CongestionFlag congestion = CongestionFlag::None;
  Reachability reachability = Reachability::R;
  std::vector<RouterAddressSummary> addresses;
  std::optional<TruthKind> truth_kind;

  friend bool operator==(const RouterInfoRecord& a, const RouterInfoRecord& b) {
    return a.identity == b.identity && a.identity.label == b.identity.label &&
           a.publish_time == b.publish_time && a.floodfill_flag == b.floodfill_flag &&
           a.congestion == b.congestion && a.reachability == b.reachability &&
           a.addresses == b.addresses && a.truth_kind == b.truth_kind;
  }

  // Introducer set id of the first address that has one, else 0.
  std::int64_t introducer_set_id() const;
  bool any_ip_absent() const;
};

struct RouterTrace {
  RouterIdentity identity;
  std::vector<RouterInfoRecord> records;

  friend bool operator==(const RouterTrace& a, const RouterTrace& b) {
    return a.identity == b.identity && a.identity.label == b.identity.label &&
           a.records == b.records;
  }
};

// Record as seen by the attacker. It has no ground-truth field, so inference
// code written against this type cannot read one.
struct ObservedRecord {
  TimePoint publish_time{};
  bool floodfill_flag = false;
  CongestionFlag congestion = CongestionFlag::None;
  Reachability reachability = Reachability::R;
  std::vector<RouterAddressSummary> addresses;

  std::int64_t introducer_set_id() const;
  bool any_ip_absent() const;
};

struct ObservedTrace {
  RouterIdentity identity;
  std::vector<ObservedRecord> records;

  std::size_t size() const { return records.size(); }
  TimePoint time(std::size_t i) const { return records[i].publish_time; }
};

ObservedTrace observe(const RouterTrace& trace);
// Converts back to the on-disk record type (truth_kind absent).
RouterTrace to_router_trace(const ObservedTrace& trace);

struct BehaviorSchedule {
  TimePoint epoch_start{};
  std::vector<int> pattern;  // minutes; positive = online, negative = offline
  int repeat_days = 1;

  Duration day_length() const;
};

struct OnlineSession {
  TimePoint start{};
  TimePoint end{};
  std::vector<std::size_t> record_indices;
  StartQuality start_quality = StartQuality::CoarseOnly;
  EndQuality end_quality = EndQuality::CoarseOnly;

  friend bool operator==(const OnlineSession&, const OnlineSession&) = default;
};

std::vector<OnlineSession> expand_schedule(const BehaviorSchedule& schedule);

struct TraceViolation {
  std::size_t record_index;
  std::string message;
};

// Empty result means the trace is well formed. With `observed` set, any
// truth_kind annotation is reported as leakage.
std::vector<TraceViolation> validate_trace(const RouterTrace& trace, bool observed = false);

void write_trace(const RouterTrace& trace, const std::filesystem::path& path);
// A file with no lines yields an empty trace for `declared` (or a blank
// identity when none is given). A header line overrides `declared`.
RouterTrace read_trace(const std::filesystem::path& path,
                       const std::optional<RouterIdentity>& declared = std::nullopt);

void write_sessions(const RouterIdentity& identity, const std::vector<OnlineSession>& sessions,
                    const std::filesystem::path& path);
std::vector<OnlineSession> read_sessions(const std::filesystem::path& path,
                                         RouterIdentity* identity = nullptr);

const char* to_string(CongestionFlag f);
const char* to_string(Reachability r);
const char* to_string(TransportProtocol p);
const char* to_string(TruthKind k);
const char* to_string(StartQuality q);
const char* to_string(EndQuality q);
const char* to_string(ImplementationKind k);

std::string format_time(TimePoint t);  // ISO-8601 UTC with milliseconds
// Inverse of format_time; throws std::invalid_argument.
TimePoint parse_time_string(const std::string& s);

}  // namespace i2plive
