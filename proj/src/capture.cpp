#include "i2plive/capture.hpp"

#include <openssl/sha.h>

#include <ctime>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "i2plive/random.hpp"

namespace i2plive {

CaptureModel CaptureModel::fixed(double p) {
  if (p < 0 || p > 1) throw InvalidConfig("capture probability must lie in [0,1]");
  CaptureModel m;
  m.mode = Mode::FixedRate;
  m.p = p;
  return m;
}

CaptureModel CaptureModel::curve(int floodfill_count, std::map<int, double> table) {
  CaptureModel m;
  m.mode = Mode::FloodfillCurve;
  m.floodfill_count = floodfill_count;
  m.table = std::move(table);
  for (const auto& [k, v] : m.table)
    if (k <= 0 || v < 0 || v > 1) throw InvalidConfig("capture curve entries must be positive keys with rates in [0,1]");
  return m;
}

std::map<int, double> CaptureModel::default_curve() {
  // 15 routers -> 0.90 is the measured point; the neighbours are operator
  // settings that keep the curve monotone.
  return {{1, 0.20}, {5, 0.55}, {10, 0.80}, {13, 0.87}, {15, 0.90}, {18, 0.93}, {25, 0.96}};
}

double CaptureModel::retention_prob() const {
  return mode == Mode::FixedRate ? p : capture_rate_for(floodfill_count, *this);
}

double capture_rate_for(int ff_count, const CaptureModel& model) {
  if (model.table.empty()) throw InvalidConfig("capture curve table is empty");
  const auto& t = model.table;
  if (ff_count <= t.begin()->first) return t.begin()->second;
  if (ff_count >= t.rbegin()->first) return t.rbegin()->second;
  auto hi = t.lower_bound(ff_count);
  if (hi->first == ff_count) return hi->second;
  auto lo = std::prev(hi);
  double f = static_cast<double>(ff_count - lo->first) / (hi->first - lo->first);
  return lo->second + f * (hi->second - lo->second);
}

RoutingKey compute_routing_key(const std::uint8_t* identifier, std::size_t length,
                               const std::string& date) {
  if (length != 32) throw std::invalid_argument("router identifier must be 32 bytes");
  if (date.size() != 8) throw std::invalid_argument("date must be an 8-character YYYYMMDD string");
  unsigned char buf[SHA256_DIGEST_LENGTH + 8];
  SHA256(identifier, length, buf);
  std::copy(date.begin(), date.end(), buf + SHA256_DIGEST_LENGTH);
  RoutingKey key;
  SHA256(buf, sizeof(buf), key.data());
  return key;
}

RoutingKey compute_routing_key(const RouterIdentity& identity, const std::string& date) {
  return compute_routing_key(identity.id_bytes.data(), identity.id_bytes.size(), date);
}

std::string utc_day_string(TimePoint t) {
  std::time_t secs = static_cast<std::time_t>(millis(t) / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y%m%d");
  return out.str();
}

RoutingKey routing_key_at(const RouterIdentity& identity, TimePoint t) {
  return compute_routing_key(identity, utc_day_string(t));
}

std::string to_hex(const RoutingKey& key) {
  std::ostringstream out;
  out << std::hex << std::setfill('0');
  for (auto b : key) out << std::setw(2) << static_cast<int>(b);
  return out.str();
}

ObservedTrace capture_indexed(const SimOutput& output, const CaptureModel& model,
                              std::uint64_t seed, std::vector<std::size_t>* kept) {
  const double p = model.retention_prob();
  if (p < 0 || p > 1) throw InvalidConfig("capture probability must lie in [0,1]");
  Rng rng(seed);
  ObservedTrace out;
  out.identity = output.full_trace.identity;
  std::int64_t burst_left = 0;
  const auto& records = output.full_trace.records;
  for (std::size_t i = 0; i < records.size(); ++i) {
    bool keep;
    if (model.burst_q > 0) {
      if (burst_left > 0) {
        --burst_left;
        keep = false;
      } else if (!bernoulli(rng, p)) {
        std::geometric_distribution<std::int64_t> extra(1.0 - model.burst_q);
        burst_left = extra(rng);
        keep = false;
      } else {
        keep = true;
      }
    } else {
      keep = bernoulli(rng, p);
    }
    if (!keep) continue;
    const auto& r = records[i];
    out.records.push_back({r.publish_time, r.floodfill_flag, r.congestion, r.reachability, r.addresses});
    if (kept) kept->push_back(i);
  }
  return out;
}

ObservedTrace capture(const SimOutput& output, const CaptureModel& model, std::uint64_t seed) {
  return capture_indexed(output, model, seed, nullptr);
}

}  // namespace i2plive
