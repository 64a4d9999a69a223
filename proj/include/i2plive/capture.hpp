#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "i2plive/router_sim.hpp"

namespace i2plive {

struct CaptureModel {
  enum class Mode { FixedRate, FloodfillCurve };
  Mode mode = Mode::FixedRate;
  double p = 1.0;
  std::map<int, double> table;  // floodfill count -> capture rate
  int floodfill_count = 15;
  // Burst loss: a loss event drops a run whose length is geometric with
  // continuation probability burst_q. Disabled when burst_q is 0.
  double burst_q = 0.0;

  static CaptureModel fixed(double p);
  static CaptureModel curve(int floodfill_count, std::map<int, double> table = default_curve());
  static std::map<int, double> default_curve();

  double retention_prob() const;
};

using RoutingKey = std::array<std::uint8_t, 32>;

// SHA-256(SHA-256(identifier) || date), date as "YYYYMMDD".
RoutingKey compute_routing_key(const std::uint8_t* identifier, std::size_t length,
                               const std::string& date);
RoutingKey compute_routing_key(const RouterIdentity& identity, const std::string& date);
RoutingKey routing_key_at(const RouterIdentity& identity, TimePoint t);
std::string utc_day_string(TimePoint t);
std::string to_hex(const RoutingKey& key);

double capture_rate_for(int ff_count, const CaptureModel& model);

ObservedTrace capture(const SimOutput& output, const CaptureModel& model, std::uint64_t seed);

// Capture that also reports which full-trace indices were kept.
ObservedTrace capture_indexed(const SimOutput& output, const CaptureModel& model,
                              std::uint64_t seed, std::vector<std::size_t>* kept);

}  // namespace i2plive
