#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdroute/traveltime.hpp"

namespace crowdroute {

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class InstanceClass { uo, nm, mto, otm };
enum class DemandLevel { low, medium, high };
enum class VehicleKind { dedicated, crowdshipper };

std::string to_string(InstanceClass c);
std::string to_string(DemandLevel d);
std::string to_string(VehicleKind k);
InstanceClass parse_instance_class(const std::string& s);
DemandLevel parse_demand_level(const std::string& s);

struct Request {
  int id = 0;
  Location pickup;
  Location delivery;
  double arrival = 0.0;
  double ready = 0.0;     // e
  double deadline = 0.0;  // l
  int bundle = -1;        // -1 when the request is not part of a bundle

  friend bool operator==(const Request&, const Request&) = default;
};

struct VehicleSpec {
  int id = 0;
  VehicleKind kind = VehicleKind::dedicated;
  double appear = 0.0;  // a
  double expire = 0.0;  // b
  Location start;
  Location finish;

  friend bool operator==(const VehicleSpec&, const VehicleSpec&) = default;
};

struct Instance {
  InstanceClass instance_class = InstanceClass::nm;
  DemandLevel level = DemandLevel::low;
  std::uint64_t seed = 0;
  double horizon = 600.0;    // T, last possible arrival
  double hard_end = 1200.0;  // T-hat
  std::vector<Request> requests;
  std::vector<VehicleSpec> fleet;

  friend bool operator==(const Instance&, const Instance&) = default;
};

// throws ValidationError on the first violated invariant
void validate(const Instance& inst);

// ---- demand tables -------------------------------------------------------

inline constexpr int kBusinessHours = 10;
inline constexpr int kCrowdshipperCount = 28;
inline constexpr int kShortPickupCount = 110;
inline constexpr int kLongPickupCount = 138;
inline constexpr int kDeliveryPoolSize = 32000;
inline constexpr std::uint64_t kPoolSeed = 20230607;

// hourly Poisson rates, hour 0 = 8:00-9:00
double short_rate(DemandLevel level, int hour);
double long_rate(DemandLevel level, int hour);
double uo_rate(DemandLevel level);  // per hour, constant over the UO day
double expected_request_count(InstanceClass c, DemandLevel level);

// fraction of requests that belong to a bundle of n requests, n = 1..6
std::span<const double> otm_size_distribution();
// probability a many-to-one customer orders n = 1..3 items
std::span<const double> mto_size_distribution();
inline constexpr double kOtmCloseness = 2.414;  // km between any two bundled deliveries

struct CrowdshipperRecord {
  int index = 0;
  double appear = 0.0;
  double expire = 0.0;
  double start_lat = 0.0, start_lon = 0.0;
  double end_lat = 0.0, end_lon = 0.0;
};

std::span<const CrowdshipperRecord> crowdshipper_table();

// Equirectangular projection of the crowdshipper coordinates onto the
// planar box, centered on the mean of all table coordinates.
Point project_crowdshipper_point(const Geography& geo, double lat, double lon);

// Candidate pickup and delivery locations shared by every generated day.
struct LocationPools {
  std::vector<Location> pickups;     // short and UO use [0,110), long uses the rest
  std::vector<Location> deliveries;

  static LocationPools build(const Geography& geo, std::uint64_t seed = kPoolSeed);
  std::span<const Location> short_pickups() const;
  std::span<const Location> long_pickups() const;
};

std::vector<VehicleSpec> build_fleet(InstanceClass c, const Geography& geo);

Instance generate_instance(InstanceClass c, DemandLevel level, std::uint64_t seed,
                           const Geography& geo, const LocationPools& pools);
// uses the standard geography and pools
Instance generate_instance(InstanceClass c, DemandLevel level, std::uint64_t seed);

// request time windows relative to arrival
struct WindowOffsets {
  double ready;
  double deadline;
};
inline constexpr WindowOffsets kShortWindow{20.0, 60.0};
inline constexpr WindowOffsets kLongWindow{40.0, 120.0};
inline constexpr WindowOffsets kUoWindow{10.0, 40.0};

// ---- persistence ---------------------------------------------------------

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

std::string serialize_instance(const Instance& inst);
Instance parse_instance(const std::string& text);  // ParseError / ValidationError
void save_instance(const Instance& inst, const std::string& path);
Instance load_instance(const std::string& path);

}  // namespace crowdroute
