#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdroute/instances.hpp"
#include "crowdroute/traveltime.hpp"

namespace crowdroute {

class ContractViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CostConfig {
  double travel_cost = 1.0;       // mu1, per travel minute
  double lateness_cost = 5.0;     // mu2, per late minute
  double crowd_fee = 2.0;         // rho, per crowdshipper pickup
  double capacity_weight = 0.05;  // lambda
  double wait_fraction = 0.20;    // eta
  double lookahead = 45.0;        // Gamma
  bool charge_endpoint_legs = true;  // return legs in the ledger, crowdshippers only once engaged

  void validate() const;  // throws std::invalid_argument
};

enum class StopKind : std::uint8_t { origin, pickup, delivery, endpoint };

struct Stop {
  StopKind kind = StopKind::origin;
  int request = -1;
  int point = -1;  // index into DayContext locations

  friend bool operator==(const Stop&, const Stop&) = default;
};

using Route = std::vector<Stop>;

enum class TravelMode { time_dependent, average };

// Per-day lookup tables over every location the day can touch.
class DayContext {
 public:
  DayContext(const Instance& inst, const TravelTimeModel& model, CostConfig cost);

  const Instance& instance() const { return *inst_; }
  const TravelTimeModel& model() const { return *model_; }
  const CostConfig& cost() const { return cost_; }

  int point_count() const { return static_cast<int>(points_.size()); }
  const Location& location(int p) const { return points_[p]; }
  double km(int a, int b) const { return dist_[index(a, b)]; }

  double travel_time(int a, int b, double depart) const {
    std::size_t i = index(a, b);
    return model_->duration(dist_[i], mask_[i], depart);
  }
  double average_travel_time(int a, int b) const {
    return dist_[index(a, b)] / TravelTimeModel::kAverageSpeed;
  }
  double travel_time(TravelMode mode, int a, int b, double depart) const {
    return mode == TravelMode::average ? average_travel_time(a, b) : travel_time(a, b, depart);
  }

  const Request& request(int r) const { return inst_->requests[r]; }
  const VehicleSpec& vehicle(int v) const { return inst_->fleet[v]; }
  int request_count() const { return static_cast<int>(inst_->requests.size()); }

  Stop pickup_stop(int r) const { return {StopKind::pickup, r, pickup_point_[r]}; }
  Stop delivery_stop(int r) const { return {StopKind::delivery, r, delivery_point_[r]}; }
  Stop origin_stop(int v) const { return {StopKind::origin, -1, start_point_[v]}; }
  Stop endpoint_stop(int v) const { return {StopKind::endpoint, -1, finish_point_[v]}; }
  int finish_point(int v) const { return finish_point_[v]; }

  // -infinity unless a pickup
  double ready_time(const Stop& s) const {
    if (s.kind == StopKind::pickup) return inst_->requests[s.request].ready;
    return -std::numeric_limits<double>::infinity();
  }
  // +infinity unless a delivery
  double deadline(const Stop& s) const {
    if (s.kind == StopKind::delivery) return inst_->requests[s.request].deadline;
    return std::numeric_limits<double>::infinity();
  }

 private:
  std::size_t index(int a, int b) const { return static_cast<std::size_t>(a) * points_.size() + b; }

  const Instance* inst_;
  const TravelTimeModel* model_;
  CostConfig cost_;
  std::vector<Location> points_;
  std::vector<double> dist_;
  std::vector<RegionMask> mask_;
  std::vector<int> pickup_point_, delivery_point_, start_point_, finish_point_;
};

// ---- state -----------------------------------------------------------------

enum class RequestStatus : std::uint8_t { unrevealed, fresh, outstanding, in_process, delivered };

struct VehicleState {
  int id = 0;  // index into the instance fleet
  Route route;  // route[0] is the current location or, en route, the destination
  double arrival = 0.0;    // f
  double departure = 0.0;  // w, meaningful while idle with a committed next stop
  bool en_route = false;
  bool just_arrived = true;
  std::optional<Stop> committed_next;  // route[1] when the last dispatch check ran
  bool engaged = false;  // has left for a pickup at least once
};

struct Ledger {
  double travel_minutes = 0.0;
  double travel_cost = 0.0;
  double crowd_fees = 0.0;
  double late_minutes = 0.0;
  double lateness_charge = 0.0;
  int delayed = 0;
  int crowd_served = 0;
  int dedicated_served = 0;
  double epoch_cost_sum = 0.0;
};

struct SimState {
  double time = 0.0;
  std::vector<RequestStatus> status;
  std::vector<int> carrier;  // serving vehicle once in process
  std::vector<double> delivered_at;
  std::vector<int> fresh;  // U_k, ascending id
  std::vector<VehicleState> fleet;  // active vehicles, ascending id
  std::vector<bool> appeared;
  int revealed = 0;
  int delivered = 0;
  Ledger ledger;

  const VehicleState* find(int vehicle_id) const;
  bool active(int r) const {
    return status[r] == RequestStatus::fresh || status[r] == RequestStatus::outstanding;
  }
};

// new route per active vehicle, aligned with SimState::fleet
using Action = std::vector<Route>;

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual Action decide(const SimState& state, const DayContext& ctx) = 0;
};

// ---- events ----------------------------------------------------------------

enum class EventKind : std::uint8_t { appear, wait, depart, arrive, deliver, expire };

struct Event {
  int epoch = 0;
  int vehicle = -1;
  EventKind kind = EventKind::appear;
  StopKind stop = StopKind::origin;
  int request = -1;
  double x = 0.0, y = 0.0;
  double time = 0.0;  // arrival or planned departure
  double cost = 0.0;

  friend bool operator==(const Event&, const Event&) = default;
};

std::string to_string(EventKind k);
void write_events(std::ostream& os, const std::vector<Event>& events);

// ---- engine ----------------------------------------------------------------

inline constexpr double kTimeTol = 1e-9;

class Engine {
 public:
  explicit Engine(const DayContext& ctx, std::vector<Event>* log = nullptr)
      : ctx_(ctx), log_(log) {}

  SimState initial_state() const;
  // deterministic transition; returns the cost of the action
  double apply_action(SimState& s, const Action& x) const;
  // clock tick plus exogenous information
  void advance(SimState& s) const;
  bool finished(const SimState& s) const;

  void check_action(const SimState& s, const Action& x) const;

 private:
  void emit(const Event& e) const {
    if (log_) log_->push_back(e);
  }
  double depart(SimState& s, VehicleState& v, double tau) const;
  double send_home(SimState& s, VehicleState& v) const;
  void reveal(SimState& s) const;

  const DayContext& ctx_;
  std::vector<Event>* log_;
};

struct KpiReport {
  int requests = 0;
  double total_cost = 0.0;
  double routing_cost = 0.0;
  double travel_cost = 0.0;
  double crowd_fees = 0.0;
  double lateness_charge = 0.0;
  int delayed_requests = 0;
  double delay_minutes = 0.0;
  int crowd_served = 0;
  int dedicated_served = 0;
  double epoch_cost_sum = 0.0;
  int epochs = 0;
  double max_decide_ms = 0.0;
  int over_budget = 0;  // decide calls slower than the budget

  double crowd_share() const {
    int n = crowd_served + dedicated_served;
    return n ? static_cast<double>(crowd_served) / n : 0.0;
  }
};

struct RunOptions {
  CostConfig cost;
  bool keep_log = true;
  double budget_ms = 2000.0;
};

struct DayResult {
  KpiReport kpi;
  std::vector<Event> log;
  SimState final_state;
};

DayResult run_day(const Instance& inst, const TravelTimeModel& model, Policy& policy,
                  const RunOptions& opts);

}  // namespace crowdroute
