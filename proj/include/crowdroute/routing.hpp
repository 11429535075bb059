#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "crowdroute/mdp.hpp"

namespace crowdroute {

inline double ceil_epoch(double x) { return std::ceil(x - kTimeTol); }

// planned departure of an idle vehicle that would reach its next pickup early
double planned_departure(double t, double expire, double eta, double ready, double tau);

struct RouteCost {
  double travel = 0.0;      // minutes driven from route[0] on, endpoint leg included when charged
  double late = 0.0;        // minutes past deadlines
  double completion = 0.0;  // arrival at the vehicle's end location
};

struct DeltaResult {
  double travel = 0.0;
  double late = 0.0;
  double finish = std::numeric_limits<double>::infinity();  // t_f
  bool feasible = false;

  friend bool operator==(const DeltaResult&, const DeltaResult&) = default;
};

struct Placement {
  bool feasible = false;
  int pickup = -1;    // index of the pickup in the new route
  int delivery = -1;  // index of the delivery in the new route
  RouteCost cost;     // of the new route
};

// limits on where a pickup/delivery pair may go; 0 means unlimited
struct PositionLimit {
  int pickup_positions = 0;
  int delivery_positions = 0;
};

Route with_insertion(const Route& route, const Stop& pickup, const Stop& delivery, int p, int q);

// Schedules routes exactly as the engine would execute them, from the
// perspective of one decision epoch.
class Planner {
 public:
  Planner(const DayContext& ctx, const SimState& s, TravelMode mode = TravelMode::time_dependent);

  const DayContext& context() const { return ctx_; }
  double now() const { return now_; }
  TravelMode mode() const { return mode_; }

  double start_epoch(const VehicleState& v, const Stop* next) const;
  RouteCost evaluate(const VehicleState& v, const Route& route) const { return evaluate(v, route, mode_); }
  RouteCost evaluate(const VehicleState& v, const Route& route, TravelMode mode) const;
  // completion under the time-dependent clock, which is what execution sees
  double completion(const VehicleState& v, const Route& route) const;
  bool feasible(const VehicleState& v, const Route& route) const;

  double weighted(const RouteCost& c) const {
    return ctx_.cost().travel_cost * c.travel + ctx_.cost().lateness_cost * c.late;
  }

  // placements costing bound or more are not reported
  Placement best_insertion(const VehicleState& v, const Route& route, int request,
                           PositionLimit limit = {},
                           double bound = std::numeric_limits<double>::infinity()) const;

  DeltaResult cheapest_delta(const VehicleState& v, const Route& route, int request) const;
  // strips every reassignable request from the route, inserts request first and
  // then the stripped ones by deadline; fills rebuilt when given
  DeltaResult reconstruction_delta(const VehicleState& v, const Route& route, int request,
                                   Route* rebuilt = nullptr) const;

  bool reassignable(const Stop& s) const;

 private:
  struct Cursor {
    double t = 0.0;
    int point = 0;
    double travel = 0.0;
    double late = 0.0;
  };

  void step(Cursor& c, const Stop& next, double expire, TravelMode mode) const;
  RouteCost finish(Cursor c, int end_point, TravelMode mode, bool bill_end) const;
  bool bills_endpoint(const VehicleState& v, const Route& route) const;

  const DayContext& ctx_;
  const SimState& state_;
  double now_;
  TravelMode mode_;
};

}  // namespace crowdroute
