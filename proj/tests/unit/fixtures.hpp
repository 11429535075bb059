#pragma once

#include <vector>

#include "crowdroute/instances.hpp"
#include "crowdroute/mdp.hpp"
#include "crowdroute/traveltime.hpp"

namespace fixtures {

using namespace crowdroute;

// one 20x10 region at a constant 0.5 km/min
inline TravelTimeModel flat_model(double speed = 0.5) {
  Geography g = Geography::uniform_grid(1, 1, 20.0, 10.0);
  SpeedProfile p({0.0}, {{speed}}, {g.cell_area(0)});
  return TravelTimeModel(g, p);
}

inline Location loc(double x, double y) { return {x, y, 0}; }

inline Instance empty_day(double horizon = 30.0) {
  Instance inst;
  inst.horizon = horizon;
  inst.hard_end = 1200.0;
  return inst;
}

inline void add_dedicated(Instance& inst, Location depot) {
  VehicleSpec v;
  v.id = static_cast<int>(inst.fleet.size());
  v.kind = VehicleKind::dedicated;
  v.appear = 0.0;
  v.expire = inst.hard_end;
  v.start = v.finish = depot;
  inst.fleet.push_back(v);
}

inline void add_crowd(Instance& inst, Location from, Location to, double a, double b) {
  VehicleSpec v;
  v.id = static_cast<int>(inst.fleet.size());
  v.kind = VehicleKind::crowdshipper;
  v.appear = a;
  v.expire = b;
  v.start = from;
  v.finish = to;
  inst.fleet.push_back(v);
}

inline void add_request(Instance& inst, Location o, Location d, double arrival, double ready, double deadline) {
  Request r;
  r.id = static_cast<int>(inst.requests.size());
  r.pickup = o;
  r.delivery = d;
  r.arrival = arrival;
  r.ready = ready;
  r.deadline = deadline;
  inst.requests.push_back(r);
}

// keeps every route and appends each fresh request to one vehicle
class AppendPolicy : public Policy {
 public:
  explicit AppendPolicy(int vehicle = 0) : vehicle_(vehicle) {}
  std::string name() const override { return "append"; }
  Action decide(const SimState& s, const DayContext& ctx) override {
    Action x;
    for (const VehicleState& v : s.fleet) x.push_back(v.route);
    for (int r : s.fresh) {
      std::size_t i = 0;
      while (i < s.fleet.size() && s.fleet[i].id != vehicle_) ++i;
      if (i == s.fleet.size()) i = 0;
      x[i].push_back(ctx.pickup_stop(r));
      x[i].push_back(ctx.delivery_stop(r));
    }
    return x;
  }

 private:
  int vehicle_;
};

inline Action identity(const SimState& s) {
  Action x;
  for (const VehicleState& v : s.fleet) x.push_back(v.route);
  return x;
}

}  // namespace fixtures
