#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "crowdroute/instances.hpp"
#include "crowdroute/mdp.hpp"
#include "crowdroute/routing.hpp"
#include "crowdroute/traveltime.hpp"

namespace oracles {

using namespace crowdroute;

// walks the clock in 0.001 min steps, never across a period edge
inline double integrate(const TravelTimeModel& m, double km, RegionMask mask, double t0) {
  const SpeedProfile& p = m.profile();
  std::vector<double> speed(p.period_count());
  for (int w = 0; w < p.period_count(); ++w) {
    double num = 0.0, den = 0.0;
    for (int r = 0; r < p.region_count(); ++r)
      if (mask >> r & 1u) {
        num += p.area(r) * p.speed(r, w);
        den += p.area(r);
      }
    speed[w] = num / den;
  }
  double t = t0, left = km;
  while (left > 0.0) {
    int w = p.period_of(t);
    double step = std::min(0.001, p.period_end(w) - t);
    if (step <= 0.0) step = 0.001;
    double v = speed[w];
    if (v * step >= left) return t + left / v - t0;
    left -= v * step;
    t += step;
  }
  return t - t0;
}

// a vehicle mid-day with a short route and one more request to place
struct InsertionCase {
  SimState state;
  VehicleState vehicle;
  Route route;
  int request = -1;
};

inline InsertionCase random_case(const DayContext& ctx, std::mt19937_64& rng, int max_stops = 6) {
  const Instance& inst = ctx.instance();
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  InsertionCase c;
  const int n = ctx.request_count();
  const int vid = pick(static_cast<int>(inst.fleet.size()));
  const VehicleSpec& spec = inst.fleet[vid];
  double lo = std::ceil(spec.appear), hi = std::max(lo, std::min(spec.expire - 60.0, 560.0));
  c.state.time = std::floor(std::uniform_real_distribution<double>(lo, hi)(rng));
  c.state.status.assign(n, RequestStatus::unrevealed);

  std::vector<int> ids(n);
  for (int i = 0; i < n; ++i) ids[i] = i;
  std::shuffle(ids.begin(), ids.end(), rng);
  c.request = ids[0];
  c.state.status[c.request] = RequestStatus::fresh;

  // remaining stop budget after route[0]
  int budget = pick(max_stops);
  std::vector<std::vector<Stop>> chains;
  for (std::size_t k = 1; k < ids.size() && budget > 0; ++k) {
    int r = ids[k];
    if (budget >= 2 && pick(3) > 0) {
      c.state.status[r] = RequestStatus::outstanding;
      chains.push_back({ctx.pickup_stop(r), ctx.delivery_stop(r)});
      budget -= 2;
    } else {
      c.state.status[r] = RequestStatus::in_process;
      chains.push_back({ctx.delivery_stop(r)});
      budget -= 1;
    }
  }

  Route route;
  const int mode = pick(3);
  if (mode == 0 || chains.empty()) {
    route.push_back(ctx.origin_stop(vid));
  } else {
    // en route toward the head of the first chain
    route.push_back(chains[0].front());
    if (route[0].kind == StopKind::pickup) c.state.status[route[0].request] = RequestStatus::in_process;
    chains[0].erase(chains[0].begin());
  }
  std::vector<std::size_t> next(chains.size(), 0);
  for (;;) {
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < chains.size(); ++i)
      if (next[i] < chains[i].size()) open.push_back(i);
    if (open.empty()) break;
    std::size_t i = open[pick(static_cast<int>(open.size()))];
    route.push_back(chains[i][next[i]++]);
  }

  VehicleState& v = c.vehicle;
  v.id = vid;
  v.route = route;
  if (mode == 0 || route[0].kind == StopKind::origin) {
    v.just_arrived = pick(2) == 0;
    v.arrival = c.state.time;
    if (!v.just_arrived && route.size() > 1) {
      v.committed_next = route[1];
      v.departure = c.state.time + pick(30);
    }
  } else {
    v.en_route = true;
    v.just_arrived = false;
    v.arrival = c.state.time + std::uniform_real_distribution<double>(0.0, 12.0)(rng);
  }
  c.route = route;
  return c;
}

// every (pickup, delivery) position pair, lowest positions win ties
inline DeltaResult brute_force_delta(const Planner& pl, const VehicleState& v, const Route& route, int r,
                                     Route* best_route = nullptr) {
  const DayContext& ctx = pl.context();
  const double expire = ctx.vehicle(v.id).expire;
  RouteCost base = pl.evaluate(v, route);
  DeltaResult best;
  double best_cost = std::numeric_limits<double>::infinity();
  const int len = static_cast<int>(route.size());
  for (int p = 1; p <= len; ++p)
    for (int q = p + 1; q <= len + 1; ++q) {
      Route cand = with_insertion(route, ctx.pickup_stop(r), ctx.delivery_stop(r), p, q);
      double done = pl.completion(v, cand);
      if (done > expire + kTimeTol) continue;
      RouteCost rc = pl.evaluate(v, cand);
      double cost = pl.weighted(rc);
      if (cost < best_cost) {
        best_cost = cost;
        best = DeltaResult{rc.travel - base.travel, rc.late - base.late, done, true};
        if (best_route) *best_route = cand;
      }
    }
  return best;
}

}  // namespace oracles
