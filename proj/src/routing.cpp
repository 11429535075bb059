#include "crowdroute/routing.hpp"

#include <algorithm>

namespace crowdroute {

double planned_departure(double t, double expire, double eta, double ready, double tau) {
  return t + std::max(eta * std::max(0.0, expire - t), ready - t - tau);
}

Route with_insertion(const Route& route, const Stop& pickup, const Stop& delivery, int p, int q) {
  if (p < 1 || q <= p || q > static_cast<int>(route.size()) + 1)
    throw std::out_of_range("insertion positions out of range");
  Route out;
  out.reserve(route.size() + 2);
  out.insert(out.end(), route.begin(), route.begin() + p);
  out.push_back(pickup);
  out.insert(out.end(), route.begin() + p, route.begin() + (q - 1));
  out.push_back(delivery);
  out.insert(out.end(), route.begin() + (q - 1), route.end());
  return out;
}

Planner::Planner(const DayContext& ctx, const SimState& s, TravelMode mode)
    : ctx_(ctx), state_(s), now_(s.time), mode_(mode) {}

double Planner::start_epoch(const VehicleState& v, const Stop* next) const {
  if (v.en_route) return std::max(now_, ceil_epoch(v.arrival));
  if (v.just_arrived) return now_;
  if (next && v.committed_next && *v.committed_next == *next)
    return std::max(now_, ceil_epoch(v.departure));
  return now_;
}

void Planner::step(Cursor& c, const Stop& next, double expire, TravelMode mode) const {
  const double ready = ctx_.ready_time(next);
  const double eta = ctx_.cost().wait_fraction;
  for (;;) {
    double tau = ctx_.travel_time(mode, c.point, next.point, c.t);
    if (c.t + tau >= ready) {
      double f = c.t + tau;
      c.travel += tau;
      if (next.kind == StopKind::delivery) c.late += std::max(0.0, f - ctx_.deadline(next));
      c.t = std::max(c.t + 1.0, ceil_epoch(f));
      c.point = next.point;
      return;
    }
    c.t = std::max(c.t + 1.0, ceil_epoch(planned_departure(c.t, expire, eta, ready, tau)));
  }
}

RouteCost Planner::finish(Cursor c, int end_point, TravelMode mode, bool bill_end) const {
  double tau = ctx_.travel_time(mode, c.point, end_point, c.t);
  RouteCost out;
  out.travel = bill_end ? c.travel + tau : c.travel;
  out.late = c.late;
  out.completion = c.t + tau;
  return out;
}

RouteCost Planner::evaluate(const VehicleState& v, const Route& route, TravelMode mode) const {
  const double expire = ctx_.vehicle(v.id).expire;
  Cursor c{start_epoch(v, route.size() > 1 ? &route[1] : nullptr), route.front().point};
  for (std::size_t i = 1; i < route.size(); ++i) step(c, route[i], expire, mode);
  return finish(c, ctx_.finish_point(v.id), mode, bills_endpoint(v, route));
}

// a crowdshipper who never takes a request just goes home on their own
bool Planner::bills_endpoint(const VehicleState& v, const Route& route) const {
  if (!ctx_.cost().charge_endpoint_legs) return false;
  if (ctx_.vehicle(v.id).kind == VehicleKind::dedicated || v.engaged) return true;
  return std::any_of(route.begin(), route.end(), [](const Stop& s) {
    return s.kind == StopKind::pickup || s.kind == StopKind::delivery;
  });
}

double Planner::completion(const VehicleState& v, const Route& route) const {
  return evaluate(v, route, TravelMode::time_dependent).completion;
}

bool Planner::feasible(const VehicleState& v, const Route& route) const {
  return completion(v, route) <= ctx_.vehicle(v.id).expire + kTimeTol;
}

bool Planner::reassignable(const Stop& s) const {
  return (s.kind == StopKind::pickup || s.kind == StopKind::delivery) && state_.active(s.request);
}

Placement Planner::best_insertion(const VehicleState& v, const Route& route, int request,
                                  PositionLimit limit, double bound) const {
  const Stop pick = ctx_.pickup_stop(request);
  const Stop drop = ctx_.delivery_stop(request);
  const double expire = ctx_.vehicle(v.id).expire;
  const int end_point = ctx_.finish_point(v.id);
  const bool td = mode_ == TravelMode::time_dependent;
  const int len = static_cast<int>(route.size());
  const int p_max = limit.pickup_positions > 0 ? std::min(len, limit.pickup_positions) : len;

  std::vector<Cursor> prefix(p_max);
  prefix[0] = Cursor{start_epoch(v, len > 1 ? &route[1] : nullptr), route[0].point};
  for (int i = 1; i < p_max; ++i) {
    prefix[i] = prefix[i - 1];
    step(prefix[i], route[i], expire, mode_);
  }

  Placement best;
  double best_cost = bound;
  auto partial = [this](const Cursor& c) {
    return ctx_.cost().travel_cost * c.travel + ctx_.cost().lateness_cost * c.late;
  };

  // clocks only move forward, so a cursor past b cannot finish in time
  auto late = [&](const Cursor& c) { return td && c.t > expire + kTimeTol; };

  for (int p = 1; p <= p_max; ++p) {
    if (p > 1 && late(prefix[p - 1])) break;
    Cursor c = p == 1 ? Cursor{start_epoch(v, &pick), route[0].point} : prefix[p - 1];
    step(c, pick, expire, mode_);
    const int j_max = limit.delivery_positions > 0 ? std::min(len, p + limit.delivery_positions - 1) : len;
    for (int j = p; j <= j_max; ++j) {
      if (partial(c) >= best_cost || late(c)) break;
      Cursor d = c;
      step(d, drop, expire, mode_);
      bool pruned = false;
      for (int k = j; k < len && !pruned; ++k) {
        if (partial(d) >= best_cost || late(d)) pruned = true;
        else step(d, route[k], expire, mode_);
      }
      if (!pruned) {
        RouteCost rc = finish(d, end_point, mode_, ctx_.cost().charge_endpoint_legs);
        double cost = weighted(rc);
        if (cost < best_cost) {
          double done = td ? rc.completion
                           : completion(v, with_insertion(route, pick, drop, p, j + 1));
          if (done <= expire + kTimeTol) {
            best = Placement{true, p, j + 1, rc};
            best.cost.completion = done;
            best_cost = cost;
          }
        }
      }
      if (j < len) step(c, route[j], expire, mode_);
    }
  }
  return best;
}

DeltaResult Planner::cheapest_delta(const VehicleState& v, const Route& route, int request) const {
  RouteCost base = evaluate(v, route);
  Placement pl = best_insertion(v, route, request);
  DeltaResult d;
  if (!pl.feasible) return d;
  d.travel = pl.cost.travel - base.travel;
  d.late = pl.cost.late - base.late;
  d.finish = pl.cost.completion;
  d.feasible = true;
  return d;
}

DeltaResult Planner::reconstruction_delta(const VehicleState& v, const Route& route, int request,
                                          Route* rebuilt) const {
  RouteCost base = evaluate(v, route);
  Route cur;
  std::vector<int> stripped;
  for (std::size_t i = 0; i < route.size(); ++i) {
    const Stop& s = route[i];
    if (i > 0 && reassignable(s)) {
      if (s.kind == StopKind::pickup && s.request != request) stripped.push_back(s.request);
      continue;
    }
    cur.push_back(s);
  }
  std::sort(stripped.begin(), stripped.end(), [this](int a, int b) {
    double la = ctx_.request(a).deadline, lb = ctx_.request(b).deadline;
    return la != lb ? la < lb : a < b;
  });
  stripped.insert(stripped.begin(), request);

  DeltaResult d;
  Placement pl;
  for (int r : stripped) {
    pl = best_insertion(v, cur, r);
    if (!pl.feasible) return d;
    cur = with_insertion(cur, ctx_.pickup_stop(r), ctx_.delivery_stop(r), pl.pickup, pl.delivery);
  }
  d.travel = pl.cost.travel - base.travel;
  d.late = pl.cost.late - base.late;
  d.finish = pl.cost.completion;
  d.feasible = true;
  if (rebuilt) *rebuilt = std::move(cur);
  return d;
}

}  // namespace crowdroute
