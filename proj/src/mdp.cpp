#include "crowdroute/mdp.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <map>
#include <ostream>
#include <tuple>

#include "crowdroute/routing.hpp"

namespace crowdroute {

void CostConfig::validate() const {
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string(name) + " must be a finite value >= 0");
  };
  nonneg(travel_cost, "mu1");
  nonneg(lateness_cost, "mu2");
  nonneg(crowd_fee, "rho");
  nonneg(capacity_weight, "lambda");
  nonneg(wait_fraction, "eta");
  nonneg(lookahead, "gamma");
  if (wait_fraction >= 1.0) throw std::invalid_argument("eta must be below 1");
}

// ---- DayContext ------------------------------------------------------------

DayContext::DayContext(const Instance& inst, const TravelTimeModel& model, CostConfig cost)
    : inst_(&inst), model_(&model), cost_(cost) {
  std::map<std::tuple<double, double, int>, int> seen;
  auto intern = [&](const Location& l) {
    auto [it, added] = seen.try_emplace({l.x, l.y, l.region}, static_cast<int>(points_.size()));
    if (added) points_.push_back(l);
    return it->second;
  };
  for (const Request& r : inst.requests) {
    pickup_point_.push_back(intern(r.pickup));
    delivery_point_.push_back(intern(r.delivery));
  }
  for (const VehicleSpec& v : inst.fleet) {
    start_point_.push_back(intern(v.start));
    finish_point_.push_back(intern(v.finish));
  }
  const std::size_t n = points_.size();
  dist_.assign(n * n, 0.0);
  mask_.assign(n * n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    mask_[a * n + a] = RegionMask{1} << points_[a].region;
    for (std::size_t b = a + 1; b < n; ++b) {
      double d = distance(points_[a], points_[b]);
      RegionMask m = model.path_regions(points_[a], points_[b]);
      dist_[a * n + b] = dist_[b * n + a] = d;
      mask_[a * n + b] = mask_[b * n + a] = m;
    }
  }
}

const VehicleState* SimState::find(int vehicle_id) const {
  auto it = std::lower_bound(fleet.begin(), fleet.end(), vehicle_id,
                             [](const VehicleState& v, int id) { return v.id < id; });
  return it != fleet.end() && it->id == vehicle_id ? &*it : nullptr;
}

// ---- events ----------------------------------------------------------------

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::appear: return "appear";
    case EventKind::wait: return "wait";
    case EventKind::depart: return "depart";
    case EventKind::arrive: return "arrive";
    case EventKind::deliver: return "deliver";
    case EventKind::expire: return "expire";
  }
  return "?";
}

namespace {

const char* stop_name(StopKind k) {
  switch (k) {
    case StopKind::origin: return "origin";
    case StopKind::pickup: return "pickup";
    case StopKind::delivery: return "delivery";
    case StopKind::endpoint: return "endpoint";
  }
  return "?";
}

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_events(std::ostream& os, const std::vector<Event>& events) {
  os << "# epoch vehicle event stop request x y time cost\n";
  for (const Event& e : events)
    os << e.epoch << ' ' << e.vehicle << ' ' << to_string(e.kind) << ' ' << stop_name(e.stop) << ' '
       << e.request << ' ' << num(e.x) << ' ' << num(e.y) << ' ' << num(e.time) << ' ' << num(e.cost)
       << '\n';
}

// ---- Engine ----------------------------------------------------------------

SimState Engine::initial_state() const {
  const Instance& inst = ctx_.instance();
  const std::size_t n = inst.requests.size();
  SimState s;
  s.time = 0.0;
  s.status.assign(n, RequestStatus::unrevealed);
  s.carrier.assign(n, -1);
  s.delivered_at.assign(n, -1.0);
  s.appeared.assign(inst.fleet.size(), false);
  reveal(s);
  return s;
}

void Engine::reveal(SimState& s) const {
  const Instance& inst = ctx_.instance();
  const int n = static_cast<int>(inst.requests.size());
  while (s.revealed < n && ceil_epoch(inst.requests[s.revealed].arrival) <= s.time) {
    s.status[s.revealed] = RequestStatus::fresh;
    s.fresh.push_back(s.revealed);
    ++s.revealed;
  }
  for (std::size_t i = 0; i < inst.fleet.size(); ++i) {
    const VehicleSpec& spec = inst.fleet[i];
    if (s.appeared[i] || ceil_epoch(spec.appear) > s.time) continue;
    s.appeared[i] = true;
    VehicleState v;
    v.id = static_cast<int>(i);
    v.route = {ctx_.origin_stop(v.id)};
    v.arrival = v.departure = s.time;
    v.just_arrived = true;
    auto at = std::lower_bound(s.fleet.begin(), s.fleet.end(), v.id,
                               [](const VehicleState& a, int id) { return a.id < id; });
    s.fleet.insert(at, std::move(v));
    emit({static_cast<int>(s.time), static_cast<int>(i), EventKind::appear, StopKind::origin, -1,
          spec.start.x, spec.start.y, s.time, 0.0});
  }
}

void Engine::check_action(const SimState& s, const Action& x) const {
  const int epoch = static_cast<int>(s.time);
  auto fail = [epoch](int vehicle, const std::string& what) {
    throw ContractViolation("epoch " + std::to_string(epoch) +
                            (vehicle >= 0 ? ", vehicle " + std::to_string(vehicle) : std::string()) +
                            ": " + what);
  };
  if (x.size() != s.fleet.size())
    fail(-1, "action has " + std::to_string(x.size()) + " routes for " +
                 std::to_string(s.fleet.size()) + " vehicles");
  const int n = ctx_.request_count();
  std::vector<int> picks(n, 0), drops(n, 0), owner(n, -1);
  Planner planner(ctx_, s);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const VehicleState& v = s.fleet[i];
    const Route& r = x[i];
    if (r.empty() || !(r[0] == v.route[0])) fail(v.id, "current stop was changed");
    std::vector<int> picked_here;
    for (std::size_t k = 0; k < r.size(); ++k) {
      const Stop& st = r[k];
      if (k > 0 && st.kind != StopKind::pickup && st.kind != StopKind::delivery)
        fail(v.id, "only pickups and deliveries may follow the current stop");
      if (st.kind != StopKind::pickup && st.kind != StopKind::delivery) continue;
      if (st.request < 0 || st.request >= n) fail(v.id, "unknown request in route");
      const int q = st.request;
      const Stop expect = st.kind == StopKind::pickup ? ctx_.pickup_stop(q) : ctx_.delivery_stop(q);
      if (!(st == expect)) fail(v.id, "stop location does not match request " + std::to_string(q));
      if (owner[q] >= 0 && owner[q] != v.id)
        fail(v.id, "request " + std::to_string(q) + " is split across vehicles");
      owner[q] = v.id;
      RequestStatus status = s.status[q];
      if (k == 0) {
        if (st.kind == StopKind::pickup) ++picks[q];
        if (st.kind == StopKind::delivery && status != RequestStatus::delivered) ++drops[q];
        continue;
      }
      if (status == RequestStatus::unrevealed || status == RequestStatus::delivered)
        fail(v.id, "request " + std::to_string(q) + " cannot be routed in its current status");
      if (status == RequestStatus::in_process) {
        if (s.carrier[q] != v.id) fail(v.id, "in-process request " + std::to_string(q) + " moved");
        if (st.kind == StopKind::pickup) fail(v.id, "in-process request picked up twice");
      }
      if (st.kind == StopKind::pickup) {
        ++picks[q];
      } else {
        if (status != RequestStatus::in_process && picks[q] == 0)
          fail(v.id, "delivery of request " + std::to_string(q) + " precedes its pickup");
        ++drops[q];
      }
    }
    double done = planner.completion(v, r);
    if (done > ctx_.vehicle(v.id).expire + kTimeTol)
      fail(v.id, "route completes at " + num(done) + ", after availability end " +
                     num(ctx_.vehicle(v.id).expire));
  }
  for (int q = 0; q < n; ++q) {
    RequestStatus status = s.status[q];
    if (s.active(q) && (picks[q] != 1 || drops[q] != 1))
      fail(-1, "request " + std::to_string(q) + " must be assigned exactly once");
    if (status == RequestStatus::in_process && drops[q] != 1)
      fail(-1, "in-process request " + std::to_string(q) + " lost its delivery");
  }
}

double Engine::depart(SimState& s, VehicleState& v, double tau) const {
  const CostConfig& cc = ctx_.cost();
  const Stop next = v.route[1];
  const double f = s.time + tau;
  double cost = 0.0;
  const bool crowd = ctx_.vehicle(v.id).kind == VehicleKind::crowdshipper;
  if (next.kind == StopKind::pickup) v.engaged = true;
  if (next.kind != StopKind::endpoint || (cc.charge_endpoint_legs && (!crowd || v.engaged))) {
    cost += cc.travel_cost * tau;
    s.ledger.travel_minutes += tau;
    s.ledger.travel_cost += cc.travel_cost * tau;
  }
  if (next.kind == StopKind::pickup) {
    s.status[next.request] = RequestStatus::in_process;
    s.carrier[next.request] = v.id;
    if (crowd) {
      cost += cc.crowd_fee;
      s.ledger.crowd_fees += cc.crowd_fee;
      ++s.ledger.crowd_served;
    } else {
      ++s.ledger.dedicated_served;
    }
  } else if (next.kind == StopKind::delivery) {
    double late = std::max(0.0, f - ctx_.deadline(next));
    cost += cc.lateness_cost * late;
    s.ledger.late_minutes += late;
    s.ledger.lateness_charge += cc.lateness_cost * late;
    if (late > 0.0) ++s.ledger.delayed;
  }
  v.route.erase(v.route.begin());
  v.en_route = true;
  v.just_arrived = false;
  v.arrival = v.departure = f;
  v.committed_next.reset();
  const Location& at = ctx_.location(next.point);
  emit({static_cast<int>(s.time), v.id, EventKind::depart, next.kind, next.request, at.x, at.y, f, cost});
  return cost;
}

double Engine::send_home(SimState& s, VehicleState& v) const {
  v.route = {v.route[0], ctx_.endpoint_stop(v.id)};
  double tau = ctx_.travel_time(v.route[0].point, v.route[1].point, s.time);
  return depart(s, v, tau);
}

double Engine::apply_action(SimState& s, const Action& x) const {
  check_action(s, x);
  const double t = s.time;
  const double eta = ctx_.cost().wait_fraction;
  double cost = 0.0;
  for (std::size_t i = 0; i < s.fleet.size(); ++i) {
    VehicleState& v = s.fleet[i];
    v.route = x[i];
    if (v.en_route) continue;
    const bool has_next = v.route.size() > 1;
    bool trigger = v.just_arrived;
    if (!trigger) {
      std::optional<Stop> next;
      if (has_next) next = v.route[1];
      trigger = next != v.committed_next || (has_next && ceil_epoch(v.departure) <= t);
    }
    v.just_arrived = false;
    if (!trigger) continue;
    if (!has_next) {
      v.committed_next.reset();
      continue;
    }
    const Stop& next = v.route[1];
    const double tau = ctx_.travel_time(v.route[0].point, next.point, t);
    const double ready = ctx_.ready_time(next);
    if (t + tau >= ready) {
      cost += depart(s, v, tau);
    } else {
      v.departure = planned_departure(t, ctx_.vehicle(v.id).expire, eta, ready, tau);
      v.committed_next = next;
      const Location& at = ctx_.location(v.route[0].point);
      emit({static_cast<int>(t), v.id, EventKind::wait, next.kind, next.request, at.x, at.y,
            v.departure, 0.0});
    }
  }

  const bool day_over = s.revealed == ctx_.request_count() && t >= ctx_.instance().horizon &&
                        s.delivered == ctx_.request_count();
  for (VehicleState& v : s.fleet) {
    if (v.en_route || v.route.size() != 1) continue;
    const int home = ctx_.finish_point(v.id);
    if (v.route[0].point == home) continue;
    bool go = day_over;
    if (!go) {
      double later = t + 1.0;
      go = later + ctx_.travel_time(v.route[0].point, home, later) > ctx_.vehicle(v.id).expire + kTimeTol;
    }
    if (go) cost += send_home(s, v);
  }
  s.ledger.epoch_cost_sum += cost;
  return cost;
}

void Engine::advance(SimState& s) const {
  s.time += 1.0;
  for (VehicleState& v : s.fleet) {
    if (!v.en_route || ceil_epoch(v.arrival) > s.time) continue;
    v.en_route = false;
    v.just_arrived = true;
    const Stop& at = v.route[0];
    const Location& loc = ctx_.location(at.point);
    emit({static_cast<int>(s.time), v.id, EventKind::arrive, at.kind, at.request, loc.x, loc.y,
          v.arrival, 0.0});
    if (at.kind == StopKind::delivery) {
      s.status[at.request] = RequestStatus::delivered;
      s.delivered_at[at.request] = v.arrival;
      ++s.delivered;
      emit({static_cast<int>(s.time), v.id, EventKind::deliver, at.kind, at.request, loc.x, loc.y,
            v.arrival, 0.0});
    }
  }
  for (int r : s.fresh)
    if (s.status[r] == RequestStatus::fresh) s.status[r] = RequestStatus::outstanding;
  s.fresh.clear();
  reveal(s);

  std::vector<VehicleState> kept;
  kept.reserve(s.fleet.size());
  for (VehicleState& v : s.fleet) {
    const VehicleSpec& spec = ctx_.vehicle(v.id);
    if (spec.expire > s.time + kTimeTol) {
      kept.push_back(std::move(v));
      continue;
    }
    if (v.en_route || v.route.size() != 1 || v.route[0].point != ctx_.finish_point(v.id))
      throw ContractViolation("epoch " + num(s.time) + ", vehicle " + std::to_string(v.id) +
                              ": availability ended away from its end location or with work left");
    const Location& loc = ctx_.location(v.route[0].point);
    emit({static_cast<int>(s.time), v.id, EventKind::expire, v.route[0].kind, -1, loc.x, loc.y, s.time, 0.0});
  }
  s.fleet = std::move(kept);
}

bool Engine::finished(const SimState& s) const {
  if (s.revealed != ctx_.request_count() || s.time < ctx_.instance().horizon) return false;
  if (s.delivered != ctx_.request_count()) return false;
  for (const VehicleState& v : s.fleet)
    if (v.en_route || v.route.size() != 1 || v.route[0].point != ctx_.finish_point(v.id)) return false;
  return true;
}

// ---- run_day ---------------------------------------------------------------

DayResult run_day(const Instance& inst, const TravelTimeModel& model, Policy& policy,
                  const RunOptions& opts) {
  opts.cost.validate();
  validate(inst);
  DayContext ctx(inst, model, opts.cost);
  DayResult res;
  Engine engine(ctx, opts.keep_log ? &res.log : nullptr);
  SimState s = engine.initial_state();
  KpiReport& k = res.kpi;
  for (;;) {
    auto t0 = std::chrono::steady_clock::now();
    Action x = policy.decide(s, ctx);
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    k.max_decide_ms = std::max(k.max_decide_ms, ms);
    if (ms > opts.budget_ms) ++k.over_budget;
    engine.apply_action(s, x);
    ++k.epochs;
    if (engine.finished(s)) break;
    if (s.time >= inst.hard_end)
      throw ContractViolation("day " + std::to_string(inst.seed) + " still running at T-hat");
    engine.advance(s);
  }
  const Ledger& l = s.ledger;
  k.requests = static_cast<int>(inst.requests.size());
  k.travel_cost = l.travel_cost;
  k.crowd_fees = l.crowd_fees;
  k.routing_cost = l.travel_cost + l.crowd_fees;
  k.lateness_charge = l.lateness_charge;
  k.total_cost = k.routing_cost + k.lateness_charge;
  k.delayed_requests = l.delayed;
  k.delay_minutes = l.late_minutes;
  k.crowd_served = l.crowd_served;
  k.dedicated_served = l.dedicated_served;
  k.epoch_cost_sum = l.epoch_cost_sum;
  res.final_state = std::move(s);
  return res;
}

}  // namespace crowdroute
