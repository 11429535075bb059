#include "crowdroute/policies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace crowdroute {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool by_deadline(const DayContext& ctx, int a, int b) {
  double la = ctx.request(a).deadline, lb = ctx.request(b).deadline;
  return la != lb ? la < lb : a < b;
}

}  // namespace

double cfa_cost(const DeltaResult& d, VehicleKind kind, double expire, double now, const CostConfig& c) {
  if (!d.feasible || d.finish > expire + kTimeTol) return kInf;
  return c.travel_cost * d.travel + c.lateness_cost * d.late +
         (kind == VehicleKind::crowdshipper ? c.crowd_fee : 0.0) + c.capacity_weight * (expire - now);
}

double relatedness(const Request& a, const Request& b, double phi, double chi) {
  double tt = (distance(a.pickup, b.pickup) + distance(a.delivery, b.delivery)) / TravelTimeModel::kAverageSpeed;
  return phi * tt + chi * (std::abs(a.ready - b.ready) + std::abs(a.deadline - b.deadline));
}

double relatedness(const DayContext& ctx, int a, int b, double phi, double chi) {
  const Request& ra = ctx.request(a);
  const Request& rb = ctx.request(b);
  double tt = ctx.average_travel_time(ctx.pickup_stop(a).point, ctx.pickup_stop(b).point) +
              ctx.average_travel_time(ctx.delivery_stop(a).point, ctx.delivery_stop(b).point);
  return phi * tt + chi * (std::abs(ra.ready - rb.ready) + std::abs(ra.deadline - rb.deadline));
}

// ---- DRACE -----------------------------------------------------------------

Action DracePolicy::decide(const SimState& s, const DayContext& ctx) {
  Planner pl(ctx, s, mode_);
  const double t = s.time;
  const double gamma = ctx.cost().lookahead;
  Action x;
  x.reserve(s.fleet.size());
  for (const VehicleState& v : s.fleet) x.push_back(v.route);

  std::vector<char> destroyed(ctx.request_count(), 0);
  std::vector<int> order(s.fresh.begin(), s.fresh.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    Route kept;
    std::vector<int> removed;
    for (std::size_t k = 0; k < x[i].size(); ++k) {
      const Stop& st = x[i][k];
      if (k > 0 && pl.reassignable(st) && ctx.request(st.request).ready - t <= gamma) {
        if (st.kind == StopKind::pickup) removed.push_back(st.request);
        continue;
      }
      kept.push_back(st);
    }
    if (removed.empty()) continue;
    // routes that turn infeasible once stripped stay whole
    if (!pl.feasible(s.fleet[i], kept)) continue;
    x[i] = std::move(kept);
    for (int r : removed) {
      destroyed[r] = 1;
      order.push_back(r);
    }
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) { return by_deadline(ctx, a, b); });

  std::vector<double> base_travel(x.size()), base_late(x.size());
  auto refresh = [&](std::size_t i) {
    RouteCost c = pl.evaluate(s.fleet[i], x[i]);
    base_travel[i] = c.travel;
    base_late[i] = c.late;
  };
  for (std::size_t i = 0; i < x.size(); ++i) refresh(i);

  for (int r : order) {
    double best = kInf;
    int arg = -1;
    Route best_route;
    Placement best_place;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const VehicleState& v = s.fleet[i];
      const VehicleSpec& spec = ctx.vehicle(v.id);
      DeltaResult d;
      Route rebuilt;
      Placement place;
      if (destroyed[r]) {
        d = pl.reconstruction_delta(v, x[i], r, &rebuilt);
      } else {
        place = pl.best_insertion(v, x[i], r);
        if (place.feasible) {
          d.travel = place.cost.travel - base_travel[i];
          d.late = place.cost.late - base_late[i];
          d.finish = place.cost.completion;
          d.feasible = true;
        }
      }
      double c = cfa_cost(d, spec.kind, spec.expire, t, ctx.cost());
      if (c < best) {
        best = c;
        arg = static_cast<int>(i);
        best_route = std::move(rebuilt);
        best_place = place;
      }
    }
    if (arg < 0)
      throw ContractViolation("epoch " + std::to_string(static_cast<int>(t)) +
                              ": no vehicle can take request " + std::to_string(r));
    if (destroyed[r])
      x[arg] = std::move(best_route);
    else
      x[arg] = with_insertion(x[arg], ctx.pickup_stop(r), ctx.delivery_stop(r), best_place.pickup,
                              best_place.delivery);
    refresh(arg);
  }
  return x;
}

// ---- myopic ALNS -----------------------------------------------------------

void AlnsConfig::validate() const {
  if (!(phi >= 0) || !(chi >= 0)) throw std::invalid_argument("phi and chi must be >= 0");
  if (removal_count < 1) throw std::invalid_argument("removal count must be >= 1");
  if (iteration_limit < 0) throw std::invalid_argument("iteration limit must be >= 0");
  if (!(lookahead >= 0)) throw std::invalid_argument("gamma must be >= 0");
  if (!(budget_ms > 0)) throw std::invalid_argument("budget must be positive");
}

MyopicAlns::MyopicAlns(AlnsConfig cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) { cfg_.validate(); }

Action MyopicAlns::decide(const SimState& s, const DayContext& ctx) {
  const auto started = std::chrono::steady_clock::now();
  Planner pl(ctx, s, cfg_.travel);
  const CostConfig& cc = ctx.cost();
  const double t = s.time;
  const std::size_t m = s.fleet.size();
  Action x;
  x.reserve(m);
  for (const VehicleState& v : s.fleet) x.push_back(v.route);
  trace_.clear();

  // new requests go to the end of a random feasible route, crowdshippers first
  std::vector<int> crowd, dedicated;
  for (std::size_t i = 0; i < m; ++i)
    (ctx.vehicle(s.fleet[i].id).kind == VehicleKind::crowdshipper ? crowd : dedicated)
        .push_back(static_cast<int>(i));
  for (int r : s.fresh) {
    bool placed = false;
    for (std::vector<int>* group : {&crowd, &dedicated}) {
      std::vector<int> pool = *group;
      std::shuffle(pool.begin(), pool.end(), rng_);
      for (int i : pool) {
        Route cand = x[i];
        cand.push_back(ctx.pickup_stop(r));
        cand.push_back(ctx.delivery_stop(r));
        if (pl.feasible(s.fleet[i], cand)) {
          x[i] = std::move(cand);
          placed = true;
          break;
        }
      }
      if (placed) break;
    }
    if (!placed)
      throw ContractViolation("epoch " + std::to_string(static_cast<int>(t)) +
                              ": no vehicle can take request " + std::to_string(r));
  }

  std::vector<int> candidates;
  for (int r = 0; r < ctx.request_count(); ++r)
    if (s.status[r] == RequestStatus::outstanding && ctx.request(r).ready - t <= cfg_.lookahead)
      candidates.push_back(r);
  if (candidates.empty() || cfg_.iteration_limit == 0) return x;

  std::vector<char> is_crowd(m);
  for (std::size_t i = 0; i < m; ++i)
    is_crowd[i] = ctx.vehicle(s.fleet[i].id).kind == VehicleKind::crowdshipper;
  auto fee_of = [&](std::size_t i, const Route& r) {
    if (!is_crowd[i]) return 0.0;
    int open = 0;
    for (std::size_t k = 1; k < r.size(); ++k)
      if (r[k].kind == StopKind::pickup) ++open;
    return cc.crowd_fee * open;
  };
  std::vector<double> w(m), fee(m);
  std::vector<int> where(ctx.request_count(), -1);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    w[i] = pl.weighted(pl.evaluate(s.fleet[i], x[i]));
    fee[i] = fee_of(i, x[i]);
    total += w[i] + fee[i];
    for (std::size_t k = 1; k < x[i].size(); ++k)
      if (x[i][k].kind == StopKind::pickup) where[x[i][k].request] = static_cast<int>(i);
  }
  trace_.push_back(total);

  const int n = cfg_.removal_count;
  const int pool_size = static_cast<int>(candidates.size());
  const int random_k = std::min(n, pool_size);
  const int shaw_k = std::min(1 + (n + 1) / 2, pool_size);
  // both operators take the whole pool: one iteration is enough
  const bool single = random_k == pool_size && shaw_k == pool_size;
  const PositionLimit limit{3, 3};

  // unbounded placements into routes the iteration left alone, per route version
  struct Memo {
    int version = -1;
    Placement place;
  };
  std::vector<int> slot(ctx.request_count(), -1);
  for (int k = 0; k < pool_size; ++k) slot[candidates[k]] = k;
  std::vector<int> version(m, 0);
  std::vector<Memo> memo(m * pool_size * 2);

  for (int it = 0; it < cfg_.iteration_limit; ++it) {
    double elapsed =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    if (elapsed > cfg_.budget_ms) {
      ++stats_.budget_cuts;
      break;
    }
    ++stats_.iterations;
    std::vector<int> removed;
    if (std::uniform_int_distribution<int>(0, 1)(rng_) == 0) {
      std::vector<int> pool = candidates;
      for (int k = 0; k < random_k; ++k) {
        std::uniform_int_distribution<int> u(k, pool_size - 1);
        std::swap(pool[k], pool[u(rng_)]);
      }
      removed.assign(pool.begin(), pool.begin() + random_k);
    } else {
      int seed = candidates[std::uniform_int_distribution<int>(0, pool_size - 1)(rng_)];
      std::vector<std::pair<double, int>> rel;
      for (int r : candidates)
        if (r != seed) rel.push_back({relatedness(ctx, seed, r, cfg_.phi, cfg_.chi), r});
      std::sort(rel.begin(), rel.end());
      removed.push_back(seed);
      for (int k = 0; k + 1 < shaw_k; ++k) removed.push_back(rel[k].second);
    }

    Action cand = x;
    std::vector<double> cw = w, cfee = fee;
    std::vector<char> touched(m, 0);
    for (int r : removed) {
      int i = where[r];
      Route& route = cand[i];
      route.erase(std::remove_if(route.begin() + 1, route.end(),
                                 [r](const Stop& st) {
                                   return (st.kind == StopKind::pickup || st.kind == StopKind::delivery) &&
                                          st.request == r;
                                 }),
                  route.end());
      touched[i] = 1;
    }
    for (std::size_t i = 0; i < m; ++i)
      if (touched[i]) cw[i] = pl.weighted(pl.evaluate(s.fleet[i], cand[i]));

    std::sort(removed.begin(), removed.end(), [&](int a, int b) { return by_deadline(ctx, a, b); });
    std::vector<int> cwhere = where;
    bool ok = true;
    for (int r : removed) {
      int best_i = -1;
      double best_delta = kInf;
      Placement best_place;
      for (PositionLimit lim : {limit, PositionLimit{}}) {
        const std::size_t li = lim.pickup_positions > 0 ? 0 : 1;
        for (std::size_t i = 0; i < m; ++i) {
          const double fee_i = is_crowd[i] ? cc.crowd_fee : 0.0;
          double bound = best_delta + cw[i] - fee_i;
          bound += 1e-9 * (1.0 + std::abs(bound));
          Placement p;
          if (!touched[i]) {
            Memo& e = memo[(i * pool_size + slot[r]) * 2 + li];
            if (e.version != version[i]) {
              e.place = pl.best_insertion(s.fleet[i], cand[i], r, lim);
              e.version = version[i];
            }
            p = e.place;
            if (p.feasible && !(pl.weighted(p.cost) < bound)) p.feasible = false;
          } else {
            p = pl.best_insertion(s.fleet[i], cand[i], r, lim, bound);
          }
          if (!p.feasible) continue;
          double delta = pl.weighted(p.cost) - cw[i] + (is_crowd[i] ? cc.crowd_fee : 0.0);
          if (delta < best_delta) {
            best_delta = delta;
            best_i = static_cast<int>(i);
            best_place = p;
          }
        }
        if (best_i >= 0) break;
      }
      if (best_i < 0) {
        ok = false;
        break;
      }
      cand[best_i] = with_insertion(cand[best_i], ctx.pickup_stop(r), ctx.delivery_stop(r),
                                    best_place.pickup, best_place.delivery);
      cw[best_i] = pl.weighted(best_place.cost);
      touched[best_i] = 2;
      cwhere[r] = best_i;
    }
    double cand_total = 0.0;
    for (std::size_t i = 0; ok && i < m; ++i) {
      if (touched[i]) {
        if (touched[i] == 1 && !pl.feasible(s.fleet[i], cand[i])) ok = false;
        cfee[i] = fee_of(i, cand[i]);
      }
      cand_total += cw[i] + cfee[i];
    }
    if (ok && cand_total <= total) {
      for (std::size_t i = 0; i < m; ++i)
        if (touched[i] && cand[i] != x[i]) ++version[i];
      x = std::move(cand);
      w = std::move(cw);
      fee = std::move(cfee);
      where = std::move(cwhere);
      total = cand_total;
      ++stats_.accepted;
    }
    trace_.push_back(total);
    if (single) break;
  }
  return x;
}

}  // namespace crowdroute
