#include <doctest.h>

#include <cmath>
#include <sstream>

#include "crowdroute/policies.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace crowdroute;
using namespace fixtures;

TEST_CASE("cfa cost") {
  CostConfig c;
  DeltaResult d{10.0, 2.0, 50.0, true};
  CHECK(cfa_cost(d, VehicleKind::dedicated, 100.0, 0.0, c) == doctest::Approx(25.0));
  CHECK(cfa_cost(d, VehicleKind::crowdshipper, 100.0, 0.0, c) == doctest::Approx(27.0));
  CHECK(cfa_cost(DeltaResult{0.0, 0.0, 30.0, true}, VehicleKind::dedicated, 30.0, 30.0, c) == 0.0);
  CHECK(std::isinf(cfa_cost(DeltaResult{1.0, 0.0, 101.0, true}, VehicleKind::dedicated, 100.0, 0.0, c)));
  CHECK(std::isinf(cfa_cost(DeltaResult{}, VehicleKind::dedicated, 100.0, 0.0, c)));
}

TEST_CASE("relatedness") {
  Request a, b;
  a.pickup = loc(1.0, 1.0);
  a.delivery = loc(5.0, 5.0);
  a.ready = 20.0;
  a.deadline = 60.0;
  b = a;
  CHECK(relatedness(a, b, 9.0, 3.0) == 0.0);
  // 5 minutes apart at the average speed, 10 + 5 minutes of window gap
  b.pickup = loc(1.0 + 5.0 * TravelTimeModel::kAverageSpeed, 1.0);
  b.ready = 30.0;
  b.deadline = 65.0;
  CHECK(relatedness(a, b, 9.0, 3.0) == doctest::Approx(90.0));
  CHECK(relatedness(b, a, 9.0, 3.0) == relatedness(a, b, 9.0, 3.0));

  Instance inst = generate_instance(InstanceClass::nm, DemandLevel::low, 3);
  TravelTimeModel m = TravelTimeModel::standard();
  DayContext ctx(inst, m, CostConfig{});
  for (int i = 0; i + 1 < 20; ++i)
    CHECK(relatedness(ctx, i, i + 1, 9.0, 3.0) ==
          doctest::Approx(relatedness(inst.requests[i], inst.requests[i + 1], 9.0, 3.0)).epsilon(1e-12));
}

namespace {

// one request, a dedicated vehicle and a crowdshipper side by side at the depot
Action first_decision(Policy& p, double crowd_expire) {
  TravelTimeModel m = flat_model();
  Instance inst = empty_day();
  add_dedicated(inst, loc(10, 5));
  add_crowd(inst, loc(10, 5), loc(10, 5), 0.0, crowd_expire);
  add_request(inst, loc(10, 8), loc(14, 8), 0.0, 5.0, 100.0);
  DayContext ctx(inst, m, CostConfig{});
  Engine engine(ctx);
  SimState s = engine.initial_state();
  Action x = p.decide(s, ctx);
  engine.check_action(s, x);
  return x;
}

}  // namespace

TEST_CASE("drace prefers the crowdshipper when its window is shorter by more than rho / lambda") {
  DracePolicy p;
  // lambda (1200 - 200) = 50 > rho
  Action a = first_decision(p, 200.0);
  CHECK(a[0].size() == 1u);
  CHECK(a[1].size() == 3u);
  // lambda (1200 - 1180) = 1 < rho
  Action b = first_decision(p, 1180.0);
  CHECK(b[0].size() == 3u);
  CHECK(b[1].size() == 1u);
  // too short to finish: out, across and back takes 24
  Action c = first_decision(p, 20.0);
  CHECK(c[0].size() == 3u);
}

TEST_CASE("drace breaks ties toward the lowest vehicle") {
  TravelTimeModel m = flat_model();
  Instance inst = empty_day();
  add_dedicated(inst, loc(10, 5));
  add_dedicated(inst, loc(10, 5));
  add_request(inst, loc(10, 8), loc(14, 8), 0.0, 5.0, 100.0);
  DayContext ctx(inst, m, CostConfig{});
  Engine engine(ctx);
  SimState s = engine.initial_state();
  DracePolicy p;
  Action x = p.decide(s, ctx);
  CHECK(x[0].size() == 3u);
  CHECK(x[1].size() == 1u);
}

TEST_CASE("drace with nothing to place leaves every route alone") {
  Instance inst = generate_instance(InstanceClass::nm, DemandLevel::low, 2);
  inst.requests.clear();
  TravelTimeModel m = TravelTimeModel::standard();
  DayContext ctx(inst, m, CostConfig{});
  Engine engine(ctx);
  SimState s = engine.initial_state();
  DracePolicy p;
  CHECK(p.decide(s, ctx) == identity(s));
}

namespace {

Instance dedicated_only(std::uint64_t seed) {
  Instance inst = generate_instance(InstanceClass::nm, DemandLevel::low, seed);
  std::erase_if(inst.fleet, [](const VehicleSpec& v) { return v.kind == VehicleKind::crowdshipper; });
  return inst;
}

std::string log_text(const DayResult& r) {
  std::ostringstream os;
  write_events(os, r.log);
  return os.str();
}

// checks each single-arrival decision against a brute force over vehicles and positions
class OracleDrace : public Policy {
 public:
  std::string name() const override { return "oracle-drace"; }
  Action decide(const SimState& s, const DayContext& ctx) override {
    Action got = inner_.decide(s, ctx);
    if (s.fresh.size() != 1 || destroyable(s, ctx)) return got;
    Planner pl(ctx, s);
    const int r = s.fresh[0];
    double best = std::numeric_limits<double>::infinity();
    Action expect;
    for (std::size_t i = 0; i < s.fleet.size(); ++i) {
      Route route;
      DeltaResult d = oracles::brute_force_delta(pl, s.fleet[i], s.fleet[i].route, r, &route);
      if (!d.feasible) continue;
      double c = ctx.cost().travel_cost * d.travel + ctx.cost().lateness_cost * d.late;
      if (c < best) {
        best = c;
        expect = identity(s);
        expect[i] = route;
      }
    }
    ++checked;
    if (got == expect) ++matched;
    return got;
  }

  int checked = 0;
  int matched = 0;

 private:
  static bool destroyable(const SimState& s, const DayContext& ctx) {
    for (const VehicleState& v : s.fleet)
      for (std::size_t k = 1; k < v.route.size(); ++k)
        if (s.status[v.route[k].request] == RequestStatus::outstanding &&
            ctx.request(v.route[k].request).ready - s.time <= ctx.cost().lookahead)
          return true;
    return false;
  }
  DracePolicy inner_;
};

}  // namespace

TEST_CASE("drace with lambda 0 and equal windows is a brute-force cheapest assignment") {
  TravelTimeModel m = TravelTimeModel::standard();
  RunOptions opts;
  opts.cost.capacity_weight = 0.0;
  opts.cost.lookahead = 0.0;
  opts.keep_log = false;
  int checked = 0;
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    OracleDrace p;
    run_day(dedicated_only(seed), m, p, opts);
    CHECK(p.matched == p.checked);
    checked += p.checked;
  }
  CHECK(checked >= 40);
}

TEST_CASE("drace decisions ignore a constant added to every vehicle score") {
  TravelTimeModel m = TravelTimeModel::standard();
  Instance inst = dedicated_only(9);
  std::string first;
  for (double lambda : {0.0, 0.05, 3.0}) {
    RunOptions opts;
    opts.cost.capacity_weight = lambda;
    DracePolicy p;
    DayResult res = run_day(inst, m, p, opts);
    if (first.empty()) first = log_text(res);
    else CHECK(log_text(res) == first);
  }
}

TEST_CASE("alns seeding puts new requests at the end of a crowdshipper route") {
  AlnsConfig cfg;
  cfg.iteration_limit = 0;
  MyopicAlns p(cfg, 1);
  Action x = first_decision(p, 300.0);
  CHECK(x[0].size() == 1u);
  REQUIRE(x[1].size() == 3u);
  CHECK(x[1][1].kind == StopKind::pickup);
  CHECK(x[1][2].kind == StopKind::delivery);
  // the crowdshipper cannot finish in time, the depot vehicle takes it
  Action y = first_decision(p, 20.0);
  CHECK(y[0].size() == 3u);
}

namespace {

class TracedAlns : public Policy {
 public:
  TracedAlns(AlnsConfig cfg, std::uint64_t seed, int keep_zero) : inner_(cfg, seed), zero_(keep_zero) {}
  std::string name() const override { return "traced"; }
  Action decide(const SimState& s, const DayContext& ctx) override {
    Action x = inner_.decide(s, ctx);
    const auto& tr = inner_.last_trace();
    for (std::size_t i = 1; i < tr.size(); ++i)
      if (tr[i] > tr[i - 1]) ++increases;
    if (tr.size() > 1) ++searched;
    if (zero_) {
      for (std::size_t i = 0; i < x.size(); ++i) {
        const Route& before = s.fleet[i].route;
        bool prefix = x[i].size() >= before.size() && std::equal(before.begin(), before.end(), x[i].begin());
        if (!prefix) ++reordered;
      }
    }
    return x;
  }
  const AlnsStats& stats() const { return inner_.stats(); }

  int increases = 0;
  int searched = 0;
  int reordered = 0;

 private:
  MyopicAlns inner_;
  int zero_;
};

}  // namespace

TEST_CASE("alns accepted cost never rises within an epoch") {
  AlnsConfig cfg;
  cfg.iteration_limit = 25;
  TracedAlns p(cfg, 4, 0);
  RunOptions opts;
  opts.keep_log = false;
  run_day(generate_instance(InstanceClass::nm, DemandLevel::low, 14), TravelTimeModel::standard(), p, opts);
  CHECK(p.searched > 50);
  CHECK(p.increases == 0);
  CHECK(p.stats().accepted > 0);
}

TEST_CASE("alns with no iterations only appends") {
  AlnsConfig cfg;
  cfg.iteration_limit = 0;
  TracedAlns p(cfg, 4, 1);
  RunOptions opts;
  opts.keep_log = false;
  run_day(generate_instance(InstanceClass::nm, DemandLevel::low, 15), TravelTimeModel::standard(), p, opts);
  CHECK(p.reordered == 0);
  CHECK(p.stats().iterations == 0);
}

TEST_CASE("alns config validation") {
  AlnsConfig c;
  CHECK_NOTHROW(c.validate());
  c.removal_count = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = AlnsConfig{};
  c.phi = -1.0;
  CHECK_THROWS_AS(MyopicAlns(c, 1), std::invalid_argument);
}
