#include <doctest.h>

#include <map>
#include <sstream>

#include "crowdroute/mdp.hpp"
#include "crowdroute/policies.hpp"
#include "crowdroute/routing.hpp"
#include "fixtures.hpp"

using namespace crowdroute;
using namespace fixtures;

TEST_CASE("waiting rule") {
  // eta (b - t) = 20 beats a slack of 5
  CHECK(planned_departure(0.0, 100.0, 0.2, 15.0, 10.0) == doctest::Approx(20.0));
  CHECK(planned_departure(0.0, 100.0, 0.0, 15.0, 10.0) == doctest::Approx(5.0));
  // slack 30 beats eta (b - t) = 20
  CHECK(planned_departure(10.0, 110.0, 0.2, 50.0, 10.0) - 10.0 == doctest::Approx(30.0));
}

TEST_CASE("cost config validation") {
  CostConfig c;
  CHECK_NOTHROW(c.validate());
  c.wait_fraction = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = CostConfig{};
  c.crowd_fee = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("crowdshipper pickup and late delivery are charged at departure") {
  TravelTimeModel m = flat_model();
  Instance inst = empty_day();
  add_dedicated(inst, loc(10, 5));
  add_crowd(inst, loc(10, 8), loc(16, 8), 0.0, 300.0);
  add_request(inst, loc(12, 8), loc(2, 8), 0.0, 0.0, 21.0);
  DayContext ctx(inst, m, CostConfig{});
  std::vector<Event> log;
  Engine engine(ctx, &log);
  SimState s = engine.initial_state();
  REQUIRE(s.fleet.size() == 2u);
  REQUIRE(s.fresh == std::vector<int>{0});

  Action x = identity(s);
  x[1].push_back(ctx.pickup_stop(0));
  x[1].push_back(ctx.delivery_stop(0));
  // 2 km to the pickup at 0.5 km/min plus the fee
  CHECK(engine.apply_action(s, x) == doctest::Approx(4.0 + 2.0));
  CHECK(s.status[0] == RequestStatus::in_process);
  CHECK(s.carrier[0] == 1);
  CHECK(s.ledger.crowd_served == 1);

  double c = 0.0;
  while (s.time < 4.0) {
    engine.advance(s);
    c = engine.apply_action(s, identity(s));
  }
  // 10 km to the delivery, arriving at 24 against a deadline of 21
  CHECK(c == doctest::Approx(20.0 + 5.0 * 3.0));
  CHECK(s.ledger.late_minutes == doctest::Approx(3.0));
  CHECK(s.ledger.lateness_charge == doctest::Approx(15.0));
  CHECK(s.ledger.delayed == 1);

  while (!engine.finished(s)) {
    REQUIRE(s.time < inst.hard_end);
    engine.advance(s);
    engine.apply_action(s, identity(s));
  }
  CHECK(s.status[0] == RequestStatus::delivered);
  CHECK(s.delivered_at[0] == doctest::Approx(24.0));
  // 14 km home once engaged
  CHECK(s.ledger.travel_minutes == doctest::Approx(24.0 + 28.0));
  CHECK(s.ledger.epoch_cost_sum == doctest::Approx(52.0 + 2.0 + 15.0));
}

TEST_CASE("dedicated vehicle waits per the rule before an early pickup") {
  TravelTimeModel m = flat_model();
  Instance inst = empty_day();
  add_dedicated(inst, loc(10, 5));
  add_request(inst, loc(10, 8), loc(14, 8), 0.0, 20.0, 500.0);
  for (double eta : {0.0, 0.2}) {
    RunOptions opts;
    opts.cost.wait_fraction = eta;
    AppendPolicy p;
    DayResult res = run_day(inst, m, p, opts);
    double expect = eta == 0.0 ? 14.0 : 0.2 * 1200.0;
    bool waited = false, left = false;
    for (const Event& e : res.log) {
      if (e.kind == EventKind::wait) {
        waited = true;
        CHECK(e.epoch == 0);
        CHECK(e.time == doctest::Approx(expect));
      }
      if (e.kind == EventKind::depart && e.stop == StopKind::pickup) {
        left = true;
        CHECK(e.epoch == static_cast<int>(expect));
      }
    }
    CHECK(waited);
    CHECK(left);
  }
}

TEST_CASE("delivery stops are left for immediately") {
  TravelTimeModel m = flat_model();
  Instance inst = empty_day();
  add_dedicated(inst, loc(10, 5));
  add_request(inst, loc(10, 8), loc(14, 8), 0.0, 1.0, 500.0);
  AppendPolicy p;
  DayResult res = run_day(inst, m, p, RunOptions{});
  int pickup_arrival = -1, delivery_depart = -1;
  for (const Event& e : res.log) {
    if (e.kind == EventKind::arrive && e.stop == StopKind::pickup) pickup_arrival = e.epoch;
    if (e.kind == EventKind::depart && e.stop == StopKind::delivery) delivery_depart = e.epoch;
    CHECK(e.kind != EventKind::wait);
  }
  CHECK(pickup_arrival == 6);
  CHECK(delivery_depart == 6);
}

TEST_CASE("one request, one dedicated vehicle, generous deadline") {
  TravelTimeModel m = flat_model();
  Instance inst = empty_day();
  add_dedicated(inst, loc(10, 5));
  add_request(inst, loc(10, 8), loc(14, 8), 0.0, 5.0, 1000.0);
  for (bool legs : {false, true}) {
    RunOptions opts;
    opts.cost.charge_endpoint_legs = legs;
    AppendPolicy p;
    DayResult res = run_day(inst, m, p, opts);
    // 3 km out, 4 km across, 5 km back to the depot
    double expect = 6.0 + 8.0 + (legs ? 10.0 : 0.0);
    CHECK(res.kpi.total_cost == doctest::Approx(expect));
    CHECK(res.kpi.lateness_charge == 0.0);
    CHECK(res.kpi.crowd_served == 0);
    CHECK(res.kpi.dedicated_served == 1);
    CHECK(res.kpi.delayed_requests == 0);
  }
}

TEST_CASE("zero-request day costs nothing") {
  Instance inst = generate_instance(InstanceClass::nm, DemandLevel::low, 5);
  inst.requests.clear();
  DracePolicy p;
  DayResult res = run_day(inst, TravelTimeModel::standard(), p, RunOptions{});
  CHECK(res.kpi.total_cost == 0.0);
  CHECK(res.kpi.routing_cost == 0.0);
  CHECK(res.kpi.lateness_charge == 0.0);
  CHECK(res.kpi.crowd_served == 0);
  CHECK(res.kpi.dedicated_served == 0);
  CHECK(res.kpi.requests == 0);
}

TEST_CASE("crowdshippers join and leave on their clock") {
  Instance inst = generate_instance(InstanceClass::nm, DemandLevel::low, 8);
  inst.requests.clear();
  TravelTimeModel m = TravelTimeModel::standard();
  DayContext ctx(inst, m, CostConfig{});
  Engine engine(ctx);
  SimState s = engine.initial_state();
  REQUIRE(crowdshipper_table()[1].appear == 60.0);
  const int second = 5 + 1;
  REQUIRE(inst.fleet[second].kind == VehicleKind::crowdshipper);
  const double first_expire = inst.fleet[5].expire;
  while (s.time < 60.0) {
    CHECK(s.find(second) == nullptr);
    engine.apply_action(s, identity(s));
    std::size_t before = s.fleet.size();
    engine.advance(s);
    if (s.time == 60.0) CHECK(s.fleet.size() == before + 1);
  }
  CHECK(s.find(second) != nullptr);
  while (s.time < first_expire) {
    engine.apply_action(s, identity(s));
    engine.advance(s);
  }
  CHECK(s.find(5) == nullptr);
}

TEST_CASE("action contract") {
  TravelTimeModel m = flat_model();
  Instance inst = empty_day();
  add_dedicated(inst, loc(10, 5));
  add_crowd(inst, loc(10, 8), loc(16, 8), 0.0, 40.0);
  add_request(inst, loc(12, 8), loc(2, 8), 0.0, 0.0, 21.0);
  add_request(inst, loc(11, 5), loc(12, 5), 0.0, 0.0, 60.0);
  DayContext ctx(inst, m, CostConfig{});
  Engine engine(ctx);
  SimState s = engine.initial_state();
  const Stop p0 = ctx.pickup_stop(0), d0 = ctx.delivery_stop(0);
  const Stop p1 = ctx.pickup_stop(1), d1 = ctx.delivery_stop(1);

  Action ok = identity(s);
  ok[0] = {ok[0][0], p0, d0, p1, d1};
  CHECK_NOTHROW(engine.check_action(s, ok));

  Action bad = ok;
  bad.pop_back();
  CHECK_THROWS_AS(engine.check_action(s, bad), ContractViolation);

  bad = ok;
  bad[0][0] = ctx.pickup_stop(0);
  CHECK_THROWS_AS(engine.check_action(s, bad), ContractViolation);

  bad = ok;
  bad[0] = {ok[0][0], p0, d0};
  CHECK_THROWS_AS(engine.check_action(s, bad), ContractViolation);  // request 1 dropped

  bad = ok;
  bad[0] = {ok[0][0], p0, d0, p1};
  bad[1].push_back(d1);
  CHECK_THROWS_AS(engine.check_action(s, bad), ContractViolation);  // split

  bad = ok;
  bad[0] = {ok[0][0], d0, p0, p1, d1};
  CHECK_THROWS_AS(engine.check_action(s, bad), ContractViolation);

  bad = ok;
  bad[0] = {ok[0][0], p1, d1};
  bad[1] = {ok[1][0], p0, d0};  // home at 24 + 28 > 40
  CHECK_THROWS_AS(engine.check_action(s, bad), ContractViolation);
  CHECK_THROWS_AS(engine.apply_action(s, bad), ContractViolation);

  bad = ok;
  bad[0].push_back(ctx.endpoint_stop(0));
  CHECK_THROWS_AS(engine.check_action(s, bad), ContractViolation);
}

namespace {

void check_day(const Instance& inst, const DayResult& res, const CostConfig& cc) {
  const KpiReport& k = res.kpi;
  const SimState& s = res.final_state;
  CHECK(k.total_cost == k.routing_cost + k.lateness_charge);
  CHECK(k.epoch_cost_sum == doctest::Approx(k.total_cost).epsilon(1e-9));
  CHECK(k.crowd_fees == doctest::Approx(cc.crowd_fee * k.crowd_served).epsilon(1e-12));
  CHECK(k.crowd_served + k.dedicated_served == k.requests);
  CHECK(s.delivered == k.requests);

  std::map<int, int> delivered, picked_by;
  std::map<int, double> last_event;
  for (const Event& e : res.log) {
    last_event[e.vehicle] = std::max(last_event[e.vehicle], e.time);
    if (e.kind == EventKind::deliver) ++delivered[e.request];
    if (e.kind == EventKind::depart && e.stop == StopKind::pickup) {
      CHECK(picked_by.count(e.request) == 0);
      picked_by[e.request] = e.vehicle;
    }
    if (e.kind == EventKind::deliver) CHECK(picked_by[e.request] == e.vehicle);
  }
  CHECK(static_cast<int>(delivered.size()) == k.requests);
  for (const auto& [r, n] : delivered) CHECK(n == 1);
  for (const auto& [v, t] : last_event) CHECK(t <= inst.fleet[v].expire + kTimeTol);
  for (const Event& e : res.log)
    if (e.kind == EventKind::expire) {
      const VehicleSpec& spec = inst.fleet[e.vehicle];
      CHECK(e.x == spec.finish.x);
      CHECK(e.y == spec.finish.y);
    }
}

std::string log_text(const DayResult& r) {
  std::ostringstream os;
  write_events(os, r.log);
  return os.str();
}

}  // namespace

TEST_CASE("conservation and replay on generated days") {
  TravelTimeModel m = TravelTimeModel::standard();
  RunOptions opts;
  AlnsConfig ac;
  ac.iteration_limit = 15;
  for (std::uint64_t seed : {31u, 32u}) {
    Instance inst = generate_instance(InstanceClass::nm, DemandLevel::low, seed);
    DracePolicy d1, d2;
    DayResult a = run_day(inst, m, d1, opts);
    DayResult b = run_day(inst, m, d2, opts);
    check_day(inst, a, opts.cost);
    CHECK(log_text(a) == log_text(b));

    MyopicAlns m1(ac, seed), m2(ac, seed);
    DayResult c = run_day(inst, m, m1, opts);
    DayResult d = run_day(inst, m, m2, opts);
    check_day(inst, c, opts.cost);
    CHECK(log_text(c) == log_text(d));
  }
}

TEST_CASE("event log format") {
  std::ostringstream os;
  write_events(os, {Event{3, 1, EventKind::depart, StopKind::pickup, 7, 1.5, 2.0, 9.25, 4.0}});
  CHECK(os.str() == "# epoch vehicle event stop request x y time cost\n3 1 depart pickup 7 1.5 2 9.25 4\n");
}
