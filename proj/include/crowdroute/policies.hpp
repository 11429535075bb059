#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "crowdroute/mdp.hpp"
#include "crowdroute/routing.hpp"

namespace crowdroute {

// CFA score of assigning a request to a vehicle; infinity when the vehicle
// cannot finish by its availability end
double cfa_cost(const DeltaResult& d, VehicleKind kind, double expire, double now, const CostConfig& c);

// weighted geographic plus temporal dissimilarity, average travel times
double relatedness(const Request& a, const Request& b, double phi, double chi);
double relatedness(const DayContext& ctx, int a, int b, double phi, double chi);

class DracePolicy : public Policy {
 public:
  explicit DracePolicy(TravelMode planning = TravelMode::time_dependent) : mode_(planning) {}
  std::string name() const override { return "drace"; }
  Action decide(const SimState& s, const DayContext& ctx) override;

 private:
  TravelMode mode_;
};

struct AlnsConfig {
  double phi = 9.0;
  double chi = 3.0;
  int removal_count = 4;
  int iteration_limit = 200;
  double lookahead = 45.0;
  double budget_ms = 2000.0;
  TravelMode travel = TravelMode::time_dependent;

  void validate() const;
};

struct AlnsStats {
  long iterations = 0;
  long accepted = 0;
  int budget_cuts = 0;  // epochs where the wall-clock budget stopped the search
};

class MyopicAlns : public Policy {
 public:
  MyopicAlns(AlnsConfig cfg, std::uint64_t seed);
  std::string name() const override { return "myopic"; }
  Action decide(const SimState& s, const DayContext& ctx) override;

  const AlnsStats& stats() const { return stats_; }
  // accepted solution cost after each iteration of the last decide call
  const std::vector<double>& last_trace() const { return trace_; }

 private:
  AlnsConfig cfg_;
  std::mt19937_64 rng_;
  AlnsStats stats_;
  std::vector<double> trace_;
};

}  // namespace crowdroute
