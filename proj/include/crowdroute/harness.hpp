#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdroute/instances.hpp"
#include "crowdroute/mdp.hpp"
#include "crowdroute/policies.hpp"

namespace crowdroute {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ExperimentError : public std::runtime_error {
 public:
  ExperimentError(const std::string& what, std::uint64_t seed)
      : std::runtime_error(what), seed_(seed) {}
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

enum class PolicyKind { drace, myopic };

std::string to_string(PolicyKind p);
PolicyKind parse_policy(const std::string& s);

struct Variant {
  std::string name;
  PolicyKind policy = PolicyKind::drace;
  TravelMode planning = TravelMode::time_dependent;
  std::optional<double> wait_fraction;
  std::optional<double> capacity_weight;
  std::optional<InstanceClass> instance_class;  // overrides the plan's class
};

// drace, myopic, drace-no-wait, drace-avg-tt
Variant standard_variant(const std::string& name);

struct ExperimentPlan {
  InstanceClass instance_class = InstanceClass::nm;
  DemandLevel level = DemandLevel::low;
  int replications = 20;
  std::uint64_t seed_base = 1;
  std::vector<Variant> variants;
  CostConfig cost;
  AlnsConfig alns;
  double budget_ms = 2000.0;
  int jobs = 1;
};

inline std::uint64_t replication_seed(const ExperimentPlan& p, int rep) {
  return p.seed_base + static_cast<std::uint64_t>(rep);
}

std::unique_ptr<Policy> make_policy(const Variant& v, const ExperimentPlan& plan, std::uint64_t seed);
RunOptions run_options(const Variant& v, const ExperimentPlan& plan);

struct ReplicationResult {
  int replication = 0;
  std::uint64_t seed = 0;
  std::string variant;
  InstanceClass instance_class = InstanceClass::nm;
  DemandLevel level = DemandLevel::low;
  KpiReport kpi;
};

struct Stats {
  int n = 0;
  double mean = 0.0;
  double median = 0.0;
  double stdev = 0.0;  // sample standard deviation
  double min = 0.0;
  double max = 0.0;
};

Stats describe(std::vector<double> values);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double v) const { return lower <= v && v <= upper; }
};

// two-sided paired-t interval on the mean difference
Interval paired_ci(const std::vector<double>& diffs, double level = 0.95);
double percent_reduction(double baseline, double candidate);

struct KpiColumn {
  const char* name;
  double (*get)(const KpiReport&);
};
// the reported KPI columns, in file order
const std::vector<KpiColumn>& kpi_columns();

struct VariantSummary {
  std::string variant;
  std::vector<Stats> kpis;  // aligned with kpi_columns()
};

struct ComparisonSummary {
  std::string baseline;
  std::string candidate;
  std::vector<double> baseline_cost;
  std::vector<double> candidate_cost;
  std::vector<double> reductions;  // percent, per replication
  Stats reduction;
  Interval difference_ci;  // on baseline - candidate
  int candidate_wins = 0;  // replications where the candidate is strictly cheaper
};

struct ExperimentResult {
  std::vector<ReplicationResult> rows;  // replication-major, variant order within
  std::vector<VariantSummary> summaries;
  std::vector<ComparisonSummary> comparisons;  // each variant against the first
};

// runs every (replication, variant) pair on a worker pool
ExperimentResult run_experiment(const ExperimentPlan& plan, const TravelTimeModel& model);

std::vector<VariantSummary> summarize(const std::vector<ReplicationResult>& rows,
                                      const std::vector<std::string>& variants);
ComparisonSummary compare(const std::vector<ReplicationResult>& rows, const std::string& baseline,
                          const std::string& candidate);

enum class TunedParameter { lambda, eta };
TunedParameter parse_tuned_parameter(const std::string& s);

struct TuneResult {
  double best = 0.0;
  std::vector<double> grid;
  std::vector<double> mean_cost;
  std::vector<VariantSummary> summaries;
};

TuneResult tune(TunedParameter p, const std::vector<double>& grid, const ExperimentPlan& plan,
                const TravelTimeModel& model);

inline constexpr int kResultsVersion = 1;
void write_results(std::ostream& os, const std::vector<ReplicationResult>& rows);
std::vector<ReplicationResult> read_results(std::istream& is);
void write_summary(std::ostream& os, const ExperimentResult& res);

}  // namespace crowdroute
