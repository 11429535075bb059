#include "crowdroute/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

namespace crowdroute {

std::string to_string(PolicyKind p) { return p == PolicyKind::drace ? "drace" : "myopic"; }

PolicyKind parse_policy(const std::string& s) {
  if (s == "drace") return PolicyKind::drace;
  if (s == "myopic") return PolicyKind::myopic;
  throw UsageError("unknown policy '" + s + "' (expected drace or myopic)");
}

Variant standard_variant(const std::string& name) {
  Variant v;
  v.name = name;
  if (name == "drace") return v;
  if (name == "myopic") {
    v.policy = PolicyKind::myopic;
    return v;
  }
  if (name == "drace-no-wait") {
    v.wait_fraction = 0.0;
    return v;
  }
  if (name == "drace-avg-tt") {
    v.planning = TravelMode::average;
    return v;
  }
  throw UsageError("unknown variant '" + name + "'");
}

RunOptions run_options(const Variant& v, const ExperimentPlan& plan) {
  RunOptions o;
  o.cost = plan.cost;
  if (v.wait_fraction) o.cost.wait_fraction = *v.wait_fraction;
  if (v.capacity_weight) o.cost.capacity_weight = *v.capacity_weight;
  o.keep_log = false;
  o.budget_ms = plan.budget_ms;
  return o;
}

std::unique_ptr<Policy> make_policy(const Variant& v, const ExperimentPlan& plan, std::uint64_t seed) {
  if (v.policy == PolicyKind::drace) return std::make_unique<DracePolicy>(v.planning);
  AlnsConfig cfg = plan.alns;
  cfg.travel = v.planning;
  cfg.lookahead = plan.cost.lookahead;
  cfg.budget_ms = plan.budget_ms;
  return std::make_unique<MyopicAlns>(cfg, seed * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL);
}

// ---- statistics ------------------------------------------------------------

Stats describe(std::vector<double> values) {
  Stats s;
  s.n = static_cast<int>(values.size());
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.min = values.front();
  s.max = values.back();
  const std::size_t n = values.size();
  s.median = n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stdev = std::sqrt(ss / (n - 1));
  }
  return s;
}

Interval paired_ci(const std::vector<double>& diffs, double level) {
  if (diffs.size() < 2) throw UsageError("a paired interval needs at least two differences");
  if (!(level > 0.0 && level < 1.0)) throw UsageError("confidence level must lie in (0, 1)");
  if (std::all_of(diffs.begin(), diffs.end(), [&](double d) { return d == diffs.front(); }))
    return {diffs.front(), diffs.front()};
  Stats s = describe(diffs);
  boost::math::students_t dist(static_cast<double>(s.n - 1));
  double q = boost::math::quantile(boost::math::complement(dist, (1.0 - level) / 2.0));
  double half = q * s.stdev / std::sqrt(static_cast<double>(s.n));
  return {s.mean - half, s.mean + half};
}

double percent_reduction(double baseline, double candidate) {
  if (baseline == 0.0) return 0.0;
  return 100.0 * (baseline - candidate) / baseline;
}

const std::vector<KpiColumn>& kpi_columns() {
  static const std::vector<KpiColumn> cols = {
      {"requests", [](const KpiReport& k) { return double(k.requests); }},
      {"total_cost", [](const KpiReport& k) { return k.total_cost; }},
      {"routing_cost", [](const KpiReport& k) { return k.routing_cost; }},
      {"travel_cost", [](const KpiReport& k) { return k.travel_cost; }},
      {"crowd_fees", [](const KpiReport& k) { return k.crowd_fees; }},
      {"lateness_charge", [](const KpiReport& k) { return k.lateness_charge; }},
      {"delayed_requests", [](const KpiReport& k) { return double(k.delayed_requests); }},
      {"delay_minutes", [](const KpiReport& k) { return k.delay_minutes; }},
      {"crowd_served", [](const KpiReport& k) { return double(k.crowd_served); }},
      {"dedicated_served", [](const KpiReport& k) { return double(k.dedicated_served); }},
      {"epochs", [](const KpiReport& k) { return double(k.epochs); }},
  };
  return cols;
}

std::vector<VariantSummary> summarize(const std::vector<ReplicationResult>& rows,
                                      const std::vector<std::string>& variants) {
  std::vector<VariantSummary> out;
  for (const std::string& name : variants) {
    VariantSummary vs;
    vs.variant = name;
    for (const KpiColumn& col : kpi_columns()) {
      std::vector<double> vals;
      for (const auto& r : rows)
        if (r.variant == name) vals.push_back(col.get(r.kpi));
      vs.kpis.push_back(describe(std::move(vals)));
    }
    out.push_back(std::move(vs));
  }
  return out;
}

ComparisonSummary compare(const std::vector<ReplicationResult>& rows, const std::string& baseline,
                          const std::string& candidate) {
  ComparisonSummary c;
  c.baseline = baseline;
  c.candidate = candidate;
  std::vector<const ReplicationResult*> base, cand;
  for (const auto& r : rows) {
    if (r.variant == baseline) base.push_back(&r);
    if (r.variant == candidate) cand.push_back(&r);
  }
  auto by_rep = [](const ReplicationResult* a, const ReplicationResult* b) {
    return a->replication < b->replication;
  };
  std::sort(base.begin(), base.end(), by_rep);
  std::sort(cand.begin(), cand.end(), by_rep);
  if (base.size() != cand.size()) throw UsageError("variants have different replication counts");
  std::vector<double> diffs;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (base[i]->replication != cand[i]->replication) throw UsageError("replications are not paired");
    double a = base[i]->kpi.total_cost, b = cand[i]->kpi.total_cost;
    c.baseline_cost.push_back(a);
    c.candidate_cost.push_back(b);
    c.reductions.push_back(percent_reduction(a, b));
    diffs.push_back(a - b);
    if (b < a) ++c.candidate_wins;
  }
  c.reduction = describe(c.reductions);
  if (diffs.size() >= 2) c.difference_ci = paired_ci(diffs);
  return c;
}

// ---- runner ----------------------------------------------------------------

ExperimentResult run_experiment(const ExperimentPlan& plan, const TravelTimeModel& model) {
  if (plan.replications < 0) throw UsageError("replication count must be >= 0");
  if (plan.variants.empty()) throw UsageError("experiment needs at least one variant");
  for (std::size_t i = 0; i < plan.variants.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (plan.variants[i].name == plan.variants[j].name)
        throw UsageError("variant '" + plan.variants[i].name + "' appears twice");
  plan.cost.validate();
  plan.alns.validate();
  const std::size_t nv = plan.variants.size();
  const std::size_t total = static_cast<std::size_t>(plan.replications) * nv;
  ExperimentResult res;
  res.rows.resize(total);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::size_t bad_task = total;
  std::string bad_what;

  auto work = [&] {
    for (;;) {
      std::size_t k = next.fetch_add(1);
      if (k >= total || failed.load()) return;
      const int rep = static_cast<int>(k / nv);
      const Variant& v = plan.variants[k % nv];
      const std::uint64_t seed = replication_seed(plan, rep);
      try {
        InstanceClass cls = v.instance_class.value_or(plan.instance_class);
        Instance inst = generate_instance(cls, plan.level, seed);
        auto policy = make_policy(v, plan, seed);
        DayResult day = run_day(inst, model, *policy, run_options(v, plan));
        res.rows[k] = ReplicationResult{rep, seed, v.name, cls, plan.level, day.kpi};
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(mu);
        if (k < bad_task) {
          bad_task = k;
          bad_what = "variant " + v.name + ", seed " + std::to_string(seed) + ": " + e.what();
        }
        failed = true;
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(plan.jobs, static_cast<int>(std::max<std::size_t>(total, 1))));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (failed) throw ExperimentError(bad_what, replication_seed(plan, static_cast<int>(bad_task / nv)));

  std::vector<std::string> names;
  for (const Variant& v : plan.variants) names.push_back(v.name);
  res.summaries = summarize(res.rows, names);
  if (plan.replications > 0)
    for (std::size_t i = 1; i < nv; ++i) res.comparisons.push_back(compare(res.rows, names[0], names[i]));
  return res;
}

TunedParameter parse_tuned_parameter(const std::string& s) {
  if (s == "lambda") return TunedParameter::lambda;
  if (s == "eta") return TunedParameter::eta;
  throw UsageError("unknown tuning parameter '" + s + "' (expected lambda or eta)");
}

namespace {

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

TuneResult tune(TunedParameter p, const std::vector<double>& grid, const ExperimentPlan& plan,
                const TravelTimeModel& model) {
  if (grid.empty()) throw UsageError("tuning grid is empty");
  ExperimentPlan run = plan;
  run.variants.clear();
  for (double g : grid) {
    Variant v;
    v.name = (p == TunedParameter::lambda ? "lambda=" : "eta=") + fmt(g);
    if (p == TunedParameter::lambda)
      v.capacity_weight = g;
    else
      v.wait_fraction = g;
    run.variants.push_back(v);
  }
  ExperimentResult res = run_experiment(run, model);
  TuneResult out;
  out.grid = grid;
  out.summaries = res.summaries;
  const std::size_t total_col = 1;  // total_cost in kpi_columns()
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double c = res.summaries[i].kpis[total_col].mean;
    out.mean_cost.push_back(c);
    if (c < best_cost || (c == best_cost && grid[i] < out.best)) {
      best_cost = c;
      out.best = grid[i];
    }
  }
  return out;
}

// ---- files -----------------------------------------------------------------

void write_results(std::ostream& os, const std::vector<ReplicationResult>& rows) {
  os << "# crowdroute-results " << kResultsVersion << '\n';
  os << "replication,seed,variant,class,level";
  for (const KpiColumn& c : kpi_columns()) os << ',' << c.name;
  os << '\n';
  for (const auto& r : rows) {
    os << r.replication << ',' << r.seed << ',' << r.variant << ',' << to_string(r.instance_class) << ','
       << to_string(r.level);
    for (const KpiColumn& c : kpi_columns()) os << ',' << fmt(c.get(r.kpi));
    os << '\n';
  }
}

std::vector<ReplicationResult> read_results(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "# crowdroute-results " + std::to_string(kResultsVersion))
    throw std::runtime_error("not a version " + std::to_string(kResultsVersion) + " results file");
  std::getline(is, line);  // column header
  std::vector<ReplicationResult> rows;
  int ln = 2;
  while (std::getline(is, line)) {
    ++ln;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 5 + kpi_columns().size())
      throw std::runtime_error("results line " + std::to_string(ln) + ": wrong column count");
    auto num = [&](const std::string& s) {
      double v = 0.0;
      auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw std::runtime_error("results line " + std::to_string(ln) + ": bad number '" + s + "'");
      return v;
    };
    ReplicationResult r;
    r.replication = static_cast<int>(num(f[0]));
    r.seed = std::stoull(f[1]);
    r.variant = f[2];
    r.instance_class = parse_instance_class(f[3]);
    r.level = parse_demand_level(f[4]);
    std::vector<double> v;
    for (std::size_t i = 5; i < f.size(); ++i) v.push_back(num(f[i]));
    KpiReport& k = r.kpi;
    k.requests = static_cast<int>(v[0]);
    k.total_cost = v[1];
    k.routing_cost = v[2];
    k.travel_cost = v[3];
    k.crowd_fees = v[4];
    k.lateness_charge = v[5];
    k.delayed_requests = static_cast<int>(v[6]);
    k.delay_minutes = v[7];
    k.crowd_served = static_cast<int>(v[8]);
    k.dedicated_served = static_cast<int>(v[9]);
    k.epochs = static_cast<int>(v[10]);
    rows.push_back(r);
  }
  return rows;
}

void write_summary(std::ostream& os, const ExperimentResult& res) {
  os << "# crowdroute-summary " << kResultsVersion << '\n';
  os << std::fixed << std::setprecision(2);
  for (const VariantSummary& vs : res.summaries) {
    os << "\n[" << vs.variant << "]\n";
    os << std::left << std::setw(18) << "kpi" << std::right << std::setw(12) << "average" << std::setw(12)
       << "median" << std::setw(12) << "stdev" << std::setw(12) << "min" << std::setw(12) << "max" << '\n';
    for (std::size_t i = 0; i < vs.kpis.size(); ++i) {
      const Stats& s = vs.kpis[i];
      os << std::left << std::setw(18) << kpi_columns()[i].name << std::right << std::setw(12) << s.mean
         << std::setw(12) << s.median << std::setw(12) << s.stdev << std::setw(12) << s.min << std::setw(12)
         << s.max << '\n';
    }
  }
  for (const ComparisonSummary& c : res.comparisons) {
    os << "\n[" << c.baseline << " vs " << c.candidate << "]\n";
    os << "percent_reduction median " << c.reduction.median << " min " << c.reduction.min << " max "
       << c.reduction.max << '\n';
    os << "candidate_cheaper " << c.candidate_wins << " of " << c.baseline_cost.size() << '\n';
    if (c.baseline_cost.size() >= 2)
      os << "difference_ci95 [" << c.difference_ci.lower << ", " << c.difference_ci.upper << "]\n";
  }
}

}  // namespace crowdroute
