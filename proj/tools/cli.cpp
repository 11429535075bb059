#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#ifndef CROWDROUTE_VERSION
#define CROWDROUTE_VERSION "dev"
#endif

namespace crowdroute::cli {

namespace fs = std::filesystem;
using nlohmann::json;

CostConfig RunConfig::cost() const {
  CostConfig c;
  c.capacity_weight = lambda;
  c.wait_fraction = no_strategic_wait ? 0.0 : eta;
  c.lookahead = gamma;
  return c;
}

AlnsConfig RunConfig::alns() const {
  AlnsConfig a;
  a.phi = phi;
  a.chi = chi;
  a.removal_count = removals;
  a.iteration_limit = iterations;
  a.lookahead = gamma;
  a.budget_ms = budget_ms;
  a.travel = avg_tt ? TravelMode::average : TravelMode::time_dependent;
  return a;
}

ExperimentPlan RunConfig::plan() const {
  ExperimentPlan p;
  p.instance_class = parse_instance_class(instance_class);
  p.level = parse_demand_level(level);
  p.replications = reps;
  p.seed_base = seed;
  p.cost = cost();
  p.alns = alns();
  p.budget_ms = budget_ms;
  p.jobs = jobs;
  for (const std::string& name : compare) {
    Variant v = standard_variant(name);
    if (avg_tt) v.planning = TravelMode::average;
    p.variants.push_back(v);
  }
  return p;
}

namespace {

const std::vector<std::string> kInstanceKeys = {"class", "level", "seed"};
const std::vector<std::string> kPolicyKeys = {"lambda", "eta",     "gamma",  "phi",
                                              "chi",    "removals", "iterations", "budget-ms",
                                              "avg-tt", "no-strategic-wait"};

std::vector<std::string> concat(std::initializer_list<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace

const std::vector<std::string>& config_keys(const std::string& command) {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"generate", concat({kInstanceKeys, {"out", "travel-config"}})},
      {"simulate", concat({kInstanceKeys, kPolicyKeys, {"instance", "policy", "out", "events", "travel-config"}})},
      {"experiment", concat({kInstanceKeys, kPolicyKeys, {"reps", "jobs", "compare", "out"}})},
      {"tune", concat({kInstanceKeys, kPolicyKeys, {"reps", "jobs", "param", "grid", "out"}})},
  };
  auto it = keys.find(command);
  if (it == keys.end()) throw UsageError("unknown command '" + command + "'");
  return it->second;
}

void apply_config(RunConfig& cfg, const std::string& json_text, const std::vector<std::string>& skip) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  const auto& allowed = config_keys(cfg.command);
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw UsageError("unknown config key '" + key + "' for " + cfg.command);
    if (std::find(skip.begin(), skip.end(), key) != skip.end()) continue;
    const json& v = it.value();
    try {
      if (key == "class") cfg.instance_class = v.get<std::string>();
      else if (key == "level") cfg.level = v.get<std::string>();
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "reps") cfg.reps = v.get<int>();
      else if (key == "policy") cfg.policy = v.get<std::string>();
      else if (key == "lambda") cfg.lambda = v.get<double>();
      else if (key == "eta") cfg.eta = v.get<double>();
      else if (key == "gamma") cfg.gamma = v.get<double>();
      else if (key == "phi") cfg.phi = v.get<double>();
      else if (key == "chi") cfg.chi = v.get<double>();
      else if (key == "removals") cfg.removals = v.get<int>();
      else if (key == "iterations") cfg.iterations = v.get<int>();
      else if (key == "budget-ms") cfg.budget_ms = v.get<double>();
      else if (key == "avg-tt") cfg.avg_tt = v.get<bool>();
      else if (key == "no-strategic-wait") cfg.no_strategic_wait = v.get<bool>();
      else if (key == "jobs") cfg.jobs = v.get<int>();
      else if (key == "out") cfg.out = v.get<std::string>();
      else if (key == "instance") cfg.instance = v.get<std::string>();
      else if (key == "compare") cfg.compare = v.get<std::vector<std::string>>();
      else if (key == "param") cfg.param = v.get<std::string>();
      else if (key == "grid") cfg.grid = v.get<std::vector<double>>();
      else if (key == "travel-config") cfg.travel_config = v.get<std::string>();
      else if (key == "events") cfg.events = v.get<bool>();
    } catch (const json::exception&) {
      throw UsageError("config key '" + key + "' has the wrong type");
    }
  }
}

std::string manifest_json(const RunConfig& cfg, const std::vector<std::string>& outputs) {
  json j;
  j["tool"] = "crowdroute";
  j["version"] = CROWDROUTE_VERSION;
  j["command"] = cfg.command;
  json c;
  c["class"] = cfg.instance_class;
  c["level"] = cfg.level;
  c["seed"] = cfg.seed;
  if (cfg.command != "generate") {
    c["lambda"] = cfg.lambda;
    c["eta"] = cfg.eta;
    c["gamma"] = cfg.gamma;
    c["phi"] = cfg.phi;
    c["chi"] = cfg.chi;
    c["removals"] = cfg.removals;
    c["iterations"] = cfg.iterations;
    c["budget-ms"] = cfg.budget_ms;
    c["avg-tt"] = cfg.avg_tt;
    c["no-strategic-wait"] = cfg.no_strategic_wait;
  }
  if (cfg.command == "simulate") {
    c["policy"] = cfg.policy;
    c["events"] = cfg.events;
    if (!cfg.instance.empty()) c["instance"] = cfg.instance;
  }
  if (cfg.command == "experiment" || cfg.command == "tune") {
    c["reps"] = cfg.reps;
    c["jobs"] = cfg.jobs;
    std::vector<std::uint64_t> seeds;
    for (int r = 0; r < cfg.reps; ++r) seeds.push_back(cfg.seed + static_cast<std::uint64_t>(r));
    j["replication_seeds"] = seeds;
  }
  if (cfg.command == "experiment") c["compare"] = cfg.compare;
  if (cfg.command == "tune") {
    c["param"] = cfg.param;
    c["grid"] = cfg.grid;
  }
  if (!cfg.travel_config.empty()) c["travel-config"] = cfg.travel_config;
  if (!cfg.out.empty()) c["out"] = cfg.out;
  j["config"] = c;
  j["outputs"] = outputs;
  return j.dump(2) + "\n";
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
  return fs::path(dir);
}

void validate(const RunConfig& cfg) {
  parse_instance_class(cfg.instance_class);
  parse_demand_level(cfg.level);
  if (cfg.command == "generate") {
    if (cfg.out.empty()) throw UsageError("generate needs --out");
    return;
  }
  try {
    cfg.cost().validate();
    cfg.alns().validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (cfg.jobs < 1) throw UsageError("--jobs must be >= 1");
  if (cfg.reps < 0) throw UsageError("--reps must be >= 0");
  if (cfg.command == "simulate") parse_policy(cfg.policy);
  if (cfg.command == "experiment") {
    if (cfg.compare.empty()) throw UsageError("--compare needs at least one variant");
    for (const auto& v : cfg.compare) standard_variant(v);
  }
  if (cfg.command == "tune") {
    parse_tuned_parameter(cfg.param);
    if (cfg.grid.empty()) throw UsageError("--grid is empty");
  }
}

TravelTimeModel travel_model(const RunConfig& cfg) {
  if (cfg.travel_config.empty()) return TravelTimeModel::standard();
  std::string text = read_file(cfg.travel_config);
  try {
    return travel_model_from_json(text);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

Instance make_instance(const RunConfig& cfg, const TravelTimeModel& model) {
  const Geography& geo = model.geography();
  LocationPools pools = LocationPools::build(geo);
  return generate_instance(parse_instance_class(cfg.instance_class), parse_demand_level(cfg.level), cfg.seed,
                           geo, pools);
}

void check_fits(const Instance& inst, const Geography& geo) {
  auto fits = [&](const Location& l) { return geo.contains(l.point()) && geo.region_of(l.point()) == l.region; };
  for (const Request& r : inst.requests)
    if (!fits(r.pickup) || !fits(r.delivery))
      throw UsageError("request " + std::to_string(r.id) + " lies outside the travel model's regions");
  for (const VehicleSpec& v : inst.fleet)
    if (!fits(v.start) || !fits(v.finish))
      throw UsageError("vehicle " + std::to_string(v.id) + " lies outside the travel model's regions");
}

std::string fixed(double v, int prec = 2) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(prec) << v;
  return ss.str();
}

std::string kpi_text(const KpiReport& k) {
  std::ostringstream ss;
  ss << "# crowdroute-kpi " << kResultsVersion << '\n';
  for (const KpiColumn& c : kpi_columns()) ss << c.name << ' ' << fixed(c.get(k), 4) << '\n';
  ss << "crowd_share " << fixed(k.crowd_share(), 4) << '\n';
  return ss.str();
}

int cmd_generate(const RunConfig& cfg, std::ostream& out) {
  TravelTimeModel model = travel_model(cfg);
  Instance inst = make_instance(cfg, model);
  fs::path path(cfg.out);
  if (path.has_parent_path()) prepare_dir(path.parent_path().string());
  write_file(path, serialize_instance(inst));
  fs::path manifest = path;
  manifest += ".manifest.json";
  write_file(manifest, manifest_json(cfg, {path.filename().string()}));
  out << "wrote " << inst.requests.size() << " requests and " << inst.fleet.size() << " vehicles to "
      << path.string() << '\n';
  return ok;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  TravelTimeModel model = travel_model(cfg);
  Instance inst;
  if (!cfg.instance.empty()) {
    std::string text = read_file(cfg.instance);
    inst = parse_instance(text);
    check_fits(inst, model.geography());
  } else {
    inst = make_instance(cfg, model);
  }
  ExperimentPlan plan = cfg.plan();
  Variant v;
  v.name = cfg.policy;
  v.policy = parse_policy(cfg.policy);
  if (cfg.avg_tt) v.planning = TravelMode::average;
  auto policy = make_policy(v, plan, cfg.seed);
  RunOptions opts = run_options(v, plan);
  opts.keep_log = cfg.events;
  DayResult day = run_day(inst, model, *policy, opts);

  const KpiReport& k = day.kpi;
  out << "policy " << policy->name() << ", class " << to_string(inst.instance_class) << ", level "
      << to_string(inst.level) << ", seed " << inst.seed << '\n';
  for (const KpiColumn& c : kpi_columns())
    out << "  " << std::left << std::setw(18) << c.name << std::right << std::setw(12) << fixed(c.get(k))
        << '\n';
  out << "  " << std::left << std::setw(18) << "crowd_share" << std::right << std::setw(12)
      << fixed(k.crowd_share(), 3) << '\n';
  out << "  max decide " << fixed(k.max_decide_ms, 1) << " ms, " << k.over_budget << " over budget\n";

  if (!cfg.out.empty()) {
    fs::path dir = prepare_dir(cfg.out);
    std::vector<std::string> files = {"kpi.txt"};
    write_file(dir / "kpi.txt", kpi_text(k));
    if (cfg.events) {
      std::ostringstream ev;
      write_events(ev, day.log);
      write_file(dir / "events.txt", ev.str());
      files.push_back("events.txt");
    }
    write_file(dir / "manifest.json", manifest_json(cfg, files));
  }
  return ok;
}

int cmd_experiment(const RunConfig& cfg, std::ostream& out) {
  TravelTimeModel model = TravelTimeModel::standard();
  ExperimentPlan plan = cfg.plan();
  ExperimentResult res = run_experiment(plan, model);
  std::ostringstream summary;
  write_summary(summary, res);
  out << summary.str();
  if (!cfg.out.empty()) {
    fs::path dir = prepare_dir(cfg.out);
    std::ostringstream rows;
    write_results(rows, res.rows);
    write_file(dir / "results.csv", rows.str());
    write_file(dir / "summary.txt", summary.str());
    write_file(dir / "manifest.json", manifest_json(cfg, {"results.csv", "summary.txt"}));
  }
  return ok;
}

int cmd_tune(const RunConfig& cfg, std::ostream& out) {
  TravelTimeModel model = TravelTimeModel::standard();
  ExperimentPlan plan = cfg.plan();
  plan.variants.clear();
  TuneResult res = tune(parse_tuned_parameter(cfg.param), cfg.grid, plan, model);
  std::ostringstream table;
  table << "# crowdroute-tune " << kResultsVersion << '\n' << cfg.param << ",mean_total_cost\n";
  for (std::size_t i = 0; i < res.grid.size(); ++i) table << res.grid[i] << ',' << fixed(res.mean_cost[i], 4) << '\n';
  out << table.str() << "best " << cfg.param << " = " << res.best << '\n';
  if (!cfg.out.empty()) {
    fs::path dir = prepare_dir(cfg.out);
    write_file(dir / "tune.csv", table.str());
    write_file(dir / "manifest.json", manifest_json(cfg, {"tune.csv"}));
  }
  return ok;
}

void add_instance_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--class", cfg.instance_class, "instance class: uo, nm, mto, otm")
      ->check(CLI::IsMember({"uo", "nm", "mto", "otm"}));
  sub->add_option("--level", cfg.level, "demand level: low, medium, high")
      ->check(CLI::IsMember({"low", "medium", "high"}));
  sub->add_option("--seed", cfg.seed, "instance seed, or the first replication seed");
}

void add_policy_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--lambda", cfg.lambda, "capacity weight in the assignment score");
  sub->add_option("--eta", cfg.eta, "strategic wait fraction of remaining availability");
  sub->add_option("--gamma", cfg.gamma, "ready-time lookahead in minutes");
  sub->add_option("--phi", cfg.phi, "ALNS location relatedness weight");
  sub->add_option("--chi", cfg.chi, "ALNS time relatedness weight");
  sub->add_option("--removals", cfg.removals, "ALNS requests removed per iteration");
  sub->add_option("--iterations", cfg.iterations, "ALNS iteration limit per epoch");
  sub->add_option("--budget-ms", cfg.budget_ms, "per-epoch decision budget in milliseconds");
  sub->add_flag("--avg-tt", cfg.avg_tt, "plan with average travel times");
  sub->add_flag("--no-strategic-wait", cfg.no_strategic_wait, "operational waits only (eta = 0)");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::string config_path;
  CLI::App app{"crowdroute: dynamic pickup and delivery with dedicated vehicles and crowdshippers"};
  app.set_version_flag("--version", std::string(CROWDROUTE_VERSION));
  app.require_subcommand(1);

  CLI::App* gen = app.add_subcommand("generate", "write one generated day to an instance file");
  add_instance_options(gen, cfg);
  gen->add_option("--out", cfg.out, "instance file to write");
  gen->add_option("--travel-config", cfg.travel_config, "JSON geography and speed profile");

  CLI::App* sim = app.add_subcommand("simulate", "run one day under one policy");
  add_instance_options(sim, cfg);
  add_policy_options(sim, cfg);
  sim->add_option("--instance", cfg.instance, "instance file; generated from --class/--level/--seed if absent");
  sim->add_option("--policy", cfg.policy, "drace or myopic")->check(CLI::IsMember({"drace", "myopic"}));
  sim->add_option("--out", cfg.out, "directory for kpi.txt and manifest.json");
  sim->add_flag("--events", cfg.events, "also write the event log");
  sim->add_option("--travel-config", cfg.travel_config, "JSON geography and speed profile");

  CLI::App* exp = app.add_subcommand("experiment", "paired replications of several policy variants");
  add_instance_options(exp, cfg);
  add_policy_options(exp, cfg);
  exp->add_option("--reps", cfg.reps, "replications");
  exp->add_option("--jobs", cfg.jobs, "worker threads");
  exp->add_option("--compare", cfg.compare,
                  "variants, the first is the baseline: drace, myopic, drace-no-wait, drace-avg-tt")
      ->delimiter(',');
  exp->add_option("--out", cfg.out, "directory for results.csv, summary.txt and manifest.json");

  CLI::App* tun = app.add_subcommand("tune", "grid search over lambda or eta for DRACE");
  add_instance_options(tun, cfg);
  add_policy_options(tun, cfg);
  tun->add_option("--reps", cfg.reps, "replications per grid value");
  tun->add_option("--jobs", cfg.jobs, "worker threads");
  tun->add_option("--param", cfg.param, "lambda or eta")->check(CLI::IsMember({"lambda", "eta"}));
  tun->add_option("--grid", cfg.grid, "comma separated values")->delimiter(',');
  tun->add_option("--out", cfg.out, "directory for tune.csv and manifest.json");

  for (CLI::App* sub : {gen, sim, exp, tun})
    sub->add_option("--config", config_path, "JSON file with the same keys as the long flags");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }

  try {
    for (CLI::App* sub : {gen, sim, exp, tun})
      if (sub->parsed()) cfg.command = sub->get_name();
    if (!config_path.empty()) {
      CLI::App* sub = app.get_subcommands().front();
      std::vector<std::string> given;
      for (const CLI::Option* opt : sub->get_options())
        if (opt->count() > 0 && !opt->get_lnames().empty()) given.push_back(opt->get_lnames().front());
      apply_config(cfg, read_file(config_path), given);
    }
    validate(cfg);
    if (cfg.command == "generate") return cmd_generate(cfg, out);
    if (cfg.command == "simulate") return cmd_simulate(cfg, out);
    if (cfg.command == "experiment") return cmd_experiment(cfg, out);
    return cmd_tune(cfg, out);
  } catch (const std::invalid_argument& e) {
    err << "crowdroute: " << e.what() << '\n';
    return usage;
  } catch (const IoError& e) {
    err << "crowdroute: " << e.what() << '\n';
    return io;
  } catch (const ParseError& e) {
    err << "crowdroute: " << cfg.instance << ": " << e.what() << '\n';
    return io;
  } catch (const ValidationError& e) {
    err << "crowdroute: invalid instance: " << e.what() << '\n';
    return io;
  } catch (const ExperimentError& e) {
    err << "crowdroute: experiment failed at seed " << e.seed() << ": " << e.what() << '\n';
    return runtime;
  } catch (const std::exception& e) {
    err << "crowdroute: " << e.what() << '\n';
    return runtime;
  }
}

}  // namespace crowdroute::cli
