#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"

namespace fs = std::filesystem;
using namespace crowdroute;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run invoke(std::initializer_list<std::string> args) {
  std::vector<std::string> store = {"crowdroute"};
  store.insert(store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : store) argv.push_back(s.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("crowdroute-cli-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(invoke({}).code == cli::usage);
  CHECK(invoke({"simulate", "--bogus"}).code == cli::usage);
  CHECK(invoke({"simulate", "--class", "zz"}).code == cli::usage);
  CHECK(invoke({"simulate", "--policy", "greedy"}).code == cli::usage);
  CHECK(invoke({"tune", "--reps", "1"}).code == cli::usage);
  CHECK(invoke({"tune", "--param", "mu", "--grid", "1"}).code == cli::usage);
  Run r = invoke({"experiment", "--compare", "drace,teleport", "--reps", "1"});
  CHECK(r.code == cli::usage);
  CHECK(r.err.rfind("crowdroute: ", 0) == 0);
  CHECK(invoke({"--help"}).code == cli::ok);
}

TEST_CASE("io errors exit with 3") {
  CHECK(invoke({"simulate", "--instance", "/nonexistent/day.txt"}).code == cli::io);
  CHECK(invoke({"simulate", "--travel-config", "/nonexistent/speeds.json"}).code == cli::io);
  CHECK(invoke({"generate", "--config", "/nonexistent/run.json"}).code == cli::io);
}

TEST_CASE("generate then simulate") {
  TempDir tmp;
  Run g = invoke({"generate", "--class", "nm", "--level", "low", "--seed", "3", "--out", tmp / "day.txt"});
  REQUIRE(g.code == cli::ok);
  CHECK(load_instance(tmp / "day.txt") == generate_instance(InstanceClass::nm, DemandLevel::low, 3));
  std::string manifest = slurp(tmp / "day.txt.manifest.json");
  CHECK(manifest.find("\"version\"") != std::string::npos);
  CHECK(manifest.find("\"generate\"") != std::string::npos);

  Run a = invoke({"simulate", "--instance", tmp / "day.txt", "--policy", "drace", "--out", tmp / "a", "--events"});
  REQUIRE(a.code == cli::ok);
  CHECK(a.out.find("total_cost") != std::string::npos);
  CHECK(fs::exists(tmp / "a/events.txt"));
  Run b = invoke({"simulate", "--instance", tmp / "day.txt", "--policy", "drace", "--out", tmp / "b"});
  REQUIRE(b.code == cli::ok);
  CHECK(slurp(tmp / "a/kpi.txt") == slurp(tmp / "b/kpi.txt"));
  CHECK(slurp(tmp / "a/kpi.txt").rfind("# crowdroute-kpi 1", 0) == 0);
  // same day generated on the fly
  Run c = invoke({"simulate", "--class", "nm", "--level", "low", "--seed", "3", "--out", tmp / "c"});
  REQUIRE(c.code == cli::ok);
  CHECK(slurp(tmp / "c/kpi.txt") == slurp(tmp / "a/kpi.txt"));

  std::ofstream(tmp / "broken.txt") << "not an instance\n";
  CHECK(invoke({"simulate", "--instance", tmp / "broken.txt"}).code == cli::io);
}

TEST_CASE("config files fill in flags the command line leaves out") {
  TempDir tmp;
  std::ofstream(tmp / "run.json") << R"({"class": "uo", "seed": 4, "level": "medium"})";
  REQUIRE(invoke({"generate", "--config", tmp / "run.json", "--out", tmp / "x.txt"}).code == cli::ok);
  Instance x = load_instance(tmp / "x.txt");
  CHECK(x.instance_class == InstanceClass::uo);
  CHECK(x.seed == 4u);
  CHECK(x.level == DemandLevel::medium);

  REQUIRE(invoke({"generate", "--config", tmp / "run.json", "--seed", "5", "--out", tmp / "y.txt"}).code == cli::ok);
  CHECK(load_instance(tmp / "y.txt").seed == 5u);

  std::ofstream(tmp / "bad.json") << R"({"colour": "red"})";
  CHECK(invoke({"generate", "--config", tmp / "bad.json", "--out", tmp / "z.txt"}).code == cli::usage);
  std::ofstream(tmp / "typed.json") << R"({"seed": "four"})";
  CHECK(invoke({"generate", "--config", tmp / "typed.json", "--out", tmp / "z.txt"}).code == cli::usage);
  std::ofstream(tmp / "sim.json") << R"({"policy": "drace"})";
  CHECK(invoke({"generate", "--config", tmp / "sim.json", "--out", tmp / "z.txt"}).code == cli::usage);
}

TEST_CASE("experiment and tune write their tables") {
  TempDir tmp;
  Run e = invoke({"experiment", "--class", "nm", "--level", "low", "--reps", "2", "--compare", "drace,drace-no-wait",
               "--out", tmp / "exp"});
  REQUIRE(e.code == cli::ok);
  CHECK(e.out.find("drace-no-wait") != std::string::npos);
  std::ifstream rows(tmp / "exp/results.csv");
  CHECK(read_results(rows).size() == 4u);
  CHECK(fs::exists(tmp / "exp/summary.txt"));

  Run t = invoke({"tune", "--param", "lambda", "--grid", "0,0.05", "--reps", "1", "--out", tmp / "tune"});
  REQUIRE(t.code == cli::ok);
  CHECK(t.out.find("best lambda = ") != std::string::npos);
  CHECK(slurp(tmp / "tune/tune.csv").rfind("# crowdroute-tune 1", 0) == 0);
}

TEST_CASE("run config maps onto the library settings") {
  cli::RunConfig cfg;
  cfg.no_strategic_wait = true;
  cfg.avg_tt = true;
  cfg.lambda = 0.1;
  CHECK(cfg.cost().wait_fraction == 0.0);
  CHECK(cfg.cost().capacity_weight == 0.1);
  CHECK(cfg.alns().travel == TravelMode::average);
  std::string m = cli::manifest_json(cfg, {"kpi.txt"});
  CHECK(m.find("\"kpi.txt\"") != std::string::npos);
}
