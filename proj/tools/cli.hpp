#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdroute/harness.hpp"

namespace crowdroute::cli {

enum ExitCode { ok = 0, usage = 2, io = 3, runtime = 4 };

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string instance_class = "nm";
  std::string level = "low";
  std::uint64_t seed = 1;
  int reps = 20;
  std::string policy = "drace";
  double lambda = 0.05;
  double eta = 0.20;
  double gamma = 45.0;
  double phi = 9.0;
  double chi = 3.0;
  int removals = 4;
  int iterations = 200;
  double budget_ms = 2000.0;
  bool avg_tt = false;
  bool no_strategic_wait = false;
  int jobs = 1;
  std::string out;
  std::string instance;
  std::vector<std::string> compare = {"drace", "myopic"};
  std::string param = "lambda";
  std::vector<double> grid;
  std::string travel_config;
  bool events = false;

  CostConfig cost() const;
  AlnsConfig alns() const;
  ExperimentPlan plan() const;
};

// keys accepted in a --config JSON file, per command
const std::vector<std::string>& config_keys(const std::string& command);
// applies a JSON object onto cfg; keys listed in skip are left alone
void apply_config(RunConfig& cfg, const std::string& json_text, const std::vector<std::string>& skip);
std::string manifest_json(const RunConfig& cfg, const std::vector<std::string>& outputs);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace crowdroute::cli
