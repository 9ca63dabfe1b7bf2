// gwshaper: run canned experiments, check policy files, simulate scenarios.
//
// Exit status: 0 success, 1 validation error, 2 I/O error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "gwshaper/experiments.hpp"
#include "gwshaper/netsim.hpp"
#include "gwshaper/policy.hpp"
#include "gwshaper/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace gwshaper;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kIoError = 2;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(fmt::format("error reading {}", path.string()));
  return ss.str();
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
}

int cmd_validate(const std::string& policy_path) {
  const auto text = read_file(policy_path);
  PolicyConfig cfg;
  try {
    cfg = parse_policy(text);
  } catch (const PolicyParseError& e) {
    fmt::print(stderr, "{}: {}\n", policy_path, e.what());
    return kInvalid;
  }
  const auto out = validate_policy(cfg);
  if (!out.ok()) {
    for (const auto& e : out.errors) fmt::print(stderr, "{}: {}\n", policy_path, e);
    return kInvalid;
  }
  const auto& p = *out.policy;
  fmt::print("{}: ok, {} groups, {} rules, method {}, default {}\n", policy_path, p.group_count(),
             p.rule_table().size(), to_string(p.grouping_method()), p.group_name(p.default_group()));
  for (std::size_t g = 0; g < p.group_count(); ++g) {
    fmt::print("  {:<16} {:>3}%\n", p.group_name(g), p.share_percent(g));
  }
  return kOk;
}

int cmd_simulate(const std::string& scenario_path, const fs::path& out_dir) {
  const auto text = read_file(scenario_path);
  Scenario scenario;
  try {
    scenario = parse_scenario(text);
  } catch (const ScenarioParseError& e) {
    fmt::print(stderr, "{}: {}\n", scenario_path, e.what());
    return kInvalid;
  }
  if (const auto errors = validate_scenario(scenario); !errors.empty()) {
    for (const auto& e : errors) fmt::print(stderr, "{}: {}\n", scenario_path, e);
    return kInvalid;
  }
  const auto result = run_with_trace(scenario);
  make_dir(out_dir);
  write_text_file(out_dir / "report.csv", groups_csv(result.report));
  write_text_file(out_dir / "flows.csv", flows_csv(result.report));
  write_text_file(out_dir / "timeline.csv", timeline_csv(result.report));
  write_text_file(out_dir / "trace.csv", trace_csv(result.trace));
  fmt::print("scenario {} digest {}\n", scenario_path, scenario_digest(scenario));
  for (const auto* b : {&result.report.outgoing, &result.report.incoming}) {
    fmt::print("{:<8} {} bytes, {} drops, utilization {}{}\n", to_string(b->direction), b->bytes, b->drops,
               format_double(b->utilization), b->shaped ? " (shaped)" : "");
  }
  fmt::print("wrote {}\n", out_dir.string());
  return kOk;
}

int cmd_run(int id, std::uint64_t seed, const std::string& out_dir, const std::vector<std::string>& sets) {
  Overrides overrides;
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      fmt::print(stderr, "--set expects key=value, got '{}'\n", kv);
      return kInvalid;
    }
    overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  if (!out_dir.empty()) make_dir(out_dir);
  ExperimentResult result;
  try {
    result = run_experiment(id, overrides, seed);
  } catch (const ExperimentError& e) {
    fmt::print(stderr, "{}\n", e.what());
    return kInvalid;
  }

  fmt::print("experiment {} seed {}\n", id, seed);
  fmt::print("{:<16} {:>12} {:>10} {:>10} {:>10}\n", "label", "bytes", "util", "baseline", "delta");
  for (const auto& c : compare_utilization(result)) {
    fmt::print("{:<16} {:>12} {:>10.5f} {:>10.5f} {:>+10.5f}\n", c.label, c.bytes, c.utilization,
               c.baseline_utilization, c.delta);
  }
  if (!out_dir.empty()) {
    const fs::path dir(out_dir);
    emit_csv(result, dir / fmt::format("exp{}.csv", id));
    emit_plot_data(result, dir / fmt::format("exp{}.dat", id));
    fmt::print("wrote {}\n", (dir / fmt::format("exp{}.csv", id)).string());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gateway bandwidth shaping: experiments, policy checks and scenario simulation"};
  app.require_subcommand(1);

  int experiment = 0;
  std::uint64_t seed = 1;
  std::string run_out;
  std::vector<std::string> sets;
  auto* run_cmd = app.add_subcommand("run", "Run one of the canned experiments");
  run_cmd->add_option("--experiment", experiment, "Experiment id (1-4)")->required();
  run_cmd->add_option("--seed", seed, "Top-level seed");
  run_cmd->add_option("--out", run_out, "Directory for exp<N>.csv and exp<N>.dat");
  run_cmd->add_option("--set", sets, "Parameter override key=value (repeatable)");

  std::string policy_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a policy file");
  validate_cmd->add_option("--policy", policy_path, "Policy file")->required();

  std::string scenario_path;
  std::string sim_out;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a scenario file");
  simulate_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
  simulate_cmd->add_option("--out", sim_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*run_cmd) return cmd_run(experiment, seed, run_out, sets);
    if (*validate_cmd) return cmd_validate(policy_path);
    if (*simulate_cmd) return cmd_simulate(scenario_path, sim_out);
  } catch (const IoError& e) {
    fmt::print(stderr, "{}\n", e.what());
    return kIoError;
  } catch (const std::system_error& e) {
    fmt::print(stderr, "{}\n", e.what());
    return kIoError;
  }
  return kInvalid;
}
