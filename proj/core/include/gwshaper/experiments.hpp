#ifndef GWSHAPER_EXPERIMENTS_HPP
#define GWSHAPER_EXPERIMENTS_HPP

// Canned testbed experiments:
//   1  two stations, groups by address, share X swept, shaped on each bound
//   2  web vs ftp, groups by port, same sweep
//   3  web fixed at 50%, ftp sessions added one at a time, outgoing bound
//   4  experiment 1 on the outgoing bound at a wireless effective rate
// Every experiment also runs a baseline with shaping disabled.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwshaper/metrics.hpp"
#include "gwshaper/netsim.hpp"

namespace gwshaper {

class ExperimentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentParams {
  std::vector<int> x_values{50, 60, 70, 80, 90};
  std::vector<int> ftp_sessions{1, 2, 3, 4};
  int web_share = 50;
  double duration_s = 30.0;
  double classify_cost_us = 5.0;
  std::int64_t lan_rate = 10'000'000;
  std::int64_t wan_rate = 10'000'000;
  std::int64_t access_rate = 100'000'000;
  std::int64_t wireless_rate = 5'000'000;
  std::size_t queue_capacity = 100;
  std::size_t tx_depth = 2;
  std::uint32_t window = 8;
  double jitter_us = 500.0;
  std::uint64_t seed = 1;
};

using Overrides = std::map<std::string, std::string>;

/// Recognised keys: X, k, web_share, duration, classify_cost, lan_rate,
/// wan_rate, access_rate, wireless_rate, queue_capacity, tx_depth, window,
/// jitter. List values are comma separated. Throws ExperimentError.
ExperimentParams apply_overrides(ExperimentParams params, const Overrides& overrides);

/// Testbed building blocks, exposed for tests and ad-hoc runs.
Scenario address_grouping_scenario(const ExperimentParams& p, int x, Placement placement);
Scenario application_grouping_scenario(const ExperimentParams& p, int x, Placement placement);
Scenario qos_load_scenario(const ExperimentParams& p, int ftp_sessions, Placement placement);
Scenario wireless_scenario(const ExperimentParams& p, int x, Placement placement);

struct Variant {
  std::string label;
  /// Gateway bound whose numbers this variant reports.
  Direction bound = Direction::outgoing;
  std::string digest;
  Scenario scenario;
  MetricsReport report;
};

struct ExperimentResult {
  int id = 0;
  std::vector<Variant> variants;  // sorted by label
  std::optional<Variant> baseline;
};

/// Pure function of (id, overrides, seed). Variants run concurrently and are
/// merged in label order. Throws ExperimentError for an unknown id or key.
ExperimentResult run_experiment(int id, const Overrides& overrides = {}, std::uint64_t seed = 1);

struct UtilizationComparison {
  std::string label;
  std::uint64_t bytes = 0;
  double utilization = 0.0;
  double baseline_utilization = 0.0;
  double delta = 0.0;  // utilization - baseline_utilization
};

/// Throws ExperimentError when the result has no baseline.
std::vector<UtilizationComparison> compare_utilization(const ExperimentResult& result);

struct CsvRow {
  int experiment = 0;
  std::string label;
  std::string group;
  std::uint64_t bytes = 0;
  std::uint64_t packets = 0;
  std::uint64_t drops = 0;
  double utilization = 0.0;
  double mean_delay_us = 0.0;
  double delay_stddev_us = 0.0;

  bool operator==(const CsvRow&) const = default;
};

inline constexpr std::string_view kExperimentCsvHeader =
    "experiment,label,group,bytes,packets,drops,utilization,mean_delay_us,delay_stddev_us";

/// One row per (variant, group) of the variant's reported bound, baseline
/// included, sorted by label then group order.
std::string experiment_csv(const ExperimentResult& result);
std::vector<CsvRow> parse_experiment_csv(std::string_view text);
/// Columns: index, utilization, baseline, delta, quoted label.
std::string experiment_plot_data(const ExperimentResult& result);

/// Write to `path`; throw std::system_error on I/O failure.
void emit_csv(const ExperimentResult& result, const std::filesystem::path& path);
void emit_plot_data(const ExperimentResult& result, const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace gwshaper

#endif  // GWSHAPER_EXPERIMENTS_HPP
