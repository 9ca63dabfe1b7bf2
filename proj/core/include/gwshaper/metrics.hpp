#ifndef GWSHAPER_METRICS_HPP
#define GWSHAPER_METRICS_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gwshaper/types.hpp"

namespace gwshaper {

/// Empty statistics (count == 0) report zero for every moment.
struct DelayStats {
  std::uint64_t count = 0;
  double mean_us = 0.0;
  double stddev_us = 0.0;
  double max_us = 0.0;

  bool empty() const { return count == 0; }
  bool operator==(const DelayStats&) const = default;
};

/// Streaming mean/variance (Welford). Population standard deviation.
class DelayAccumulator {
 public:
  void add(double us);
  DelayStats stats() const;
  std::uint64_t count() const { return count_; }

  bool operator==(const DelayAccumulator&) const = default;

 private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double max_ = 0.0;
};

struct TrafficStats {
  std::uint64_t bytes = 0;
  std::uint64_t packets = 0;
  std::uint64_t drops = 0;
  DelayAccumulator delay;  // wire departure minus enqueue, per packet

  bool operator==(const TrafficStats&) const = default;
};

/// What the sniffer saw on one gateway egress link.
struct BoundReport {
  Direction direction = Direction::outgoing;
  std::int64_t rate_bps = 0;
  bool shaped = false;
  std::vector<std::string> group_names;
  std::vector<TrafficStats> groups;
  std::uint64_t bytes = 0;
  std::uint64_t packets = 0;
  std::uint64_t drops = 0;
  double utilization = 0.0;
  std::vector<std::uint64_t> timeline;  // bytes per simulated second

  bool operator==(const BoundReport&) const = default;
};

struct FlowReport {
  std::uint64_t flow_id = 0;
  std::string label;
  std::uint64_t generated = 0;
  std::uint64_t delivered_packets = 0;
  std::uint64_t delivered_bytes = 0;
  std::uint64_t drops = 0;
  std::uint64_t in_flight = 0;
  DelayAccumulator gateway_delay;

  bool operator==(const FlowReport&) const = default;
};

struct MetricsReport {
  SimTime duration;
  BoundReport outgoing;
  BoundReport incoming;
  std::vector<FlowReport> flows;

  const BoundReport& bound(Direction d) const { return d == Direction::outgoing ? outgoing : incoming; }
  BoundReport& bound(Direction d) { return d == Direction::outgoing ? outgoing : incoming; }

  bool operator==(const MetricsReport&) const = default;
};

/// total_bytes * 8 / (link_rate * duration), clamped to [0, 1].
/// Throws std::invalid_argument for a non-positive duration or rate.
double utilization(std::uint64_t total_bytes, std::int64_t link_rate_bps, SimTime duration);
inline double utilization(const BoundReport& bound, SimTime duration) {
  return utilization(bound.bytes, bound.rate_bps, duration);
}

/// Throws std::out_of_range for an unknown group index.
DelayStats delay_stats(const BoundReport& bound, std::size_t group);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

/// Per-group rows for both bounds:
/// bound,group,bytes,packets,drops,utilization,mean_delay_us,delay_stddev_us,max_delay_us
std::string groups_csv(const MetricsReport& report);
/// flow_id,label,generated,delivered_packets,delivered_bytes,drops,in_flight,mean_delay_us,delay_stddev_us
std::string flows_csv(const MetricsReport& report);
/// bound,second,bytes
std::string timeline_csv(const MetricsReport& report);
/// Every field of the report in a stable textual layout.
std::string format_report(const MetricsReport& report);

}  // namespace gwshaper

#endif  // GWSHAPER_METRICS_HPP
