#include "gwshaper/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace gwshaper {

void DelayAccumulator::add(double us) {
  ++count_;
  const double delta = us - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (us - mean_);
  max_ = count_ == 1 ? us : std::max(max_, us);
}

DelayStats DelayAccumulator::stats() const {
  DelayStats s;
  s.count = count_;
  if (count_ == 0) return s;
  s.mean_us = mean_;
  s.stddev_us = std::sqrt(std::max(0.0, m2_ / static_cast<double>(count_)));
  s.max_us = max_;
  return s;
}

double utilization(std::uint64_t total_bytes, std::int64_t link_rate_bps, SimTime duration) {
  if (duration <= SimTime{}) throw std::invalid_argument("utilization needs a positive duration");
  if (link_rate_bps <= 0) throw std::invalid_argument("utilization needs a positive link rate");
  const double u = static_cast<double>(total_bytes) * 8.0 /
                   (static_cast<double>(link_rate_bps) * duration.seconds());
  return std::clamp(u, 0.0, 1.0);
}

DelayStats delay_stats(const BoundReport& bound, std::size_t group) {
  return bound.groups.at(group).delay.stats();
}

std::string format_double(double v) { return fmt::format("{}", v); }

std::string groups_csv(const MetricsReport& report) {
  std::string out = "bound,group,bytes,packets,drops,utilization,mean_delay_us,delay_stddev_us,max_delay_us\n";
  for (const BoundReport* b : {&report.outgoing, &report.incoming}) {
    for (std::size_t g = 0; g < b->groups.size(); ++g) {
      const auto& t = b->groups[g];
      const auto d = t.delay.stats();
      out += fmt::format("{},{},{},{},{},{},{},{},{}\n", to_string(b->direction), b->group_names[g], t.bytes,
                         t.packets, t.drops, format_double(b->utilization), format_double(d.mean_us),
                         format_double(d.stddev_us), format_double(d.max_us));
    }
  }
  return out;
}

std::string flows_csv(const MetricsReport& report) {
  std::string out =
      "flow_id,label,generated,delivered_packets,delivered_bytes,drops,in_flight,mean_delay_us,delay_stddev_us\n";
  for (const auto& f : report.flows) {
    const auto d = f.gateway_delay.stats();
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", f.flow_id, f.label, f.generated, f.delivered_packets,
                       f.delivered_bytes, f.drops, f.in_flight, format_double(d.mean_us),
                       format_double(d.stddev_us));
  }
  return out;
}

std::string timeline_csv(const MetricsReport& report) {
  std::string out = "bound,second,bytes\n";
  for (const BoundReport* b : {&report.outgoing, &report.incoming}) {
    for (std::size_t s = 0; s < b->timeline.size(); ++s) {
      out += fmt::format("{},{},{}\n", to_string(b->direction), s, b->timeline[s]);
    }
  }
  return out;
}

std::string format_report(const MetricsReport& report) {
  std::string out = fmt::format("duration_us {}\n", format_us(report.duration));
  for (const BoundReport* b : {&report.outgoing, &report.incoming}) {
    out += fmt::format("bound {} rate {} shaped {} bytes {} packets {} drops {} utilization {}\n",
                       to_string(b->direction), b->rate_bps, b->shaped ? 1 : 0, b->bytes, b->packets, b->drops,
                       format_double(b->utilization));
  }
  out += groups_csv(report);
  out += flows_csv(report);
  out += timeline_csv(report);
  return out;
}

}  // namespace gwshaper
