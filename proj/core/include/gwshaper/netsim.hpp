#ifndef GWSHAPER_NETSIM_HPP
#define GWSHAPER_NETSIM_HPP

// Discrete-event model of a small office testbed: LAN stations and one
// Internet-side server, all attached to a gateway. The gateway has two egress
// links, one per bound:
//
//   station_i --access--> gateway --wan_rate (outgoing bound)--> server
//   server    --access--> gateway --lan_rate (incoming bound)--> station_i
//
// The shaping engine runs on at most one of the two bounds. When it does,
// the bound's forwarding context spends `classify_cost` on every arriving
// packet before enqueueing it, and cannot transmit while classifying.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwshaper/engine.hpp"
#include "gwshaper/metrics.hpp"
#include "gwshaper/policy.hpp"
#include "gwshaper/types.hpp"

namespace gwshaper {

enum class Placement : std::uint8_t { outgoing_bound, incoming_bound, disabled };
enum class SourceKind : std::uint8_t { bulk, request_response };

std::string_view to_string(Placement p);
std::string_view to_string(SourceKind k);

struct Host {
  std::string name;
  Ipv4Address address;

  bool operator==(const Host&) const = default;
};

struct SourceSpec {
  SourceKind kind = SourceKind::bulk;
  std::string station;  // originator of the data (bulk) or of requests
  std::string peer;
  std::uint16_t port = 21;  // application port on the server end
  Protocol protocol = Protocol::tcp;
  std::uint32_t packet_size = kMaxFrameBytes;
  std::uint32_t request_size = 200;
  std::uint32_t response_size = 10 * kMaxFrameBytes;
  SimTime response_delay = SimTime::from_ms(1);
  /// Bulk only: packets released but not yet out of the gateway.
  std::uint32_t window = 8;
  SimTime start_at;
  SimTime stop_at = SimTime::max();

  bool operator==(const SourceSpec&) const = default;
};

struct Scenario {
  std::vector<Host> stations;
  Host server{"server", Ipv4Address(10, 0, 1, 1)};
  std::vector<SourceSpec> sources;
  std::int64_t lan_rate = 10'000'000;
  std::int64_t wan_rate = 10'000'000;
  /// Host-to-gateway links; faster than either egress so the gateway queue
  /// is the bottleneck.
  std::int64_t access_rate = 100'000'000;
  Placement placement = Placement::disabled;
  /// Required when shaping. With shaping disabled it is still used to
  /// attribute sniffed packets to groups.
  std::optional<ValidatedPolicy> policy;
  SimTime classify_cost = SimTime::from_us(5);
  SimTime duration = SimTime::from_seconds(10);
  std::uint64_t seed = 1;
  std::size_t queue_capacity = 100;
  std::size_t tx_depth = 2;
  std::int64_t quantum_unit = 150;
  /// Upper bound of the uniform random offset added to source start times
  /// and server response delays.
  SimTime jitter;
  /// Gateway bound recorded by the sniffer; defaults to the shaped bound,
  /// or outgoing when shaping is disabled.
  std::optional<Direction> trace_bound;

  Direction sniffed_bound() const;
  bool operator==(const Scenario&) const = default;
};

/// Empty when the scenario can run.
std::vector<std::string> validate_scenario(const Scenario& scenario);

class ScenarioError : public std::invalid_argument {
 public:
  explicit ScenarioError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

enum class EventKind : std::uint8_t { enqueue, drop, wire_depart, wire_arrive };
std::string_view to_string(EventKind k);

struct EventRecord {
  SimTime time;
  EventKind kind = EventKind::enqueue;
  std::size_t link = 0;
  std::uint64_t flow_id = 0;
  std::uint64_t packet_id = 0;
  std::optional<std::size_t> group;  // set on gateway links only
  std::uint32_t size = 0;

  bool operator==(const EventRecord&) const = default;
};

inline constexpr std::size_t kOutgoingLink = 0;
inline constexpr std::size_t kIncomingLink = 1;
inline constexpr std::size_t kServerUplink = 2;
/// Uplink of station i is link kFirstStationUplink + i.
inline constexpr std::size_t kFirstStationUplink = 3;

constexpr std::size_t gateway_link(Direction d) {
  return d == Direction::outgoing ? kOutgoingLink : kIncomingLink;
}

/// time_us,kind,flow_id,group,size
std::string trace_csv(const std::vector<EventRecord>& trace);

class Simulation {
 public:
  /// Throws ScenarioError when validate_scenario reports problems.
  explicit Simulation(Scenario scenario);

  /// Processes the earliest pending event (ties in scheduling order) and
  /// returns the record it produced. nullopt once the queue is empty or the
  /// next event lies beyond the scenario duration.
  std::optional<EventRecord> advance();
  void run_to_end();

  SimTime now() const { return now_; }
  bool finished() const { return finished_; }
  MetricsReport report() const;
  /// Records on the sniffed gateway link, in time order.
  const std::vector<EventRecord>& trace() const { return trace_; }
  const Scenario& scenario() const { return scenario_; }
  std::size_t link_count() const { return links_.size(); }
  const std::string& link_name(std::size_t link) const { return links_.at(link).name; }
  std::int64_t link_rate(std::size_t link) const { return links_.at(link).rate_bps; }

 private:
  enum class EventType : std::uint8_t { emit, forward, classify_done, tx_start, tx_end };
  enum class EmitKind : std::uint8_t { data, request, response };

  struct Event {
    SimTime time;
    std::uint64_t seq = 0;
    EventType type = EventType::emit;
    std::size_t target = 0;  // link index, or source index for emit
    EmitKind emit_kind = EmitKind::data;
    std::uint32_t size = 0;  // emit only
    Packet packet;           // forward only
  };
  struct EventLater {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };

  struct Link {
    std::string name;
    std::int64_t rate_bps = 0;
    std::optional<Direction> bound;  // gateway egress; host uplinks lead to the gateway
    std::size_t capacity = SIZE_MAX;
    std::deque<Packet> fifo;
    std::optional<ShapingEngine> engine;
    std::deque<Packet> classify_pending;
    std::optional<Packet> classifying;
    std::optional<Packet> on_wire;
    bool busy = false;
  };

  struct SourceState {
    SourceSpec spec;
    std::size_t origin = 0;  // host index
    std::size_t peer = 0;
    std::uint16_t ephemeral_port = 0;
    std::uint64_t generated = 0;
    std::uint64_t delivered_packets = 0;
    std::uint64_t delivered_bytes = 0;
    std::uint64_t drops = 0;
    DelayAccumulator gateway_delay;
    std::uint32_t response_packets = 0;
    std::uint32_t response_settled = 0;
  };

  struct BoundStats {
    std::vector<TrafficStats> groups;
    std::vector<std::uint64_t> timeline;
  };

  void schedule(Event ev);
  void schedule_emit(SimTime at, std::size_t source, EmitKind kind, std::uint32_t size);
  void kick(std::size_t link);
  void arrive_at_gateway(Packet pkt, SimTime now);
  void leave_gateway(std::size_t link, const Packet& pkt, SimTime now);
  void settle_at_gateway(const Packet& pkt, SimTime now, bool dropped);
  void deliver(std::size_t host, const Packet& pkt, SimTime now);
  void schedule_response(std::size_t source, SimTime now);
  Packet make_packet(std::size_t source, EmitKind kind, std::uint32_t size, SimTime now);
  std::size_t host_uplink(std::size_t host) const;
  std::size_t server_host() const { return scenario_.stations.size(); }
  const Host& host(std::size_t h) const;
  std::optional<std::size_t> host_by_address(Ipv4Address a) const;
  std::optional<std::size_t> group_of(const Packet& pkt, std::size_t link) const;
  SimTime draw_jitter();
  EventRecord record(EventKind kind, std::size_t link, const Packet& pkt);

  Scenario scenario_;
  std::vector<Link> links_;
  std::vector<SourceState> sources_;
  BoundStats bound_stats_[2];
  std::vector<Event> events_;  // binary heap ordered by EventLater
  std::uint64_t next_seq_ = 0;
  std::uint64_t next_packet_id_ = 0;
  SimTime now_;
  bool finished_ = false;
  std::mt19937_64 rng_;
  std::size_t sniffed_link_ = kOutgoingLink;
  std::vector<EventRecord> trace_;
};

/// Runs to the end of the scenario duration.
MetricsReport run(const Scenario& scenario);

struct RunOutput {
  MetricsReport report;
  std::vector<EventRecord> trace;
};
RunOutput run_with_trace(const Scenario& scenario);

}  // namespace gwshaper

#endif  // GWSHAPER_NETSIM_HPP
