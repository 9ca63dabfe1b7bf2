#ifndef GWSHAPER_ENGINE_HPP
#define GWSHAPER_ENGINE_HPP

// Gateway shaping pipeline: classifier -> per-group FIFO queues ->
// deficit-round-robin scheduler -> FIFO transmission queue.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "gwshaper/policy.hpp"
#include "gwshaper/types.hpp"

namespace gwshaper {

struct Packet {
  Ipv4Address src_addr;
  Ipv4Address dst_addr;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  Protocol protocol = Protocol::tcp;
  std::uint32_t size = kMaxFrameBytes;
  std::uint64_t flow_id = 0;
  /// Unique per simulation; lets traces pair enqueue and departure records.
  std::uint64_t id = 0;
  SimTime created_at;
  SimTime enqueued_at;

  static constexpr bool valid_size(std::uint32_t bytes) {
    return bytes >= kMinFrameBytes && bytes <= kMaxFrameBytes;
  }
};

/// Port identifying the application on the server side: the smaller of the
/// two when both are well known, else whichever one is below 1024.
std::optional<std::uint16_t> server_side_port(const Packet& pkt);

bool rule_matches(const MatchRule& rule, const Packet& pkt, Direction direction);

/// Index of the group owning the first matching rule, or the default group.
/// Address rules look at the LAN-side host: the source address on the
/// outgoing bound, the destination address on the incoming bound. `dst`
/// rules look at the opposite end.
std::size_t classify(const Packet& pkt, const ValidatedPolicy& policy, Direction direction);

class GroupQueue {
 public:
  GroupQueue(std::size_t group_index, std::size_t capacity)
      : group_index_(group_index), capacity_(capacity) {}

  /// Tail drop: returns false and counts a drop when full.
  bool push(Packet pkt);
  Packet pop();
  const Packet& front() const { return slots_.front(); }
  bool empty() const { return slots_.empty(); }
  std::size_t size() const { return slots_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t group_index() const { return group_index_; }
  std::uint64_t drops() const { return drops_; }
  const std::deque<Packet>& slots() const { return slots_; }

 private:
  std::size_t group_index_;
  std::size_t capacity_;
  std::deque<Packet> slots_;
  std::uint64_t drops_ = 0;
};

struct SchedulerState {
  std::vector<std::int64_t> deficits;
  std::vector<std::int64_t> quanta;
  std::size_t round_cursor = 0;
  /// True once the group under the cursor has been credited its quantum for
  /// the current visit.
  bool visit_credited = false;
};

struct EngineConfig {
  std::size_t queue_capacity = 100;
  std::size_t tx_depth = 2;
  /// Bytes of quantum per share percent. Raised automatically when the
  /// smallest share would otherwise get a quantum below one MTU.
  std::int64_t quantum_unit = 150;
  Direction direction = Direction::outgoing;
};

/// Effective quantum unit for a policy: max(requested, ceil(1500 / min share)).
std::int64_t effective_quantum_unit(const ValidatedPolicy& policy, std::int64_t requested);

enum class EnqueueStatus : std::uint8_t { accepted, dropped };

struct EnqueueResult {
  EnqueueStatus status;
  std::size_t group;

  bool accepted() const { return status == EnqueueStatus::accepted; }
};

struct GroupCounters {
  std::uint64_t enqueued = 0;  // every arrival, accepted or not
  std::uint64_t dequeued = 0;  // moved from the group queue by the scheduler
  std::uint64_t dropped = 0;
  std::uint64_t bytes_out = 0;
  std::size_t queue_len = 0;

  bool operator==(const GroupCounters&) const = default;
};

struct CounterSnapshot {
  std::vector<GroupCounters> groups;
  std::size_t tx_queue_len = 0;
};

class ShapingEngine {
 public:
  explicit ShapingEngine(ValidatedPolicy policy, EngineConfig config = {});

  EnqueueResult enqueue(Packet pkt, SimTime now);

  /// One deficit-round-robin decision. Removes and returns the chosen head
  /// packet; nullopt only when every group queue is empty.
  std::optional<Packet> select_next(SimTime now);

  /// Head of the transmission queue, refilling it from the scheduler so it
  /// stays `tx_depth` deep while the group queues have packets.
  std::optional<Packet> pop_for_wire(SimTime now);

  CounterSnapshot snapshot_counters() const;

  bool has_packets() const { return !tx_queue_.empty() || backlogged_ > 0; }
  std::size_t tx_queue_size() const { return tx_queue_.size(); }
  const std::deque<Packet>& tx_queue() const { return tx_queue_; }
  const std::vector<GroupQueue>& queues() const { return queues_; }
  const SchedulerState& scheduler() const { return scheduler_; }
  const ValidatedPolicy& policy() const { return policy_; }
  const EngineConfig& config() const { return config_; }

 private:
  void top_up(SimTime now);
  void advance_cursor();

  ValidatedPolicy policy_;
  EngineConfig config_;
  std::vector<GroupQueue> queues_;
  SchedulerState scheduler_;
  std::deque<Packet> tx_queue_;
  std::vector<GroupCounters> counters_;
  std::size_t backlogged_ = 0;  // packets across all group queues
};

}  // namespace gwshaper

#endif  // GWSHAPER_ENGINE_HPP
