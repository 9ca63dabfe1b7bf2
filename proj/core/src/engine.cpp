#include "gwshaper/engine.hpp"

#include <algorithm>
#include <stdexcept>

namespace gwshaper {

bool GroupQueue::push(Packet pkt) {
  if (slots_.size() >= capacity_) {
    ++drops_;
    return false;
  }
  slots_.push_back(pkt);
  return true;
}

Packet GroupQueue::pop() {
  Packet pkt = slots_.front();
  slots_.pop_front();
  return pkt;
}

std::int64_t effective_quantum_unit(const ValidatedPolicy& policy, std::int64_t requested) {
  int min_share = 100;
  for (const auto& g : policy.groups()) min_share = std::min(min_share, g.share_percent);
  const std::int64_t floor_unit = (kMaxFrameBytes + min_share - 1) / min_share;
  return std::max(requested, floor_unit);
}

ShapingEngine::ShapingEngine(ValidatedPolicy policy, EngineConfig config)
    : policy_(std::move(policy)), config_(config) {
  if (config_.queue_capacity == 0) throw std::invalid_argument("queue capacity must be positive");
  if (config_.tx_depth == 0) throw std::invalid_argument("transmission queue depth must be positive");
  if (config_.quantum_unit <= 0) throw std::invalid_argument("quantum unit must be positive");
  config_.quantum_unit = effective_quantum_unit(policy_, config_.quantum_unit);

  const std::size_t n = policy_.group_count();
  queues_.reserve(n);
  for (std::size_t g = 0; g < n; ++g) {
    queues_.emplace_back(g, config_.queue_capacity);
    scheduler_.quanta.push_back(policy_.share_percent(g) * config_.quantum_unit);
  }
  scheduler_.deficits.assign(n, 0);
  counters_.assign(n, GroupCounters{});
}

EnqueueResult ShapingEngine::enqueue(Packet pkt, SimTime now) {
  const std::size_t g = classify(pkt, policy_, config_.direction);
  auto& c = counters_[g];
  ++c.enqueued;
  pkt.enqueued_at = now;
  if (!queues_[g].push(pkt)) {
    ++c.dropped;
    return {EnqueueStatus::dropped, g};
  }
  ++backlogged_;
  return {EnqueueStatus::accepted, g};
}

void ShapingEngine::advance_cursor() {
  scheduler_.round_cursor = (scheduler_.round_cursor + 1) % queues_.size();
  scheduler_.visit_credited = false;
}

std::optional<Packet> ShapingEngine::select_next(SimTime /*now*/) {
  if (backlogged_ == 0) return std::nullopt;
  auto& s = scheduler_;
  // Terminates within one round: some queue is non-empty and every quantum
  // covers a maximum-size frame.
  for (;;) {
    const std::size_t g = s.round_cursor;
    auto& q = queues_[g];
    if (q.empty()) {
      s.deficits[g] = 0;
      advance_cursor();
      continue;
    }
    if (!s.visit_credited) {
      s.deficits[g] += s.quanta[g];
      s.visit_credited = true;
    }
    if (s.deficits[g] >= static_cast<std::int64_t>(q.front().size)) {
      Packet pkt = q.pop();
      --backlogged_;
      s.deficits[g] -= pkt.size;
      if (q.empty()) s.deficits[g] = 0;
      ++counters_[g].dequeued;
      counters_[g].bytes_out += pkt.size;
      return pkt;
    }
    advance_cursor();
  }
}

void ShapingEngine::top_up(SimTime now) {
  while (tx_queue_.size() < config_.tx_depth) {
    auto pkt = select_next(now);
    if (!pkt) break;
    tx_queue_.push_back(*pkt);
  }
}

std::optional<Packet> ShapingEngine::pop_for_wire(SimTime now) {
  top_up(now);
  if (tx_queue_.empty()) return std::nullopt;
  Packet head = tx_queue_.front();
  tx_queue_.pop_front();
  top_up(now);
  return head;
}

CounterSnapshot ShapingEngine::snapshot_counters() const {
  CounterSnapshot snap;
  snap.groups = counters_;
  for (std::size_t g = 0; g < queues_.size(); ++g) snap.groups[g].queue_len = queues_[g].size();
  snap.tx_queue_len = tx_queue_.size();
  return snap;
}

}  // namespace gwshaper
