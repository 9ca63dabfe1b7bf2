#include "gwshaper/netsim.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

namespace gwshaper {

namespace {

constexpr std::uint16_t kEphemeralBase = 49152;

std::size_t bound_slot(Direction d) { return d == Direction::outgoing ? 0 : 1; }

std::string join_errors(const std::vector<std::string>& errors) {
  std::string msg = "invalid scenario:";
  for (const auto& e : errors) msg += "\n  " + e;
  return msg;
}

}  // namespace

std::string_view to_string(Placement p) {
  switch (p) {
    case Placement::outgoing_bound: return "outgoing";
    case Placement::incoming_bound: return "incoming";
    case Placement::disabled: return "disabled";
  }
  return "disabled";
}

std::string_view to_string(SourceKind k) { return k == SourceKind::bulk ? "bulk" : "request-response"; }

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::enqueue: return "enqueue";
    case EventKind::drop: return "drop";
    case EventKind::wire_depart: return "wire-depart";
    case EventKind::wire_arrive: return "wire-arrive";
  }
  return "enqueue";
}

Direction Scenario::sniffed_bound() const {
  if (trace_bound) return *trace_bound;
  return placement == Placement::incoming_bound ? Direction::incoming : Direction::outgoing;
}

ScenarioError::ScenarioError(std::vector<std::string> errors)
    : std::invalid_argument(join_errors(errors)), errors_(std::move(errors)) {}

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> errors;
  if (s.lan_rate <= 0) errors.emplace_back("lan rate must be positive");
  if (s.wan_rate <= 0) errors.emplace_back("wan rate must be positive");
  if (s.access_rate <= 0) errors.emplace_back("access rate must be positive");
  if (s.duration <= SimTime{}) errors.emplace_back("duration must be positive");
  if (s.classify_cost < SimTime{}) errors.emplace_back("classify cost must not be negative");
  if (s.jitter < SimTime{}) errors.emplace_back("jitter must not be negative");
  if (s.queue_capacity == 0) errors.emplace_back("queue capacity must be positive");
  if (s.tx_depth == 0) errors.emplace_back("transmission queue depth must be positive");
  if (s.quantum_unit <= 0) errors.emplace_back("quantum unit must be positive");
  if (s.placement != Placement::disabled && !s.policy) {
    errors.emplace_back("shaping placement requires a policy");
  }

  std::set<std::string> names{s.server.name};
  std::set<std::uint32_t> addresses{s.server.address.value()};
  for (const auto& st : s.stations) {
    if (!names.insert(st.name).second) errors.push_back(fmt::format("duplicate host name '{}'", st.name));
    if (!addresses.insert(st.address.value()).second) {
      errors.push_back(fmt::format("duplicate host address {}", st.address.to_string()));
    }
  }

  auto is_station = [&](const std::string& n) {
    return std::any_of(s.stations.begin(), s.stations.end(), [&](const Host& h) { return h.name == n; });
  };
  for (std::size_t i = 0; i < s.sources.size(); ++i) {
    const auto& src = s.sources[i];
    const bool origin_server = src.station == s.server.name;
    const bool peer_server = src.peer == s.server.name;
    if (!origin_server && !is_station(src.station)) {
      errors.push_back(fmt::format("source {} names unknown host '{}'", i, src.station));
    }
    if (!peer_server && !is_station(src.peer)) {
      errors.push_back(fmt::format("source {} names unknown host '{}'", i, src.peer));
    }
    if (origin_server == peer_server) {
      errors.push_back(fmt::format("source {} must run between a station and the server", i));
    }
    if (src.kind == SourceKind::request_response && origin_server) {
      errors.push_back(fmt::format("source {}: requests must originate at a station", i));
    }
    if (!Packet::valid_size(src.packet_size)) {
      errors.push_back(fmt::format("source {} packet size {} outside [64, 1500]", i, src.packet_size));
    }
    if (src.kind == SourceKind::bulk && src.window == 0) {
      errors.push_back(fmt::format("source {} window must be positive", i));
    }
    if (src.kind == SourceKind::request_response) {
      if (!Packet::valid_size(src.request_size)) {
        errors.push_back(fmt::format("source {} request size {} outside [64, 1500]", i, src.request_size));
      }
      if (src.response_size == 0) errors.push_back(fmt::format("source {} response size must be positive", i));
      if (src.response_delay < SimTime{}) {
        errors.push_back(fmt::format("source {} response delay must not be negative", i));
      }
    }
    if (src.start_at < SimTime{}) errors.push_back(fmt::format("source {} starts before time zero", i));
  }
  return errors;
}

std::string trace_csv(const std::vector<EventRecord>& trace) {
  std::string out = "time_us,kind,flow_id,group,size\n";
  for (const auto& r : trace) {
    out += fmt::format("{},{},{},{},{}\n", format_us(r.time), to_string(r.kind), r.flow_id,
                       r.group ? fmt::format("{}", *r.group) : std::string(), r.size);
  }
  return out;
}

Simulation::Simulation(Scenario scenario) : scenario_(std::move(scenario)), rng_(scenario_.seed) {
  if (auto errors = validate_scenario(scenario_); !errors.empty()) throw ScenarioError(std::move(errors));

  const auto& s = scenario_;
  links_.resize(kFirstStationUplink + s.stations.size());
  links_[kOutgoingLink].name = "gateway-outgoing";
  links_[kOutgoingLink].rate_bps = s.wan_rate;
  links_[kOutgoingLink].bound = Direction::outgoing;
  links_[kOutgoingLink].capacity = s.queue_capacity;
  links_[kIncomingLink].name = "gateway-incoming";
  links_[kIncomingLink].rate_bps = s.lan_rate;
  links_[kIncomingLink].bound = Direction::incoming;
  links_[kIncomingLink].capacity = s.queue_capacity;
  links_[kServerUplink].name = s.server.name + "-uplink";
  links_[kServerUplink].rate_bps = s.access_rate;
  for (std::size_t i = 0; i < s.stations.size(); ++i) {
    links_[kFirstStationUplink + i].name = s.stations[i].name + "-uplink";
    links_[kFirstStationUplink + i].rate_bps = s.access_rate;
  }

  if (s.placement != Placement::disabled) {
    const Direction d = s.placement == Placement::outgoing_bound ? Direction::outgoing : Direction::incoming;
    EngineConfig cfg;
    cfg.queue_capacity = s.queue_capacity;
    cfg.tx_depth = s.tx_depth;
    cfg.quantum_unit = s.quantum_unit;
    cfg.direction = d;
    links_[gateway_link(d)].engine.emplace(*s.policy, cfg);
  }

  const std::size_t group_count = s.policy ? s.policy->group_count() : 1;
  const auto seconds = static_cast<std::size_t>((s.duration.ns() + 999'999'999) / 1'000'000'000);
  for (auto& b : bound_stats_) {
    b.groups.assign(group_count, TrafficStats{});
    b.timeline.assign(std::max<std::size_t>(seconds, 1), 0);
  }
  sniffed_link_ = gateway_link(s.sniffed_bound());

  auto host_index = [&](const std::string& name) {
    for (std::size_t h = 0; h < s.stations.size(); ++h) {
      if (s.stations[h].name == name) return h;
    }
    return server_host();
  };
  sources_.reserve(s.sources.size());
  for (std::size_t i = 0; i < s.sources.size(); ++i) {
    SourceState st;
    st.spec = s.sources[i];
    st.origin = host_index(st.spec.station);
    st.peer = host_index(st.spec.peer);
    st.ephemeral_port = static_cast<std::uint16_t>(kEphemeralBase + i % 16384);
    sources_.push_back(std::move(st));
  }
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    const auto& spec = sources_[i].spec;
    const SimTime start = spec.start_at + draw_jitter();
    if (start >= spec.stop_at) continue;
    if (spec.kind == SourceKind::bulk) {
      for (std::uint32_t w = 0; w < spec.window; ++w) schedule_emit(start, i, EmitKind::data, spec.packet_size);
    } else {
      schedule_emit(start, i, EmitKind::request, spec.request_size);
    }
  }
}

const Host& Simulation::host(std::size_t h) const {
  return h < scenario_.stations.size() ? scenario_.stations[h] : scenario_.server;
}

std::optional<std::size_t> Simulation::host_by_address(Ipv4Address a) const {
  for (std::size_t h = 0; h < scenario_.stations.size(); ++h) {
    if (scenario_.stations[h].address == a) return h;
  }
  if (scenario_.server.address == a) return server_host();
  return std::nullopt;
}

std::size_t Simulation::host_uplink(std::size_t h) const {
  return h == server_host() ? kServerUplink : kFirstStationUplink + h;
}

SimTime Simulation::draw_jitter() {
  if (scenario_.jitter.ns() <= 0) return SimTime{};
  const auto span = static_cast<std::uint64_t>(scenario_.jitter.ns()) + 1;
  return SimTime::from_ns(static_cast<std::int64_t>(rng_() % span));
}

void Simulation::schedule(Event ev) {
  ev.seq = next_seq_++;
  events_.push_back(std::move(ev));
  std::push_heap(events_.begin(), events_.end(), EventLater{});
}

void Simulation::schedule_emit(SimTime at, std::size_t source, EmitKind kind, std::uint32_t size) {
  Event ev;
  ev.time = at;
  ev.type = EventType::emit;
  ev.target = source;
  ev.emit_kind = kind;
  ev.size = size;
  schedule(std::move(ev));
}

Packet Simulation::make_packet(std::size_t source, EmitKind kind, std::uint32_t size, SimTime now) {
  auto& st = sources_[source];
  const bool reverse = kind == EmitKind::response;
  const std::size_t from = reverse ? st.peer : st.origin;
  const std::size_t to = reverse ? st.origin : st.peer;
  Packet pkt;
  pkt.src_addr = host(from).address;
  pkt.dst_addr = host(to).address;
  pkt.src_port = from == server_host() ? st.spec.port : st.ephemeral_port;
  pkt.dst_port = to == server_host() ? st.spec.port : st.ephemeral_port;
  pkt.protocol = st.spec.protocol;
  pkt.size = size;
  pkt.flow_id = source;
  pkt.id = next_packet_id_++;
  pkt.created_at = now;
  ++st.generated;
  return pkt;
}

std::optional<std::size_t> Simulation::group_of(const Packet& pkt, std::size_t link) const {
  const auto& l = links_[link];
  if (!l.bound) return std::nullopt;
  if (!scenario_.policy) return std::size_t{0};
  return classify(pkt, *scenario_.policy, *l.bound);
}

EventRecord Simulation::record(EventKind kind, std::size_t link, const Packet& pkt) {
  EventRecord rec{now_, kind, link, pkt.flow_id, pkt.id, group_of(pkt, link), pkt.size};
  if (link == sniffed_link_) trace_.push_back(rec);
  return rec;
}

void Simulation::kick(std::size_t link) {
  auto& l = links_[link];
  if (l.busy) return;
  if (l.engine && !l.classify_pending.empty()) {
    l.classifying = l.classify_pending.front();
    l.classify_pending.pop_front();
    l.busy = true;
    Event ev;
    ev.time = now_ + scenario_.classify_cost;
    ev.type = EventType::classify_done;
    ev.target = link;
    schedule(std::move(ev));
    return;
  }
  const bool ready = l.engine ? l.engine->has_packets() : !l.fifo.empty();
  if (ready) {
    l.busy = true;
    Event ev;
    ev.time = now_;
    ev.type = EventType::tx_start;
    ev.target = link;
    schedule(std::move(ev));
  }
}

void Simulation::arrive_at_gateway(Packet pkt, SimTime now) {
  const Direction d = pkt.dst_addr == scenario_.server.address ? Direction::outgoing : Direction::incoming;
  const std::size_t link = gateway_link(d);
  if (links_[link].engine) {
    links_[link].classify_pending.push_back(pkt);
    kick(link);
    return;
  }
  Event ev;
  ev.time = now;
  ev.type = EventType::forward;
  ev.target = link;
  ev.packet = pkt;
  schedule(std::move(ev));
}

void Simulation::settle_at_gateway(const Packet& pkt, SimTime now, bool dropped) {
  auto& st = sources_[pkt.flow_id];
  if (dropped) ++st.drops;
  if (st.spec.kind == SourceKind::bulk) {
    // The window slot frees once the packet is out of the gateway, sent or lost.
    if (now < st.spec.stop_at) schedule_emit(now, pkt.flow_id, EmitKind::data, st.spec.packet_size);
    return;
  }
  if (!dropped) return;
  const bool is_request = pkt.src_addr == host(st.origin).address;
  if (is_request) {
    if (now < st.spec.stop_at) schedule_emit(now, pkt.flow_id, EmitKind::request, st.spec.request_size);
  } else if (++st.response_settled == st.response_packets && now < st.spec.stop_at) {
    schedule_emit(now, pkt.flow_id, EmitKind::request, st.spec.request_size);
  }
}

void Simulation::schedule_response(std::size_t source, SimTime now) {
  auto& st = sources_[source];
  const std::uint32_t per = st.spec.packet_size;
  const std::uint32_t n = (st.spec.response_size + per - 1) / per;
  st.response_packets = n;
  st.response_settled = 0;
  const SimTime at = now + st.spec.response_delay + draw_jitter();
  for (std::uint32_t k = 0; k < n; ++k) {
    const std::uint32_t size =
        k + 1 < n ? per : std::max(kMinFrameBytes, st.spec.response_size - (n - 1) * per);
    schedule_emit(at, source, EmitKind::response, size);
  }
}

void Simulation::deliver(std::size_t h, const Packet& pkt, SimTime now) {
  auto& st = sources_[pkt.flow_id];
  ++st.delivered_packets;
  st.delivered_bytes += pkt.size;
  if (st.spec.kind != SourceKind::request_response) return;
  if (h == st.peer) {
    schedule_response(pkt.flow_id, now);
  } else if (++st.response_settled == st.response_packets && now < st.spec.stop_at) {
    schedule_emit(now, pkt.flow_id, EmitKind::request, st.spec.request_size);
  }
}

void Simulation::leave_gateway(std::size_t link, const Packet& pkt, SimTime now) {
  settle_at_gateway(pkt, now, false);
  const auto h = link == kOutgoingLink ? std::optional<std::size_t>(server_host()) : host_by_address(pkt.dst_addr);
  if (h) deliver(*h, pkt, now);
}

std::optional<EventRecord> Simulation::advance() {
  if (finished_) return std::nullopt;
  if (events_.empty() || events_.front().time > scenario_.duration) {
    finished_ = true;
    return std::nullopt;
  }
  std::pop_heap(events_.begin(), events_.end(), EventLater{});
  Event ev = std::move(events_.back());
  events_.pop_back();
  now_ = ev.time;

  switch (ev.type) {
    case EventType::emit: {
      Packet pkt = make_packet(ev.target, ev.emit_kind, ev.size, now_);
      const bool reverse = ev.emit_kind == EmitKind::response;
      const auto& st = sources_[ev.target];
      const std::size_t uplink = host_uplink(reverse ? st.peer : st.origin);
      pkt.enqueued_at = now_;
      links_[uplink].fifo.push_back(pkt);
      auto rec = record(EventKind::enqueue, uplink, pkt);
      kick(uplink);
      return rec;
    }
    case EventType::forward: {
      auto& l = links_[ev.target];
      Packet pkt = ev.packet;
      std::optional<EventRecord> rec;
      if (l.fifo.size() < l.capacity) {
        pkt.enqueued_at = now_;
        l.fifo.push_back(pkt);
        rec = record(EventKind::enqueue, ev.target, pkt);
      } else {
        rec = record(EventKind::drop, ev.target, pkt);
        ++bound_stats_[bound_slot(*l.bound)].groups[*rec->group].drops;
        settle_at_gateway(pkt, now_, true);
      }
      kick(ev.target);
      return rec;
    }
    case EventType::classify_done: {
      auto& l = links_[ev.target];
      Packet pkt = *l.classifying;
      l.classifying.reset();
      l.busy = false;
      const auto result = l.engine->enqueue(pkt, now_);
      std::optional<EventRecord> rec;
      if (result.accepted()) {
        rec = record(EventKind::enqueue, ev.target, pkt);
      } else {
        rec = record(EventKind::drop, ev.target, pkt);
        ++bound_stats_[bound_slot(*l.bound)].groups[result.group].drops;
        settle_at_gateway(pkt, now_, true);
      }
      kick(ev.target);
      return rec;
    }
    case EventType::tx_start: {
      auto& l = links_[ev.target];
      Packet pkt;
      if (l.engine) {
        pkt = *l.engine->pop_for_wire(now_);
      } else {
        pkt = l.fifo.front();
        l.fifo.pop_front();
      }
      auto rec = record(EventKind::wire_depart, ev.target, pkt);
      if (l.bound) {
        const double waited = (now_ - pkt.enqueued_at).us();
        bound_stats_[bound_slot(*l.bound)].groups[*rec.group].delay.add(waited);
        sources_[pkt.flow_id].gateway_delay.add(waited);
      }
      l.on_wire = pkt;
      Event end;
      end.time = now_ + serialization_time(pkt.size, l.rate_bps);
      end.type = EventType::tx_end;
      end.target = ev.target;
      schedule(std::move(end));
      return rec;
    }
    case EventType::tx_end: {
      auto& l = links_[ev.target];
      Packet pkt = *l.on_wire;
      l.on_wire.reset();
      l.busy = false;
      auto rec = record(EventKind::wire_arrive, ev.target, pkt);
      if (l.bound) {
        auto& b = bound_stats_[bound_slot(*l.bound)];
        auto& g = b.groups[*rec.group];
        g.bytes += pkt.size;
        ++g.packets;
        const auto second = std::min<std::size_t>(static_cast<std::size_t>(now_.ns() / 1'000'000'000),
                                                  b.timeline.size() - 1);
        b.timeline[second] += pkt.size;
        leave_gateway(ev.target, pkt, now_);
      } else {
        arrive_at_gateway(pkt, now_);
      }
      kick(ev.target);
      return rec;
    }
  }
  return std::nullopt;
}

void Simulation::run_to_end() {
  while (advance()) {
  }
}

MetricsReport Simulation::report() const {
  MetricsReport r;
  r.duration = scenario_.duration;
  for (Direction d : {Direction::outgoing, Direction::incoming}) {
    auto& b = r.bound(d);
    const auto& link = links_[gateway_link(d)];
    const auto& stats = bound_stats_[bound_slot(d)];
    b.direction = d;
    b.rate_bps = link.rate_bps;
    b.shaped = link.engine.has_value();
    if (scenario_.policy) {
      for (const auto& g : scenario_.policy->groups()) b.group_names.push_back(g.name);
    } else {
      b.group_names.emplace_back("all");
    }
    b.groups = stats.groups;
    for (const auto& g : stats.groups) {
      b.bytes += g.bytes;
      b.packets += g.packets;
      b.drops += g.drops;
    }
    b.utilization = utilization(b.bytes, b.rate_bps, scenario_.duration);
    b.timeline = stats.timeline;
  }

  // Packets still inside the network: queued, being classified, on a wire,
  // or handed to the gateway but not yet enqueued.
  std::vector<std::uint64_t> in_flight(sources_.size(), 0);
  auto count = [&](const Packet& p) { ++in_flight[p.flow_id]; };
  for (const auto& l : links_) {
    std::for_each(l.fifo.begin(), l.fifo.end(), count);
    std::for_each(l.classify_pending.begin(), l.classify_pending.end(), count);
    if (l.classifying) count(*l.classifying);
    if (l.on_wire) count(*l.on_wire);
    if (l.engine) {
      for (const auto& q : l.engine->queues()) std::for_each(q.slots().begin(), q.slots().end(), count);
      std::for_each(l.engine->tx_queue().begin(), l.engine->tx_queue().end(), count);
    }
  }
  for (const auto& ev : events_) {
    if (ev.type == EventType::forward) count(ev.packet);
  }

  for (std::size_t i = 0; i < sources_.size(); ++i) {
    const auto& st = sources_[i];
    FlowReport f;
    f.flow_id = i;
    f.label = fmt::format("{}:{}->{}:{}", to_string(st.spec.kind), st.spec.station, st.spec.peer, st.spec.port);
    f.generated = st.generated;
    f.delivered_packets = st.delivered_packets;
    f.delivered_bytes = st.delivered_bytes;
    f.drops = st.drops;
    f.in_flight = in_flight[i];
    f.gateway_delay = st.gateway_delay;
    r.flows.push_back(std::move(f));
  }
  return r;
}

MetricsReport run(const Scenario& scenario) {
  Simulation sim(scenario);
  sim.run_to_end();
  return sim.report();
}

RunOutput run_with_trace(const Scenario& scenario) {
  Simulation sim(scenario);
  sim.run_to_end();
  return {sim.report(), sim.trace()};
}

}  // namespace gwshaper
