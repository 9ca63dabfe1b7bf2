#include "gwshaper/engine.hpp"

#include <algorithm>

namespace gwshaper {

std::optional<std::uint16_t> server_side_port(const Packet& pkt) {
  const bool src_known = pkt.src_port < 1024;
  const bool dst_known = pkt.dst_port < 1024;
  if (src_known && dst_known) return std::min(pkt.src_port, pkt.dst_port);
  if (src_known) return pkt.src_port;
  if (dst_known) return pkt.dst_port;
  return std::nullopt;
}

bool rule_matches(const MatchRule& rule, const Packet& pkt, Direction direction) {
  if (rule.protocol == ProtocolMatch::tcp && pkt.protocol != Protocol::tcp) return false;
  if (rule.protocol == ProtocolMatch::udp && pkt.protocol != Protocol::udp) return false;

  const bool outgoing = direction == Direction::outgoing;
  const Ipv4Address lan_side = outgoing ? pkt.src_addr : pkt.dst_addr;
  const Ipv4Address far_side = outgoing ? pkt.dst_addr : pkt.src_addr;

  switch (rule.selector) {
    case Selector::source_address:
      return rule.address->contains(lan_side);
    case Selector::destination_address:
      return rule.address->contains(far_side);
    case Selector::well_known_port:
      return server_side_port(pkt) == rule.port;
    case Selector::address_and_port:
      return rule.address->contains(lan_side) && server_side_port(pkt) == rule.port;
  }
  return false;
}

std::size_t classify(const Packet& pkt, const ValidatedPolicy& policy, Direction direction) {
  for (const auto& entry : policy.rule_table()) {
    if (rule_matches(entry.rule, pkt, direction)) return entry.group;
  }
  return policy.default_group();
}

}  // namespace gwshaper
