#ifndef GWSHAPER_TESTS_ORACLES_HPP
#define GWSHAPER_TESTS_ORACLES_HPP

// Reference implementations used only by tests. They are written from the
// documented behaviour and deliberately share no code with core/.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gwshaper/engine.hpp"
#include "gwshaper/policy.hpp"

namespace gwshaper::testing {

using Rng = std::mt19937_64;

inline std::uint64_t uniform(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
  return lo + rng() % (hi - lo + 1);
}

/// Small address and port pools so that random packets hit random rules often.
inline Ipv4Address random_address(Rng& rng) {
  static const Ipv4Address pool[] = {Ipv4Address(10, 0, 0, 1),  Ipv4Address(10, 0, 0, 2),
                                     Ipv4Address(10, 0, 0, 77), Ipv4Address(10, 0, 1, 1),
                                     Ipv4Address(10, 0, 1, 9),  Ipv4Address(192, 168, 4, 20),
                                     Ipv4Address(172, 16, 0, 3)};
  if (uniform(rng, 0, 9) == 0) return Ipv4Address(static_cast<std::uint32_t>(rng()));
  return pool[uniform(rng, 0, std::size(pool) - 1)];
}

inline std::uint16_t random_port(Rng& rng) {
  static const std::uint16_t pool[] = {20, 21, 22, 25, 53, 80, 443, 1023, 1024, 8080, 49152, 50001};
  return pool[uniform(rng, 0, std::size(pool) - 1)];
}

inline Packet random_packet(Rng& rng) {
  Packet p;
  p.src_addr = random_address(rng);
  p.dst_addr = random_address(rng);
  p.src_port = random_port(rng);
  p.dst_port = random_port(rng);
  p.protocol = uniform(rng, 0, 1) ? Protocol::tcp : Protocol::udp;
  p.size = static_cast<std::uint32_t>(uniform(rng, kMinFrameBytes, kMaxFrameBytes));
  return p;
}

inline MatchRule random_rule(Rng& rng) {
  MatchRule r;
  const auto pick = uniform(rng, 0, 3);
  r.selector = pick == 0   ? Selector::source_address
               : pick == 1 ? Selector::destination_address
               : pick == 2 ? Selector::well_known_port
                           : Selector::address_and_port;
  if (r.selector != Selector::well_known_port) {
    static const std::uint8_t lengths[] = {0, 8, 16, 24, 24, 32, 32, 32};
    r.address = Ipv4Prefix{random_address(rng), lengths[uniform(rng, 0, std::size(lengths) - 1)]};
  }
  if (r.selector == Selector::well_known_port || r.selector == Selector::address_and_port) {
    r.port = random_port(rng);
  }
  const auto proto = uniform(rng, 0, 3);
  r.protocol = proto == 0 ? ProtocolMatch::tcp : proto == 1 ? ProtocolMatch::udp : ProtocolMatch::any;
  return r;
}

/// Random well-formed config with shares summing to 100 and `rule_count`
/// rules spread over the groups.
inline PolicyConfig random_valid_config(Rng& rng, std::size_t rule_count) {
  const std::size_t groups = uniform(rng, 1, 5);
  PolicyConfig cfg;
  int remaining = 100;
  for (std::size_t g = 0; g < groups; ++g) {
    GroupPolicy gp;
    gp.name = "g" + std::to_string(g);
    const int left_after = static_cast<int>(groups - g - 1);
    gp.share_percent = g + 1 == groups ? remaining
                                       : static_cast<int>(uniform(rng, 1, static_cast<std::uint64_t>(remaining - left_after)));
    remaining -= gp.share_percent;
    cfg.groups.push_back(gp);
  }
  for (std::size_t r = 0; r < rule_count; ++r) {
    cfg.groups[uniform(rng, 0, groups - 1)].rules.push_back(random_rule(rng));
  }
  cfg.default_group = uniform(rng, 0, groups - 1);
  cfg.grouping_method = GroupingMethod::by_both;
  return cfg;
}

// ---------------------------------------------------------------------------
// First-match classification by plain linear scan.

inline bool oracle_prefix_match(Ipv4Address net, int len, Ipv4Address a) {
  // Compare bit by bit from the most significant end.
  for (int bit = 0; bit < len; ++bit) {
    const std::uint32_t m = 1u << (31 - bit);
    if ((net.value() & m) != (a.value() & m)) return false;
  }
  return true;
}

inline std::optional<std::uint16_t> oracle_server_port(std::uint16_t a, std::uint16_t b) {
  std::vector<std::uint16_t> known;
  if (a < 1024) known.push_back(a);
  if (b < 1024) known.push_back(b);
  if (known.empty()) return std::nullopt;
  std::uint16_t best = known[0];
  for (auto k : known) best = k < best ? k : best;
  return best;
}

inline std::size_t oracle_classify(const PolicyConfig& cfg, const Packet& p, Direction d) {
  const Ipv4Address lan = d == Direction::outgoing ? p.src_addr : p.dst_addr;
  const Ipv4Address far = d == Direction::outgoing ? p.dst_addr : p.src_addr;
  const auto srv = oracle_server_port(p.src_port, p.dst_port);
  for (std::size_t g = 0; g < cfg.groups.size(); ++g) {
    for (const auto& r : cfg.groups[g].rules) {
      bool ok = true;
      if (r.protocol == ProtocolMatch::tcp) ok = ok && p.protocol == Protocol::tcp;
      if (r.protocol == ProtocolMatch::udp) ok = ok && p.protocol == Protocol::udp;
      if (r.selector == Selector::source_address || r.selector == Selector::address_and_port) {
        ok = ok && oracle_prefix_match(r.address->address, r.address->length, lan);
      }
      if (r.selector == Selector::destination_address) {
        ok = ok && oracle_prefix_match(r.address->address, r.address->length, far);
      }
      if (r.selector == Selector::well_known_port || r.selector == Selector::address_and_port) {
        ok = ok && srv.has_value() && *srv == *r.port;
      }
      if (ok) return g;
    }
  }
  return cfg.default_group;
}

// ---------------------------------------------------------------------------
// Accept/reject decision re-derived from the documented invariants.

inline bool oracle_accepts(const PolicyConfig& cfg) {
  if (cfg.groups.empty()) return false;
  if (cfg.default_group >= cfg.groups.size()) return false;
  int total = 0;
  std::set<std::string> seen;
  for (const auto& g : cfg.groups) {
    if (g.name.empty()) return false;
    if (seen.count(g.name)) return false;
    seen.insert(g.name);
    if (g.share_percent < 1 || g.share_percent > 100) return false;
    total += g.share_percent;
    for (const auto& r : g.rules) {
      const bool wants_addr = r.selector != Selector::well_known_port;
      const bool wants_port =
          r.selector == Selector::well_known_port || r.selector == Selector::address_and_port;
      if (wants_addr != r.address.has_value()) return false;
      if (wants_port != r.port.has_value()) return false;
      if (r.address && r.address->length > 32) return false;
      if (cfg.grouping_method == GroupingMethod::by_application && wants_addr) return false;
      if (cfg.grouping_method == GroupingMethod::by_address && wants_port) return false;
    }
  }
  return total == 100;
}

/// Group-major flattening.
inline std::vector<CompiledRule> oracle_flatten(const PolicyConfig& cfg) {
  std::vector<CompiledRule> out;
  for (std::size_t g = 0; g < cfg.groups.size(); ++g) {
    for (std::size_t r = 0; r < cfg.groups[g].rules.size(); ++r) out.push_back({g, cfg.groups[g].rules[r]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Counter bookkeeping replayed from the outside.

struct CountingOracle {
  struct Group {
    std::uint64_t arrivals = 0;
    std::uint64_t accepted = 0;
    std::uint64_t dropped = 0;
    std::uint64_t left = 0;
  };
  std::vector<Group> groups;

  explicit CountingOracle(std::size_t n) : groups(n) {}
  void on_enqueue(const EnqueueResult& r) {
    auto& g = groups[r.group];
    ++g.arrivals;
    r.accepted() ? ++g.accepted : ++g.dropped;
  }
  void on_leave(std::size_t group) { ++groups[group].left; }
};

}  // namespace gwshaper::testing

#endif  // GWSHAPER_TESTS_ORACLES_HPP
