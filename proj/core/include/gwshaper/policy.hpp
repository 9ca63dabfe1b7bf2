#ifndef GWSHAPER_POLICY_HPP
#define GWSHAPER_POLICY_HPP

// Administrator grouping policy: named groups, their match rules and their
// percentage share of the shaped link.
//
// File grammar, one directive per line, '#' starts a comment:
//
//   method by-application|by-address|by-both
//   group <name> <share_percent> [src <ip[/len]>] [dst <ip[/len]>] [port <n>] [proto tcp|udp]
//   match <name> [src <ip[/len]>] [dst <ip[/len]>] [port <n>] [proto tcp|udp]
//   default <name>
//
// A `group` line declares the group and, if it carries selectors, its first
// rule. `match` lines append further rules to an already declared group
// (a department spread over several subnets, for example). When `method` is
// absent it is inferred from the rules; when `default` is absent the first
// group is the default.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gwshaper/types.hpp"

namespace gwshaper {

struct Ipv4Prefix {
  Ipv4Address address;
  std::uint8_t length = 32;

  bool contains(Ipv4Address a) const;
  /// "a.b.c.d" or "a.b.c.d/len"; len in [0, 32].
  static std::optional<Ipv4Prefix> parse(std::string_view text);
  /// Omits "/32" so that host addresses print as written.
  std::string to_string() const;

  bool operator==(const Ipv4Prefix&) const = default;
};

enum class Selector : std::uint8_t {
  source_address,
  destination_address,
  well_known_port,
  address_and_port,  // source address plus port
};

enum class ProtocolMatch : std::uint8_t { any, tcp, udp };

enum class GroupingMethod : std::uint8_t { by_application, by_address, by_both };

std::string_view to_string(GroupingMethod m);
std::optional<GroupingMethod> parse_grouping_method(std::string_view text);

struct MatchRule {
  Selector selector = Selector::source_address;
  std::optional<Ipv4Prefix> address;
  std::optional<std::uint16_t> port;
  ProtocolMatch protocol = ProtocolMatch::any;

  bool uses_address() const { return selector != Selector::well_known_port; }
  bool uses_port() const {
    return selector == Selector::well_known_port || selector == Selector::address_and_port;
  }

  bool operator==(const MatchRule&) const = default;
};

struct GroupPolicy {
  std::string name;
  std::vector<MatchRule> rules;
  int share_percent = 0;

  bool operator==(const GroupPolicy&) const = default;
};

struct PolicyConfig {
  std::vector<GroupPolicy> groups;
  std::size_t default_group = 0;
  GroupingMethod grouping_method = GroupingMethod::by_address;

  bool operator==(const PolicyConfig&) const = default;
};

class PolicyParseError : public std::runtime_error {
 public:
  PolicyParseError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

/// Structural parse only; semantic checks live in validate_policy.
PolicyConfig parse_policy(std::string_view text);

struct CompiledRule {
  std::size_t group = 0;
  MatchRule rule;

  bool operator==(const CompiledRule&) const = default;
};

struct ValidationOutcome;
ValidationOutcome validate_policy(const PolicyConfig& cfg);

/// A policy that passed validation. Immutable; copies are cheap enough to hand
/// to every engine and simulator instance.
class ValidatedPolicy {
 public:
  const PolicyConfig& config() const { return config_; }
  const std::vector<GroupPolicy>& groups() const { return config_.groups; }
  std::size_t group_count() const { return config_.groups.size(); }
  std::size_t default_group() const { return config_.default_group; }
  GroupingMethod grouping_method() const { return config_.grouping_method; }
  int share_percent(std::size_t group) const { return config_.groups.at(group).share_percent; }
  const std::string& group_name(std::size_t group) const { return config_.groups.at(group).name; }
  std::optional<std::size_t> find_group(std::string_view name) const;

  /// Rules flattened in group-declaration order, then rule order within the
  /// group. Classification scans it and the first match wins.
  const std::vector<CompiledRule>& rule_table() const { return table_; }

  bool operator==(const ValidatedPolicy& o) const { return config_ == o.config_; }

 private:
  friend ValidationOutcome validate_policy(const PolicyConfig& cfg);
  ValidatedPolicy(PolicyConfig cfg, std::vector<CompiledRule> table)
      : config_(std::move(cfg)), table_(std::move(table)) {}

  PolicyConfig config_;
  std::vector<CompiledRule> table_;
};

struct ValidationOutcome {
  std::optional<ValidatedPolicy> policy;
  std::vector<std::string> errors;

  bool ok() const { return policy.has_value(); }
};

ValidationOutcome validate_policy(const PolicyConfig& cfg);

/// parse_policy followed by validate_policy; throws PolicyParseError on a
/// parse failure and std::invalid_argument listing every validation error.
ValidatedPolicy load_policy(std::string_view text);

/// Canonical text form. parse_policy(serialize_policy(p)) validates back to p.
std::string serialize_policy(const PolicyConfig& cfg);
inline std::string serialize_policy(const ValidatedPolicy& p) { return serialize_policy(p.config()); }

/// Narrowest method that describes every rule in the config.
GroupingMethod infer_grouping_method(const std::vector<GroupPolicy>& groups);

}  // namespace gwshaper

#endif  // GWSHAPER_POLICY_HPP
