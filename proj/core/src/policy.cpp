#include "gwshaper/policy.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <span>
#include <utility>

#include <fmt/format.h>

namespace gwshaper {

namespace {

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head_ok = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
  auto tail_ok = [&](char c) { return head_ok(c) || (c >= '0' && c <= '9') || c == '-' || c == '.'; };
  if (!head_ok(s.front())) return false;
  return std::all_of(s.begin() + 1, s.end(), tail_ok);
}

template <typename T>
std::optional<T> parse_unsigned(std::string_view s) {
  if (s.empty() || s.front() == '+' || s.front() == '-') return std::nullopt;
  T value{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return value;
}

// Parses the selector options after the fixed fields of a group/match line.
// Returns nullopt when the line carries no selector at all.
std::optional<MatchRule> parse_rule_options(std::span<const std::string_view> opts, int line_no) {
  std::optional<Ipv4Prefix> src, dst;
  std::optional<std::uint16_t> port;
  std::optional<ProtocolMatch> proto;
  std::set<std::string_view> seen;

  for (std::size_t i = 0; i < opts.size(); i += 2) {
    const std::string_view key = opts[i];
    if (key != "src" && key != "dst" && key != "port" && key != "proto") {
      throw PolicyParseError(line_no, fmt::format("unknown selector keyword '{}'", key));
    }
    if (!seen.insert(key).second) {
      throw PolicyParseError(line_no, fmt::format("duplicate key '{}'", key));
    }
    if (i + 1 >= opts.size()) {
      throw PolicyParseError(line_no, fmt::format("missing value after '{}'", key));
    }
    const std::string_view value = opts[i + 1];
    if (key == "src" || key == "dst") {
      auto prefix = Ipv4Prefix::parse(value);
      if (!prefix) throw PolicyParseError(line_no, fmt::format("invalid IPv4 address '{}'", value));
      (key == "src" ? src : dst) = *prefix;
    } else if (key == "port") {
      auto n = parse_unsigned<std::uint32_t>(value);
      if (!n || *n > 65535) throw PolicyParseError(line_no, fmt::format("invalid port '{}'", value));
      port = static_cast<std::uint16_t>(*n);
    } else {
      if (value == "tcp") {
        proto = ProtocolMatch::tcp;
      } else if (value == "udp") {
        proto = ProtocolMatch::udp;
      } else {
        throw PolicyParseError(line_no, fmt::format("invalid protocol '{}'", value));
      }
    }
  }

  if (!src && !dst && !port) {
    if (proto) throw PolicyParseError(line_no, "'proto' needs an address or port selector");
    return std::nullopt;
  }
  if (src && dst) throw PolicyParseError(line_no, "'src' and 'dst' cannot share one rule");
  if (dst && port) throw PolicyParseError(line_no, "'port' combines with 'src' only");

  MatchRule rule;
  rule.protocol = proto.value_or(ProtocolMatch::any);
  if (src && port) {
    rule.selector = Selector::address_and_port;
    rule.address = src;
    rule.port = port;
  } else if (src) {
    rule.selector = Selector::source_address;
    rule.address = src;
  } else if (dst) {
    rule.selector = Selector::destination_address;
    rule.address = dst;
  } else {
    rule.selector = Selector::well_known_port;
    rule.port = port;
  }
  return rule;
}

std::string format_rule_options(const MatchRule& r) {
  std::string out;
  if (r.address) {
    out += r.selector == Selector::destination_address ? " dst " : " src ";
    out += r.address->to_string();
  }
  if (r.port) out += fmt::format(" port {}", *r.port);
  if (r.protocol == ProtocolMatch::tcp) out += " proto tcp";
  if (r.protocol == ProtocolMatch::udp) out += " proto udp";
  return out;
}

}  // namespace

PolicyParseError::PolicyParseError(int line, const std::string& message)
    : std::runtime_error(fmt::format("line {}: {}", line, message)), line_(line) {}

bool Ipv4Prefix::contains(Ipv4Address a) const {
  if (length == 0) return true;
  const std::uint32_t mask = length >= 32 ? 0xffffffffu : ~(0xffffffffu >> length);
  return (a.value() & mask) == (address.value() & mask);
}

std::optional<Ipv4Prefix> Ipv4Prefix::parse(std::string_view text) {
  const auto slash = text.find('/');
  auto addr = Ipv4Address::parse(text.substr(0, slash));
  if (!addr) return std::nullopt;
  Ipv4Prefix prefix{*addr, 32};
  if (slash != std::string_view::npos) {
    auto len = parse_unsigned<unsigned>(text.substr(slash + 1));
    if (!len || *len > 32) return std::nullopt;
    prefix.length = static_cast<std::uint8_t>(*len);
  }
  return prefix;
}

std::string Ipv4Prefix::to_string() const {
  if (length == 32) return address.to_string();
  return fmt::format("{}/{}", address.to_string(), length);
}

std::string_view to_string(GroupingMethod m) {
  switch (m) {
    case GroupingMethod::by_application: return "by-application";
    case GroupingMethod::by_address: return "by-address";
    case GroupingMethod::by_both: return "by-both";
  }
  return "by-both";
}

std::optional<GroupingMethod> parse_grouping_method(std::string_view text) {
  if (text == "by-application") return GroupingMethod::by_application;
  if (text == "by-address") return GroupingMethod::by_address;
  if (text == "by-both") return GroupingMethod::by_both;
  return std::nullopt;
}

GroupingMethod infer_grouping_method(const std::vector<GroupPolicy>& groups) {
  bool any_port = false;
  bool any_address = false;
  for (const auto& g : groups) {
    for (const auto& r : g.rules) {
      if (r.selector == Selector::address_and_port) return GroupingMethod::by_both;
      any_port |= r.uses_port();
      any_address |= r.uses_address();
    }
  }
  if (any_port && any_address) return GroupingMethod::by_both;
  return any_port ? GroupingMethod::by_application : GroupingMethod::by_address;
}

std::optional<std::size_t> ValidatedPolicy::find_group(std::string_view name) const {
  for (std::size_t i = 0; i < config_.groups.size(); ++i) {
    if (config_.groups[i].name == name) return i;
  }
  return std::nullopt;
}

PolicyConfig parse_policy(std::string_view text) {
  PolicyConfig cfg;
  std::optional<std::pair<std::string, int>> default_name;
  std::optional<GroupingMethod> method;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tokens = split_tokens(line);
    if (tokens.empty()) continue;
    const std::string_view directive = tokens[0];
    const std::span<const std::string_view> args(tokens.data() + 1, tokens.size() - 1);

    if (directive == "group") {
      if (args.size() < 2) throw PolicyParseError(line_no, "expected 'group <name> <share_percent>'");
      if (!is_identifier(args[0])) {
        throw PolicyParseError(line_no, fmt::format("invalid group name '{}'", args[0]));
      }
      auto share = parse_unsigned<unsigned>(args[1]);
      if (!share || *share > 1000000) {
        throw PolicyParseError(line_no, fmt::format("invalid share '{}'", args[1]));
      }
      GroupPolicy group;
      group.name = std::string(args[0]);
      group.share_percent = static_cast<int>(*share);
      if (auto rule = parse_rule_options(args.subspan(2), line_no)) group.rules.push_back(*rule);
      cfg.groups.push_back(std::move(group));
    } else if (directive == "match") {
      if (args.empty()) throw PolicyParseError(line_no, "expected 'match <name> <selectors>'");
      auto it = std::find_if(cfg.groups.begin(), cfg.groups.end(),
                             [&](const GroupPolicy& g) { return g.name == args[0]; });
      if (it == cfg.groups.end()) {
        throw PolicyParseError(line_no, fmt::format("match refers to undeclared group '{}'", args[0]));
      }
      auto rule = parse_rule_options(args.subspan(1), line_no);
      if (!rule) throw PolicyParseError(line_no, "match line needs at least one selector");
      it->rules.push_back(*rule);
    } else if (directive == "default") {
      if (args.size() != 1) throw PolicyParseError(line_no, "expected 'default <name>'");
      if (default_name) throw PolicyParseError(line_no, "duplicate key 'default'");
      default_name.emplace(std::string(args[0]), line_no);
    } else if (directive == "method") {
      if (args.size() != 1) throw PolicyParseError(line_no, "expected 'method <grouping-method>'");
      if (method) throw PolicyParseError(line_no, "duplicate key 'method'");
      method = parse_grouping_method(args[0]);
      if (!method) throw PolicyParseError(line_no, fmt::format("unknown grouping method '{}'", args[0]));
    } else {
      throw PolicyParseError(line_no, fmt::format("unknown directive '{}'", directive));
    }
  }

  if (default_name) {
    auto it = std::find_if(cfg.groups.begin(), cfg.groups.end(),
                           [&](const GroupPolicy& g) { return g.name == default_name->first; });
    if (it == cfg.groups.end()) {
      throw PolicyParseError(default_name->second,
                             fmt::format("default refers to undeclared group '{}'", default_name->first));
    }
    cfg.default_group = static_cast<std::size_t>(it - cfg.groups.begin());
  }
  cfg.grouping_method = method.value_or(infer_grouping_method(cfg.groups));
  return cfg;
}

ValidationOutcome validate_policy(const PolicyConfig& cfg) {
  ValidationOutcome out;
  auto& errors = out.errors;

  if (cfg.groups.empty()) errors.emplace_back("policy declares no groups");

  long sum = 0;
  std::set<std::string> names;
  for (const auto& g : cfg.groups) {
    if (!is_identifier(g.name)) errors.push_back(fmt::format("invalid group name '{}'", g.name));
    if (!names.insert(g.name).second) errors.push_back(fmt::format("duplicate group name '{}'", g.name));
    if (g.share_percent < 1 || g.share_percent > 100) {
      errors.push_back(fmt::format("group '{}' share {} outside [1, 100]", g.name, g.share_percent));
    }
    sum += g.share_percent;
    for (std::size_t r = 0; r < g.rules.size(); ++r) {
      const auto& rule = g.rules[r];
      if (rule.uses_address() && !rule.address) {
        errors.push_back(fmt::format("group '{}' rule {} needs an address", g.name, r));
      }
      if (rule.uses_port() && !rule.port) {
        errors.push_back(fmt::format("group '{}' rule {} needs a port", g.name, r));
      }
      if (!rule.uses_address() && rule.address) {
        errors.push_back(fmt::format("group '{}' rule {} carries an unused address", g.name, r));
      }
      if (!rule.uses_port() && rule.port) {
        errors.push_back(fmt::format("group '{}' rule {} carries an unused port", g.name, r));
      }
      if (rule.address && rule.address->length > 32) {
        errors.push_back(fmt::format("group '{}' rule {} prefix length {} exceeds 32", g.name, r,
                                     rule.address->length));
      }
      if (cfg.grouping_method == GroupingMethod::by_application && rule.uses_address()) {
        errors.push_back(fmt::format("group '{}' has an address rule under by-application", g.name));
      }
      if (cfg.grouping_method == GroupingMethod::by_address && rule.uses_port()) {
        errors.push_back(fmt::format("group '{}' has a port rule under by-address", g.name));
      }
    }
  }
  if (!cfg.groups.empty() && sum != 100) errors.push_back(fmt::format("shares sum to {}", sum));
  if (!cfg.groups.empty() && cfg.default_group >= cfg.groups.size()) {
    errors.push_back(fmt::format("default group index {} out of range", cfg.default_group));
  }

  if (!errors.empty()) return out;

  std::vector<CompiledRule> table;
  for (std::size_t g = 0; g < cfg.groups.size(); ++g) {
    for (const auto& rule : cfg.groups[g].rules) table.push_back({g, rule});
  }
  out.policy = ValidatedPolicy(cfg, std::move(table));
  return out;
}

ValidatedPolicy load_policy(std::string_view text) {
  auto outcome = validate_policy(parse_policy(text));
  if (!outcome.ok()) {
    std::string message = "invalid policy:";
    for (const auto& e : outcome.errors) message += "\n  " + e;
    throw std::invalid_argument(message);
  }
  return std::move(*outcome.policy);
}

std::string serialize_policy(const PolicyConfig& cfg) {
  std::string out = fmt::format("method {}\n", to_string(cfg.grouping_method));
  for (const auto& g : cfg.groups) {
    out += fmt::format("group {} {}", g.name, g.share_percent);
    if (!g.rules.empty()) out += format_rule_options(g.rules.front());
    out += '\n';
    for (std::size_t r = 1; r < g.rules.size(); ++r) {
      out += fmt::format("match {}{}\n", g.name, format_rule_options(g.rules[r]));
    }
  }
  if (cfg.default_group < cfg.groups.size()) {
    out += fmt::format("default {}\n", cfg.groups[cfg.default_group].name);
  }
  return out;
}

}  // namespace gwshaper
