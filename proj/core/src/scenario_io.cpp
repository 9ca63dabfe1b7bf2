#include "gwshaper/scenario_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <set>
#include <span>
#include <vector>

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

class LineParser {
 public:
  explicit LineParser(int line) : line_(line) {}

  [[noreturn]] void fail(const std::string& msg) const { throw ScenarioParseError(line_, msg); }

  template <typename T>
  T integer(std::string_view s, std::string_view what) const {
    T value{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) {
      fail(fmt::format("invalid {} '{}'", what, s));
    }
    return value;
  }

  double real(std::string_view s, std::string_view what) const {
    const std::string copy(s);
    char* end = nullptr;
    const double v = std::strtod(copy.c_str(), &end);
    if (copy.empty() || end != copy.c_str() + copy.size() || !std::isfinite(v)) {
      fail(fmt::format("invalid {} '{}'", what, s));
    }
    return v;
  }

  SimTime seconds(std::string_view s, std::string_view what) const {
    return SimTime::from_seconds(real(s, what));
  }

  SimTime micros(std::string_view s, std::string_view what) const {
    return SimTime::from_ns(static_cast<std::int64_t>(std::llround(real(s, what) * 1000.0)));
  }

  Ipv4Address address(std::string_view s) const {
    auto a = Ipv4Address::parse(s);
    if (!a) fail(fmt::format("invalid IPv4 address '{}'", s));
    return *a;
  }

  Protocol protocol(std::string_view s) const {
    if (s == "tcp") return Protocol::tcp;
    if (s == "udp") return Protocol::udp;
    fail(fmt::format("invalid protocol '{}'", s));
  }

  Direction direction(std::string_view s) const {
    auto d = parse_direction(s);
    if (!d) fail(fmt::format("expected outgoing or incoming, got '{}'", s));
    return *d;
  }

 private:
  int line_;
};

SourceSpec parse_source(std::span<const std::string_view> args, const LineParser& lp) {
  if (args.size() < 3) lp.fail("expected 'source <kind> <from> <to> [options]'");
  SourceSpec src;
  if (args[0] == "bulk") {
    src.kind = SourceKind::bulk;
  } else if (args[0] == "request-response") {
    src.kind = SourceKind::request_response;
  } else {
    lp.fail(fmt::format("unknown source kind '{}'", args[0]));
  }
  src.station = std::string(args[1]);
  src.peer = std::string(args[2]);

  std::set<std::string_view> seen;
  for (std::size_t i = 3; i < args.size(); i += 2) {
    const auto key = args[i];
    if (!seen.insert(key).second) lp.fail(fmt::format("duplicate key '{}'", key));
    if (i + 1 >= args.size()) lp.fail(fmt::format("missing value after '{}'", key));
    const auto v = args[i + 1];
    const bool rr = src.kind == SourceKind::request_response;
    if (key == "port") {
      src.port = lp.integer<std::uint16_t>(v, "port");
    } else if (key == "proto") {
      src.protocol = lp.protocol(v);
    } else if (key == "size") {
      src.packet_size = lp.integer<std::uint32_t>(v, "size");
    } else if (key == "start") {
      src.start_at = lp.seconds(v, "start time");
    } else if (key == "stop") {
      src.stop_at = lp.seconds(v, "stop time");
    } else if (key == "window" && !rr) {
      src.window = lp.integer<std::uint32_t>(v, "window");
    } else if (key == "request" && rr) {
      src.request_size = lp.integer<std::uint32_t>(v, "request size");
    } else if (key == "response" && rr) {
      src.response_size = lp.integer<std::uint32_t>(v, "response size");
    } else if (key == "delay" && rr) {
      src.response_delay = lp.micros(v, "response delay");
    } else {
      lp.fail(fmt::format("unknown {} source option '{}'", to_string(src.kind), key));
    }
  }
  return src;
}

}  // namespace

ScenarioParseError::ScenarioParseError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}", line, message) : message), line_(line) {}

Scenario parse_scenario(std::string_view text) {
  Scenario s;
  std::string policy_text;
  bool has_policy = false;
  bool server_seen = false;
  std::set<std::string_view> singletons;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tokens = split_tokens(line);
    if (tokens.empty()) {
      policy_text += '\n';
      continue;
    }
    const auto directive = tokens[0];
    if (directive == "group" || directive == "match" || directive == "default" || directive == "method") {
      policy_text.append(raw);
      policy_text += '\n';
      has_policy = true;
      continue;
    }
    policy_text += '\n';

    const LineParser lp(line_no);
    const std::span<const std::string_view> args(tokens.data() + 1, tokens.size() - 1);
    auto expect = [&](std::size_t n) {
      if (args.size() != n) lp.fail(fmt::format("'{}' takes {} argument(s)", directive, n));
    };
    auto once = [&] {
      if (!singletons.insert(directive).second) lp.fail(fmt::format("duplicate key '{}'", directive));
    };

    if (directive == "station") {
      expect(2);
      s.stations.push_back({std::string(args[0]), lp.address(args[1])});
    } else if (directive == "server") {
      expect(2);
      if (server_seen) lp.fail("duplicate key 'server'");
      server_seen = true;
      s.server = {std::string(args[0]), lp.address(args[1])};
    } else if (directive == "link") {
      expect(2);
      std::int64_t* target = args[0] == "lan"      ? &s.lan_rate
                             : args[0] == "wan"    ? &s.wan_rate
                             : args[0] == "access" ? &s.access_rate
                                                   : nullptr;
      if (!target) lp.fail(fmt::format("unknown link '{}'", args[0]));
      if (!singletons.insert(args[0]).second) lp.fail(fmt::format("duplicate key 'link {}'", args[0]));
      *target = lp.integer<std::int64_t>(args[1], "link rate");
    } else if (directive == "placement") {
      expect(1);
      once();
      if (args[0] == "outgoing") {
        s.placement = Placement::outgoing_bound;
      } else if (args[0] == "incoming") {
        s.placement = Placement::incoming_bound;
      } else if (args[0] == "disabled") {
        s.placement = Placement::disabled;
      } else {
        lp.fail(fmt::format("unknown placement '{}'", args[0]));
      }
    } else if (directive == "duration") {
      expect(1);
      once();
      s.duration = lp.seconds(args[0], "duration");
    } else if (directive == "seed") {
      expect(1);
      once();
      s.seed = lp.integer<std::uint64_t>(args[0], "seed");
    } else if (directive == "classify_cost") {
      expect(1);
      once();
      s.classify_cost = lp.micros(args[0], "classify cost");
    } else if (directive == "jitter") {
      expect(1);
      once();
      s.jitter = lp.micros(args[0], "jitter");
    } else if (directive == "queue_capacity") {
      expect(1);
      once();
      s.queue_capacity = lp.integer<std::size_t>(args[0], "queue capacity");
    } else if (directive == "tx_depth") {
      expect(1);
      once();
      s.tx_depth = lp.integer<std::size_t>(args[0], "transmission queue depth");
    } else if (directive == "quantum_unit") {
      expect(1);
      once();
      s.quantum_unit = lp.integer<std::int64_t>(args[0], "quantum unit");
    } else if (directive == "trace") {
      expect(1);
      once();
      s.trace_bound = lp.direction(args[0]);
    } else if (directive == "source") {
      s.sources.push_back(parse_source(args, lp));
    } else {
      lp.fail(fmt::format("unknown directive '{}'", directive));
    }
  }

  if (has_policy) {
    PolicyConfig cfg;
    try {
      cfg = parse_policy(policy_text);
    } catch (const PolicyParseError& e) {
      throw ScenarioParseError(e.line(), e.what());
    }
    auto outcome = validate_policy(cfg);
    if (!outcome.ok()) {
      std::string msg = "invalid policy:";
      for (const auto& e : outcome.errors) msg += "\n  " + e;
      throw ScenarioParseError(0, msg);
    }
    s.policy = std::move(outcome.policy);
  }
  return s;
}

std::string serialize_scenario(const Scenario& s) {
  std::string out;
  for (const auto& st : s.stations) out += fmt::format("station {} {}\n", st.name, st.address.to_string());
  out += fmt::format("server {} {}\n", s.server.name, s.server.address.to_string());
  out += fmt::format("link lan {}\nlink wan {}\nlink access {}\n", s.lan_rate, s.wan_rate, s.access_rate);
  out += fmt::format("placement {}\n", to_string(s.placement));
  out += fmt::format("duration {}\n", format_double(s.duration.seconds()));
  out += fmt::format("seed {}\n", s.seed);
  out += fmt::format("classify_cost {}\n", format_us(s.classify_cost));
  out += fmt::format("jitter {}\n", format_us(s.jitter));
  out += fmt::format("queue_capacity {}\ntx_depth {}\nquantum_unit {}\n", s.queue_capacity, s.tx_depth,
                     s.quantum_unit);
  if (s.trace_bound) out += fmt::format("trace {}\n", to_string(*s.trace_bound));
  for (const auto& src : s.sources) {
    out += fmt::format("source {} {} {} port {} proto {} size {}", to_string(src.kind), src.station, src.peer,
                       src.port, to_string(src.protocol), src.packet_size);
    if (src.kind == SourceKind::bulk) {
      out += fmt::format(" window {}", src.window);
    } else {
      out += fmt::format(" request {} response {} delay {}", src.request_size, src.response_size,
                         format_us(src.response_delay));
    }
    out += fmt::format(" start {}", format_double(src.start_at.seconds()));
    if (src.stop_at != SimTime::max()) out += fmt::format(" stop {}", format_double(src.stop_at.seconds()));
    out += '\n';
  }
  if (s.policy) out += serialize_policy(*s.policy);
  return out;
}

std::string scenario_digest(const Scenario& scenario) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize_scenario(scenario)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace gwshaper
