#ifndef GWSHAPER_SCENARIO_IO_HPP
#define GWSHAPER_SCENARIO_IO_HPP

// Scenario files reuse the policy grammar (group/match/default/method lines
// make up the policy) and add testbed directives:
//
//   station <name> <ip>
//   server <name> <ip>
//   link lan|wan|access <bits-per-second>
//   placement outgoing|incoming|disabled
//   duration <seconds>
//   seed <n>
//   classify_cost <us>
//   jitter <us>
//   queue_capacity <packets>
//   tx_depth <packets>
//   quantum_unit <bytes>
//   trace outgoing|incoming
//   source bulk <from> <to> [port N] [proto tcp|udp] [size B] [window W] [start S] [stop S]
//   source request-response <station> <server> [port N] [proto tcp|udp] [size B]
//          [request B] [response B] [delay US] [start S] [stop S]

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "gwshaper/netsim.hpp"

namespace gwshaper {

class ScenarioParseError : public std::runtime_error {
 public:
  ScenarioParseError(int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

/// Throws ScenarioParseError for syntax problems, including policy syntax
/// and policy validation failures.
Scenario parse_scenario(std::string_view text);

/// Canonical text; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& scenario);

/// 64-bit FNV-1a of the canonical text, as 16 hex digits.
std::string scenario_digest(const Scenario& scenario);

}  // namespace gwshaper

#endif  // GWSHAPER_SCENARIO_IO_HPP
