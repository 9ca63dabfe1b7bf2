#include "doctest.h"

#include "gwshaper/scenario_io.hpp"

using namespace gwshaper;

namespace {

constexpr std::string_view kText =
    "# office testbed\n"
    "station A 10.0.0.1\n"
    "station B 10.0.0.2\n"
    "server srv 10.0.1.1\n"
    "link wan 4000000\n"
    "placement incoming\n"
    "duration 2.5\n"
    "seed 77\n"
    "classify_cost 2.5\n"
    "jitter 100\n"
    "trace outgoing\n"
    "group a 70 src 10.0.0.1\n"
    "group b 30 src 10.0.0.2\n"
    "default b\n"
    "source bulk srv A port 21 window 4\n"
    "source request-response B srv port 80 response 3000 delay 250 start 0.5 stop 2\n";

int error_line(std::string_view text) {
  try {
    parse_scenario(text);
  } catch (const ScenarioParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("parse a full scenario") {
  const auto s = parse_scenario(kText);
  REQUIRE(s.stations.size() == 2);
  CHECK(s.stations[1].address == Ipv4Address(10, 0, 0, 2));
  CHECK(s.server.name == "srv");
  CHECK(s.wan_rate == 4'000'000);
  CHECK(s.lan_rate == 10'000'000);
  CHECK(s.placement == Placement::incoming_bound);
  CHECK(s.duration == SimTime::from_ms(2500));
  CHECK(s.seed == 77);
  CHECK(s.classify_cost == SimTime::from_ns(2500));
  CHECK(s.jitter == SimTime::from_us(100));
  CHECK(s.trace_bound == Direction::outgoing);
  CHECK(s.sniffed_bound() == Direction::outgoing);
  REQUIRE(s.policy);
  CHECK(s.policy->default_group() == 1);
  REQUIRE(s.sources.size() == 2);
  CHECK(s.sources[0].window == 4);
  CHECK(s.sources[1].kind == SourceKind::request_response);
  CHECK(s.sources[1].response_size == 3000);
  CHECK(s.sources[1].response_delay == SimTime::from_us(250));
  CHECK(s.sources[1].start_at == SimTime::from_ms(500));
  CHECK(s.sources[1].stop_at == SimTime::from_seconds(2));
  CHECK(validate_scenario(s).empty());
}

TEST_CASE("serialize then parse is the identity") {
  const auto s = parse_scenario(kText);
  const auto text = serialize_scenario(s);
  const auto again = parse_scenario(text);
  CHECK(again == s);
  CHECK(serialize_scenario(again) == text);
  CHECK(scenario_digest(again) == scenario_digest(s));
  CHECK(scenario_digest(s).size() == 16);
}

TEST_CASE("digest changes with any input") {
  auto s = parse_scenario(kText);
  const auto d = scenario_digest(s);
  s.seed = 78;
  CHECK(scenario_digest(s) != d);
}

TEST_CASE("errors name the line") {
  CHECK(error_line("station A 10.0.0.1\nplacement sideways\n") == 2);
  CHECK(error_line("seed 1\nseed 2\n") == 2);
  CHECK(error_line("link wan 1\nlink wan 2\n") == 2);
  CHECK(error_line("link fiber 100\n") == 1);
  CHECK(error_line("source bulk A srv delay 5\n") == 1);
  CHECK(error_line("source bulk A srv port 21 port 80\n") == 1);
  CHECK(error_line("source ping A srv\n") == 1);
  CHECK(error_line("station A 10.0.0.999\n") == 1);
  CHECK(error_line("duration soon\n") == 1);
  CHECK(error_line("seed 1\n\ngroup a 100 src nope\n") == 3);
  CHECK(error_line("hub 10\n") == 1);
  // Policy semantic failures have no single line.
  CHECK(error_line("group a 60\ngroup b 50\n") == 0);
}
