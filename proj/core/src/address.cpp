#include "gwshaper/types.hpp"

#include <charconv>

#include <fmt/format.h>

namespace gwshaper {

std::string format_us(SimTime t) {
  const std::int64_t ns = t.ns();
  const std::int64_t whole = ns / 1000;
  const std::int64_t frac = ns % 1000;
  if (frac == 0) return fmt::format("{}", whole);
  if (ns < 0) return fmt::format("-{}.{:03d}", -whole, -frac);
  return fmt::format("{}.{:03d}", whole, frac);
}

std::optional<Ipv4Address> Ipv4Address::parse(std::string_view text) {
  std::uint32_t value = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) {
      if (p == end || *p != '.') return std::nullopt;
      ++p;
    }
    if (p == end || *p < '0' || *p > '9') return std::nullopt;
    unsigned part = 0;
    auto [next, ec] = std::from_chars(p, end, part);
    if (ec != std::errc{} || part > 255 || next - p > 3) return std::nullopt;
    // Leading zeros ("010") are rejected so that formatting round-trips.
    if (next - p > 1 && *p == '0') return std::nullopt;
    value = (value << 8) | part;
    p = next;
  }
  if (p != end) return std::nullopt;
  return Ipv4Address(value);
}

std::string Ipv4Address::to_string() const {
  return fmt::format("{}.{}.{}.{}", value_ >> 24, (value_ >> 16) & 0xff, (value_ >> 8) & 0xff,
                     value_ & 0xff);
}

std::string_view to_string(Protocol p) { return p == Protocol::tcp ? "tcp" : "udp"; }

std::string_view to_string(Direction d) {
  return d == Direction::outgoing ? "outgoing" : "incoming";
}

std::optional<Direction> parse_direction(std::string_view text) {
  if (text == "outgoing") return Direction::outgoing;
  if (text == "incoming") return Direction::incoming;
  return std::nullopt;
}

}  // namespace gwshaper
