#ifndef GWSHAPER_TYPES_HPP
#define GWSHAPER_TYPES_HPP

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace gwshaper {

/// Simulated time with nanosecond resolution. Interfaces speak microseconds;
/// the finer tick keeps serialization times exact at 100 Mbps and above.
class SimTime {
 public:
  constexpr SimTime() = default;

  static constexpr SimTime from_ns(std::int64_t ns) { return SimTime(ns); }
  static constexpr SimTime from_us(std::int64_t us) { return SimTime(us * 1000); }
  static constexpr SimTime from_ms(std::int64_t ms) { return SimTime(ms * 1000000); }
  static constexpr SimTime from_seconds(double s) {
    return SimTime(static_cast<std::int64_t>(s * 1e9 + (s >= 0 ? 0.5 : -0.5)));
  }
  static constexpr SimTime max() { return SimTime(INT64_MAX); }

  constexpr std::int64_t ns() const { return ns_; }
  constexpr double us() const { return static_cast<double>(ns_) / 1e3; }
  constexpr double seconds() const { return static_cast<double>(ns_) / 1e9; }

  constexpr SimTime operator+(SimTime o) const { return SimTime(ns_ + o.ns_); }
  constexpr SimTime operator-(SimTime o) const { return SimTime(ns_ - o.ns_); }
  constexpr SimTime& operator+=(SimTime o) {
    ns_ += o.ns_;
    return *this;
  }
  constexpr auto operator<=>(const SimTime&) const = default;

 private:
  constexpr explicit SimTime(std::int64_t ns) : ns_(ns) {}
  std::int64_t ns_ = 0;
};

/// Time a frame of `bytes` occupies a link of `rate_bps`, rounded up to 1 ns.
constexpr SimTime serialization_time(std::uint32_t bytes, std::int64_t rate_bps) {
  const std::int64_t bits_ns = static_cast<std::int64_t>(bytes) * 8 * 1'000'000'000LL;
  return SimTime::from_ns((bits_ns + rate_bps - 1) / rate_bps);
}

/// Renders a time as microseconds: integral when exact, else three decimals.
std::string format_us(SimTime t);

class Ipv4Address {
 public:
  constexpr Ipv4Address() = default;
  constexpr explicit Ipv4Address(std::uint32_t host_order) : value_(host_order) {}
  constexpr Ipv4Address(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d)
      : value_((std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) | (std::uint32_t{c} << 8) | d) {}

  /// Dotted-quad only; no shorthand forms.
  static std::optional<Ipv4Address> parse(std::string_view text);

  constexpr std::uint32_t value() const { return value_; }
  std::string to_string() const;

  constexpr auto operator<=>(const Ipv4Address&) const = default;

 private:
  std::uint32_t value_ = 0;
};

enum class Protocol : std::uint8_t { tcp, udp };

/// Which bound of the gateway a packet is crossing: LAN to Internet is
/// outgoing, Internet to LAN is incoming.
enum class Direction : std::uint8_t { outgoing, incoming };

std::string_view to_string(Protocol p);
std::string_view to_string(Direction d);
std::optional<Direction> parse_direction(std::string_view text);

inline constexpr std::uint32_t kMinFrameBytes = 64;
inline constexpr std::uint32_t kMaxFrameBytes = 1500;

}  // namespace gwshaper

#endif  // GWSHAPER_TYPES_HPP
