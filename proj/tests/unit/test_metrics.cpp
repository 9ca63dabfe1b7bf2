#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "gwshaper/metrics.hpp"

using namespace gwshaper;

TEST_CASE("utilization arithmetic") {
  const auto ten_s = SimTime::from_seconds(10);
  CHECK(utilization(6'250'000, 10'000'000, ten_s) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(utilization(0, 10'000'000, ten_s) == 0.0);
  CHECK(utilization(100'000'000, 10'000'000, ten_s) == 1.0);
  CHECK_THROWS_AS(utilization(1, 10'000'000, SimTime{}), std::invalid_argument);
  CHECK_THROWS_AS(utilization(1, 0, ten_s), std::invalid_argument);
}

TEST_CASE("delay accumulator") {
  DelayAccumulator one;
  one.add(1200.0);
  const auto s = one.stats();
  CHECK(s.count == 1);
  CHECK(s.mean_us == 1200.0);
  CHECK(s.stddev_us == 0.0);
  CHECK(s.max_us == 1200.0);

  CHECK(DelayAccumulator{}.stats() == DelayStats{});
  CHECK(DelayAccumulator{}.stats().empty());

  DelayAccumulator many;
  for (double v : {2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0}) many.add(v);
  CHECK(many.stats().mean_us == doctest::Approx(5.0));
  CHECK(many.stats().stddev_us == doctest::Approx(2.0));
  CHECK(many.stats().max_us == 9.0);
}

TEST_CASE("delay_stats by group") {
  BoundReport b;
  b.groups.resize(2);
  b.groups[1].delay.add(1200.0);
  CHECK(delay_stats(b, 0).empty());
  CHECK(delay_stats(b, 1).mean_us == 1200.0);
  CHECK_THROWS_AS(delay_stats(b, 2), std::out_of_range);
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.0, 0.5, 1.0 / 3.0, 0.99584123456789, 1e-9, 123456.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0) == "1");
}
