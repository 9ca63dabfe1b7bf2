#include <benchmark/benchmark.h>

#include "gwshaper/experiments.hpp"
#include "gwshaper/netsim.hpp"

using namespace gwshaper;

namespace {

// One simulated second of the two-station ftp testbed.
void BM_SimulateSecond(benchmark::State& state) {
  ExperimentParams p;
  p.duration_s = 1.0;
  const auto placement = static_cast<Placement>(state.range(0));
  const auto scenario = address_grouping_scenario(p, 70, placement);
  std::uint64_t bytes = 0;
  for (auto _ : state) {
    const auto r = run(scenario);
    bytes = r.outgoing.bytes + r.incoming.bytes;
    benchmark::DoNotOptimize(bytes);
  }
  state.counters["wire_bytes"] = static_cast<double>(bytes);
}
BENCHMARK(BM_SimulateSecond)
    ->Arg(static_cast<int>(Placement::disabled))
    ->Arg(static_cast<int>(Placement::outgoing_bound))
    ->Arg(static_cast<int>(Placement::incoming_bound))
    ->Unit(benchmark::kMillisecond);

}  // namespace
