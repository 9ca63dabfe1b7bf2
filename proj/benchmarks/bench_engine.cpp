#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "gwshaper/engine.hpp"

using namespace gwshaper;

namespace {

ValidatedPolicy policy_with_rules(int rules) {
  std::string text = "group hit 50 port 80\n";
  for (int i = 0; i < rules; ++i) text += "match hit src 192.168." + std::to_string(i % 250) + ".0/24\n";
  text += "group rest 50\ndefault rest\n";
  return load_policy(text);
}

std::vector<Packet> random_packets(std::size_t n) {
  std::mt19937_64 rng(1);
  std::vector<Packet> out(n);
  for (auto& p : out) {
    p.src_addr = Ipv4Address(static_cast<std::uint32_t>(rng()));
    p.dst_addr = Ipv4Address(10, 0, 1, 1);
    p.src_port = 40000;
    p.dst_port = rng() % 2 ? 80 : 21;
    p.size = 64 + static_cast<std::uint32_t>(rng() % 1437);
  }
  return out;
}

void BM_Classify(benchmark::State& state) {
  const auto policy = policy_with_rules(static_cast<int>(state.range(0)));
  const auto packets = random_packets(4096);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(classify(packets[i++ & 4095], policy, Direction::outgoing));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Classify)->Arg(2)->Arg(8)->Arg(64);

void BM_EnqueueAndDrain(benchmark::State& state) {
  const auto policy = load_policy("group a 70 src 10.0.0.1\ngroup b 30 src 10.0.0.2\n");
  std::vector<Packet> packets(1024);
  for (std::size_t i = 0; i < packets.size(); ++i) {
    packets[i].src_addr = Ipv4Address(10, 0, 0, static_cast<std::uint8_t>(1 + i % 2));
    packets[i].size = 1500;
  }
  for (auto _ : state) {
    ShapingEngine e(policy, {.queue_capacity = 1024});
    for (const auto& p : packets) e.enqueue(p, SimTime{});
    while (auto p = e.pop_for_wire(SimTime{})) benchmark::DoNotOptimize(p->id);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(packets.size()));
}
BENCHMARK(BM_EnqueueAndDrain);

}  // namespace
