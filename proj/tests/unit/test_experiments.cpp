#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "gwshaper/experiments.hpp"

using namespace gwshaper;

namespace {

// Short runs keep the suite fast; the acceptance binary uses full lengths.
const Overrides kShort{{"duration", "1"}};

Overrides with_short(Overrides o) {
  o.insert(kShort.begin(), kShort.end());
  return o;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("variant counts") {
  const auto e1 = run_experiment(1, kShort);
  CHECK(e1.variants.size() == 10);
  CHECK(e1.baseline.has_value());
  const auto e3 = run_experiment(3, kShort);
  CHECK(e3.variants.size() == 4);
  CHECK(e3.baseline.has_value());
  const auto restricted = run_experiment(1, with_short({{"X", "50"}}));
  CHECK(restricted.variants.size() == 2);
  CHECK(restricted.variants[0].label == "X=50 incoming");
  CHECK(restricted.variants[1].label == "X=50 outgoing");
  CHECK(run_experiment(2, with_short({{"X", "60,70"}})).variants.size() == 4);
  CHECK(run_experiment(4, kShort).variants.size() == 5);
}

TEST_CASE("labels are sorted and digests distinct") {
  const auto e = run_experiment(1, kShort);
  std::set<std::string> digests;
  for (std::size_t i = 0; i < e.variants.size(); ++i) {
    if (i > 0) CHECK(e.variants[i - 1].label < e.variants[i].label);
    digests.insert(e.variants[i].digest);
  }
  digests.insert(e.baseline->digest);
  CHECK(digests.size() == e.variants.size() + 1);
}

TEST_CASE("experiment 3 keeps the web share fixed") {
  const auto e = run_experiment(3, kShort);
  for (const auto& v : e.variants) {
    REQUIRE(v.scenario.policy);
    CHECK(v.scenario.policy->share_percent(0) == 50);
  }
  CHECK(e.variants.back().label == "k=4");
}

TEST_CASE("bad requests") {
  CHECK_THROWS_AS(run_experiment(0), ExperimentError);
  CHECK_THROWS_AS(run_experiment(5), ExperimentError);
  CHECK_THROWS_AS(run_experiment(1, {{"colour", "blue"}}), ExperimentError);
  CHECK_THROWS_AS(run_experiment(1, {{"X", "0"}}), ExperimentError);
  CHECK_THROWS_AS(run_experiment(1, {{"X", "5o"}}), ExperimentError);
  CHECK_THROWS_AS(run_experiment(1, {{"duration", "-1"}}), ExperimentError);
}

TEST_CASE("overrides reach the scenarios") {
  const auto p = apply_overrides({}, {{"wireless_rate", "2000000"}, {"window", "3"}, {"classify_cost", "0"}});
  CHECK(p.wireless_rate == 2'000'000);
  CHECK(p.window == 3);
  CHECK(p.classify_cost_us == 0.0);
  const auto s = wireless_scenario(p, 70, Placement::outgoing_bound);
  CHECK(s.wan_rate == 2'000'000);
  CHECK(s.sources.at(0).window == 3);
  CHECK(s.classify_cost == SimTime{});
}

TEST_CASE("pure function of id, overrides and seed") {
  const auto a = run_experiment(2, with_short({{"X", "70"}}), 5);
  const auto b = run_experiment(2, with_short({{"X", "70"}}), 5);
  CHECK(experiment_csv(a) == experiment_csv(b));
  CHECK(experiment_plot_data(a) == experiment_plot_data(b));
  const auto c = run_experiment(2, with_short({{"X", "70"}}), 6);
  CHECK(c.variants[0].digest != a.variants[0].digest);
}

TEST_CASE("csv rows") {
  SUBCASE("empty result is header only") {
    ExperimentResult empty;
    empty.id = 1;
    CHECK(experiment_csv(empty) == std::string(kExperimentCsvHeader) + "\n");
  }
  SUBCASE("one row per variant and group") {
    const auto e = run_experiment(1, kShort);
    const auto text = experiment_csv(e);
    // 11 runs, two groups each.
    CHECK(count_lines(text) == 1 + 11 * 2);
    const auto rows = parse_experiment_csv(text);
    REQUIRE(rows.size() == 22);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i - 1].label <= rows[i].label);
    CHECK(rows.front().experiment == 1);
  }
  SUBCASE("round trip keeps every number") {
    const auto e = run_experiment(3, with_short({{"k", "2"}}));
    const auto rows = parse_experiment_csv(experiment_csv(e));
    std::vector<const Variant*> runs{&*e.baseline};
    for (const auto& v : e.variants) runs.push_back(&v);
    std::sort(runs.begin(), runs.end(), [](auto* x, auto* y) { return x->label < y->label; });
    std::size_t i = 0;
    for (const auto* v : runs) {
      const auto& b = v->report.bound(v->bound);
      for (std::size_t g = 0; g < b.groups.size(); ++g, ++i) {
        REQUIRE(i < rows.size());
        CHECK(rows[i].label == v->label);
        CHECK(rows[i].group == b.group_names[g]);
        CHECK(rows[i].bytes == b.groups[g].bytes);
        CHECK(rows[i].packets == b.groups[g].packets);
        CHECK(rows[i].drops == b.groups[g].drops);
        CHECK(rows[i].utilization == b.utilization);
        CHECK(rows[i].mean_delay_us == b.groups[g].delay.stats().mean_us);
        CHECK(rows[i].delay_stddev_us == b.groups[g].delay.stats().stddev_us);
      }
    }
    CHECK(i == rows.size());
  }
  SUBCASE("malformed input") {
    CHECK_THROWS(parse_experiment_csv("nope\n"));
    CHECK_THROWS(parse_experiment_csv(std::string(kExperimentCsvHeader) + "\n1,a,b,c\n"));
  }
}

TEST_CASE("files") {
  const auto dir = std::filesystem::temp_directory_path() / "gwshaper_unit_files";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto e = run_experiment(1, with_short({{"X", "80"}}));
  emit_csv(e, dir / "e.csv");
  emit_plot_data(e, dir / "e.dat");
  CHECK(slurp(dir / "e.csv") == experiment_csv(e));
  CHECK(slurp(dir / "e.dat") == experiment_plot_data(e));
  CHECK(count_lines(slurp(dir / "e.dat")) == 2 + 2);
  CHECK_THROWS_AS(emit_csv(e, dir / "missing" / "e.csv"), std::system_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("utilization comparison") {
  SUBCASE("baseline against itself") {
    auto e = run_experiment(1, with_short({{"X", "50"}}));
    e.variants = {*e.baseline};
    const auto cmp = compare_utilization(e);
    REQUIRE(cmp.size() == 1);
    CHECK(cmp[0].delta == 0.0);
  }
  SUBCASE("no baseline") {
    ExperimentResult e;
    CHECK_THROWS_AS(compare_utilization(e), ExperimentError);
  }
  SUBCASE("outgoing variants lose little") {
    const auto e = run_experiment(1, with_short({{"duration", "3"}}));
    for (const auto& c : compare_utilization(e)) {
      if (c.label.ends_with("outgoing")) CHECK(std::abs(c.delta) < 0.03);
      CHECK(c.delta == doctest::Approx(c.utilization - c.baseline_utilization));
    }
  }
}
