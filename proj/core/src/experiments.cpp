#include "gwshaper/experiments.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <initializer_list>
#include <system_error>

#include <fmt/format.h>

#include "gwshaper/scenario_io.hpp"

namespace gwshaper {

namespace {

constexpr std::uint16_t kWebPort = 80;
constexpr std::uint16_t kFtpPort = 21;

template <typename T>
T parse_integer(const std::string& key, std::string_view v) {
  T value{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
  if (v.empty() || ec != std::errc{} || p != v.data() + v.size()) {
    throw ExperimentError(fmt::format("'{}': invalid integer '{}'", key, v));
  }
  return value;
}

double parse_nonnegative(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d)) {
    throw ExperimentError(fmt::format("'{}': invalid number '{}'", key, v));
  }
  if (d < 0) throw ExperimentError(fmt::format("'{}': negative value '{}'", key, v));
  return d;
}

std::vector<int> parse_int_list(const std::string& key, std::string_view v) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    const auto comma = v.find(',', pos);
    const auto item = v.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    out.push_back(parse_integer<int>(key, item));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

Scenario testbed(const ExperimentParams& p, Placement placement) {
  Scenario s;
  s.stations = {{"A", Ipv4Address(10, 0, 0, 1)}, {"B", Ipv4Address(10, 0, 0, 2)}};
  s.server = {"server", Ipv4Address(10, 0, 1, 1)};
  s.lan_rate = p.lan_rate;
  s.wan_rate = p.wan_rate;
  s.access_rate = p.access_rate;
  s.placement = placement;
  s.classify_cost = SimTime::from_ns(static_cast<std::int64_t>(std::llround(p.classify_cost_us * 1000.0)));
  s.duration = SimTime::from_seconds(p.duration_s);
  s.seed = p.seed;
  s.queue_capacity = p.queue_capacity;
  s.tx_depth = p.tx_depth;
  s.jitter = SimTime::from_ns(static_cast<std::int64_t>(std::llround(p.jitter_us * 1000.0)));
  return s;
}

SourceSpec bulk(std::string from, std::string to, std::uint16_t port, const ExperimentParams& p) {
  SourceSpec src;
  src.kind = SourceKind::bulk;
  src.station = std::move(from);
  src.peer = std::move(to);
  src.port = port;
  src.window = p.window;
  return src;
}

std::string placement_label(Placement pl) { return std::string(to_string(pl)); }

Direction reported_bound(Placement pl) {
  return pl == Placement::incoming_bound ? Direction::incoming : Direction::outgoing;
}

void check_share(int x, std::string_view what) {
  if (x < 1 || x > 99) throw ExperimentError(fmt::format("{} {} outside [1, 99]", what, x));
}

struct Job {
  std::string label;
  Direction bound;
  Scenario scenario;
};

Variant execute(Job job) {
  Variant v;
  v.label = std::move(job.label);
  v.bound = job.bound;
  v.digest = scenario_digest(job.scenario);
  v.report = run(job.scenario);
  v.scenario = std::move(job.scenario);
  return v;
}

}  // namespace

ExperimentParams apply_overrides(ExperimentParams p, const Overrides& overrides) {
  for (const auto& [key, value] : overrides) {
    if (key == "X") {
      p.x_values = parse_int_list(key, value);
    } else if (key == "k") {
      p.ftp_sessions = parse_int_list(key, value);
    } else if (key == "web_share") {
      p.web_share = parse_integer<int>(key, value);
    } else if (key == "duration") {
      p.duration_s = parse_nonnegative(key, value);
      if (p.duration_s == 0) throw ExperimentError("'duration': must be positive");
    } else if (key == "classify_cost") {
      p.classify_cost_us = parse_nonnegative(key, value);
    } else if (key == "lan_rate") {
      p.lan_rate = parse_integer<std::int64_t>(key, value);
    } else if (key == "wan_rate") {
      p.wan_rate = parse_integer<std::int64_t>(key, value);
    } else if (key == "access_rate") {
      p.access_rate = parse_integer<std::int64_t>(key, value);
    } else if (key == "wireless_rate") {
      p.wireless_rate = parse_integer<std::int64_t>(key, value);
    } else if (key == "queue_capacity") {
      p.queue_capacity = parse_integer<std::size_t>(key, value);
    } else if (key == "tx_depth") {
      p.tx_depth = parse_integer<std::size_t>(key, value);
    } else if (key == "window") {
      p.window = parse_integer<std::uint32_t>(key, value);
    } else if (key == "jitter") {
      p.jitter_us = parse_nonnegative(key, value);
    } else {
      throw ExperimentError(fmt::format("unknown parameter '{}'", key));
    }
  }
  for (int x : p.x_values) check_share(x, "X");
  check_share(p.web_share, "web_share");
  for (int k : p.ftp_sessions) {
    if (k < 1) throw ExperimentError(fmt::format("ftp session count {} must be at least 1", k));
  }
  if (p.x_values.empty()) throw ExperimentError("X needs at least one value");
  if (p.ftp_sessions.empty()) throw ExperimentError("k needs at least one value");
  return p;
}

Scenario address_grouping_scenario(const ExperimentParams& p, int x, Placement placement) {
  check_share(x, "X");
  Scenario s = testbed(p, placement);
  // ftp in both directions per station so that either bound carries bulk data.
  s.sources = {bulk("A", "server", kFtpPort, p), bulk("B", "server", kFtpPort, p),
               bulk("server", "A", kFtpPort, p), bulk("server", "B", kFtpPort, p)};
  s.policy = load_policy(fmt::format(
      "method by-address\n"
      "group stationA {} src 10.0.0.1\n"
      "group stationB {} src 10.0.0.2\n"
      "default stationB\n",
      x, 100 - x));
  return s;
}

Scenario application_grouping_scenario(const ExperimentParams& p, int x, Placement placement) {
  check_share(x, "X");
  Scenario s = testbed(p, placement);
  s.sources = {bulk("A", "server", kWebPort, p), bulk("B", "server", kFtpPort, p),
               bulk("server", "A", kWebPort, p), bulk("server", "B", kFtpPort, p)};
  s.policy = load_policy(fmt::format(
      "method by-application\n"
      "group web {} port 80\n"
      "group ftp {} port 21\n"
      "default ftp\n",
      x, 100 - x));
  return s;
}

Scenario qos_load_scenario(const ExperimentParams& p, int ftp_sessions, Placement placement) {
  Scenario s = testbed(p, placement);
  s.sources.push_back(bulk("A", "server", kWebPort, p));
  for (int i = 0; i < ftp_sessions; ++i) {
    s.sources.push_back(bulk(i % 2 == 0 ? "A" : "B", "server", kFtpPort, p));
  }
  s.policy = load_policy(fmt::format(
      "method by-application\n"
      "group web {} port 80\n"
      "group ftp {} port 21\n"
      "default ftp\n",
      p.web_share, 100 - p.web_share));
  return s;
}

Scenario wireless_scenario(const ExperimentParams& p, int x, Placement placement) {
  ExperimentParams wireless = p;
  wireless.lan_rate = p.wireless_rate;
  wireless.wan_rate = p.wireless_rate;
  return address_grouping_scenario(wireless, x, placement);
}

ExperimentResult run_experiment(int id, const Overrides& overrides, std::uint64_t seed) {
  if (id < 1 || id > 4) throw ExperimentError(fmt::format("unknown experiment {}", id));
  ExperimentParams p;
  p.seed = seed;
  p = apply_overrides(p, overrides);

  std::vector<Job> jobs;
  Job baseline;
  auto sweep = [&](auto make, std::initializer_list<Placement> placements) {
    for (int x : p.x_values) {
      for (Placement pl : placements) {
        jobs.push_back({fmt::format("X={} {}", x, placement_label(pl)), reported_bound(pl), make(p, x, pl)});
      }
    }
    baseline = {"baseline", Direction::outgoing, make(p, p.x_values.front(), Placement::disabled)};
  };

  switch (id) {
    case 1:
      sweep(address_grouping_scenario, {Placement::outgoing_bound, Placement::incoming_bound});
      break;
    case 2:
      sweep(application_grouping_scenario, {Placement::outgoing_bound, Placement::incoming_bound});
      break;
    case 3: {
      for (int k : p.ftp_sessions) {
        jobs.push_back({fmt::format("k={}", k), Direction::outgoing,
                        qos_load_scenario(p, k, Placement::outgoing_bound)});
      }
      const int heaviest = *std::max_element(p.ftp_sessions.begin(), p.ftp_sessions.end());
      baseline = {"baseline", Direction::outgoing, qos_load_scenario(p, heaviest, Placement::disabled)};
      break;
    }
    case 4:
      sweep(wireless_scenario, {Placement::outgoing_bound});
      break;
  }

  std::vector<std::future<Variant>> pending;
  pending.reserve(jobs.size() + 1);
  for (auto& job : jobs) pending.push_back(std::async(std::launch::async, execute, std::move(job)));
  auto baseline_future = std::async(std::launch::async, execute, std::move(baseline));

  ExperimentResult result;
  result.id = id;
  for (auto& f : pending) result.variants.push_back(f.get());
  result.baseline = baseline_future.get();
  std::sort(result.variants.begin(), result.variants.end(),
            [](const Variant& a, const Variant& b) { return a.label < b.label; });
  return result;
}

std::vector<UtilizationComparison> compare_utilization(const ExperimentResult& result) {
  if (!result.baseline) throw ExperimentError("comparison needs a baseline run");
  std::vector<UtilizationComparison> out;
  for (const auto& v : result.variants) {
    UtilizationComparison c;
    c.label = v.label;
    const auto& b = v.report.bound(v.bound);
    c.bytes = b.bytes;
    c.utilization = b.utilization;
    c.baseline_utilization = result.baseline->report.bound(v.bound).utilization;
    c.delta = c.utilization - c.baseline_utilization;
    out.push_back(std::move(c));
  }
  return out;
}

std::string experiment_csv(const ExperimentResult& result) {
  std::vector<const Variant*> ordered;
  for (const auto& v : result.variants) ordered.push_back(&v);
  if (result.baseline) ordered.push_back(&*result.baseline);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const Variant* a, const Variant* b) { return a->label < b->label; });

  std::string out(kExperimentCsvHeader);
  out += '\n';
  for (const Variant* v : ordered) {
    const auto& b = v->report.bound(v->bound);
    for (std::size_t g = 0; g < b.groups.size(); ++g) {
      const auto& t = b.groups[g];
      const auto d = t.delay.stats();
      out += fmt::format("{},{},{},{},{},{},{},{},{}\n", result.id, v->label, b.group_names[g], t.bytes,
                         t.packets, t.drops, format_double(b.utilization), format_double(d.mean_us),
                         format_double(d.stddev_us));
    }
  }
  return out;
}

std::vector<CsvRow> parse_experiment_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (header) {
      if (line != kExperimentCsvHeader) throw ExperimentError("unexpected experiment CSV header");
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                             : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 9) throw ExperimentError(fmt::format("malformed CSV row '{}'", line));
    CsvRow r;
    r.experiment = parse_integer<int>("experiment", fields[0]);
    r.label = fields[1];
    r.group = fields[2];
    r.bytes = parse_integer<std::uint64_t>("bytes", fields[3]);
    r.packets = parse_integer<std::uint64_t>("packets", fields[4]);
    r.drops = parse_integer<std::uint64_t>("drops", fields[5]);
    r.utilization = parse_nonnegative("utilization", fields[6]);
    r.mean_delay_us = parse_nonnegative("mean_delay_us", fields[7]);
    r.delay_stddev_us = parse_nonnegative("delay_stddev_us", fields[8]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string experiment_plot_data(const ExperimentResult& result) {
  std::string out = fmt::format("# experiment {}\n# index utilization baseline delta label\n", result.id);
  if (!result.baseline) return out;
  std::size_t i = 0;
  for (const auto& c : compare_utilization(result)) {
    out += fmt::format("{} {} {} {} \"{}\"\n", i++, format_double(c.utilization),
                       format_double(c.baseline_utilization), format_double(c.delta), c.label);
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::system_error(errno, std::generic_category(), "cannot open " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.close();
  if (!out) throw std::system_error(EIO, std::generic_category(), "cannot write " + path.string());
}

void emit_csv(const ExperimentResult& result, const std::filesystem::path& path) {
  write_text_file(path, experiment_csv(result));
}

void emit_plot_data(const ExperimentResult& result, const std::filesystem::path& path) {
  write_text_file(path, experiment_plot_data(result));
}

}  // namespace gwshaper
