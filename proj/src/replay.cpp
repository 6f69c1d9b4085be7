#include "fluentnet/replay.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace fluentnet {
namespace {

[[noreturn]] void fail(const std::string& id, std::size_t line, const std::string& what) {
  throw std::runtime_error(id + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

/// Days since the Unix epoch for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

/// "YYYY-MM-DD" + "HH:MM:SS[.ffffff]" -> epoch milliseconds.
std::optional<Timestamp> parse_stamp(const std::string& date, const std::string& time) {
  int y, mo, d, h, mi, s;
  char dash1, dash2, colon1, colon2;
  std::istringstream ds(date);
  ds >> y >> dash1 >> mo >> dash2 >> d;
  if (!ds || dash1 != '-' || dash2 != '-' || !ds.eof()) return std::nullopt;
  std::istringstream ts(time);
  ts >> h >> colon1 >> mi >> colon2 >> s;
  if (!ts || colon1 != ':' || colon2 != ':') return std::nullopt;
  std::int64_t ms = 0;
  if (ts.peek() == '.') {
    ts.get();
    std::string frac;
    while (std::isdigit(ts.peek())) frac.push_back(static_cast<char>(ts.get()));
    if (frac.empty()) return std::nullopt;
    frac.resize(3, '0');
    ms = std::stoll(frac.substr(0, 3));
  }
  if (!ts.eof() && ts.peek() != std::istringstream::traits_type::eof()) return std::nullopt;
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60) return std::nullopt;
  const std::int64_t days = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
  return ((days * 24 + h) * 60 + mi) * 60000 + s * 1000 + ms;
}

std::optional<int> parse_label(const std::string& tok) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) return std::nullopt;
  if (v < 1 || v > 99) return std::nullopt;
  return v;
}

}  // namespace

ValueMap ValueMap::defaults() {
  ValueMap vm;
  vm.entries = {
      {"ON", true},      {"OFF", false},   {"OPEN", true},   {"CLOSE", false},
      {"CLOSED", false}, {"PRESENT", true}, {"ABSENT", false},
      {"START", true},   {"STOP", false},  {"1", true},      {"0", false},
      {"TRUE", true},    {"FALSE", false},
  };
  return vm;
}

std::optional<bool> ValueMap::lookup(const std::string& token) const {
  std::string key;
  key.reserve(token.size());
  for (char c : token) key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  auto it = entries.find(key);
  if (it == entries.end()) return std::nullopt;
  return it->second;
}

std::map<int, std::pair<Timestamp, Timestamp>> Run::label_spans() const {
  std::map<int, std::pair<Timestamp, Timestamp>> spans;
  for (const auto& ev : events) {
    if (!ev.label) continue;
    auto it = spans.find(*ev.label);
    if (it == spans.end()) {
      spans.emplace(*ev.label, std::make_pair(ev.time, ev.time));
    } else {
      it->second.second = ev.time;
    }
  }
  return spans;
}

Run parse_run(const std::string& text, const std::string& id, const ValueMap& values) {
  Run run;
  run.id = id;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool raw_format = false;
  bool format_known = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    auto fields = split_ws(line);
    if (fields.empty()) continue;

    if (!format_known) {
      raw_format = !all_digits(fields[0]);
      format_known = true;
    }

    Timestamp time;
    std::size_t base;
    if (raw_format) {
      if (fields.size() < 4) fail(id, lineno, "expected date, time, sensor, value");
      auto stamp = parse_stamp(fields[0], fields[1]);
      if (!stamp) fail(id, lineno, "bad timestamp '" + fields[0] + " " + fields[1] + "'");
      time = *stamp;
      base = 2;
    } else {
      if (fields.size() < 3) fail(id, lineno, "expected milliseconds, sensor, value");
      if (!all_digits(fields[0])) fail(id, lineno, "bad milliseconds '" + fields[0] + "'");
      time = std::stoll(fields[0]);
      base = 1;
    }

    const std::string& sensor = fields[base];
    auto kind = kind_of_sensor(sensor);
    if (!kind) {
      ++run.skipped;
      continue;
    }
    auto state = values.lookup(fields[base + 1]);
    if (!state) fail(id, lineno, "unknown value '" + fields[base + 1] + "' for " + sensor);

    SensorEvent ev;
    ev.time = time;
    ev.sensor = sensor;
    ev.kind = *kind;
    ev.value = *state;
    if (fields.size() > base + 2) ev.label = parse_label(fields[base + 2]);
    if (!run.events.empty() && ev.time < run.events.back().time)
      fail(id, lineno, "timestamps go backwards");
    run.events.push_back(std::move(ev));
  }
  if (raw_format && !run.events.empty()) {
    const Timestamp start = run.events.front().time;
    for (auto& ev : run.events) ev.time -= start;
  }
  return run;
}

std::vector<Run> parse_dataset(const std::string& path, const ValueMap& values) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (!entry.is_regular_file()) continue;
      if (entry.path().filename().string().front() == '.') continue;
      files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error(path + ": no run files");
  } else if (fs::is_regular_file(path)) {
    files.push_back(path);
  } else {
    throw std::runtime_error(path + ": not a file or directory");
  }

  std::vector<Run> runs;
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error(file.string() + ": cannot open");
    std::stringstream buf;
    buf << in.rdbuf();
    runs.push_back(parse_run(buf.str(), file.stem().string(), values));
  }
  return runs;
}

std::size_t ReplayPlan::total_events() const {
  std::size_t n = 0;
  for (const auto& pr : runs) n += pr.run.events.size();
  return n;
}

Timestamp ReplayPlan::end() const {
  if (runs.empty()) return 0;
  return runs.back().offset + runs.back().run.end_time();
}

std::vector<LabelWindow> ReplayPlan::labels() const {
  std::vector<LabelWindow> out;
  for (const auto& pr : runs) {
    for (const auto& [activity, span] : pr.run.label_spans()) {
      LabelWindow w;
      w.run = pr.run.id;
      w.activity = activity;
      w.begin = pr.offset + span.first;
      w.end = pr.offset + span.second;
      out.push_back(std::move(w));
    }
  }
  std::sort(out.begin(), out.end(), [](const LabelWindow& a, const LabelWindow& b) {
    return a.begin < b.begin;
  });
  return out;
}

std::string ReplayPlan::run_at(Timestamp t) const {
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const Timestamp next = i + 1 < runs.size() ? runs[i + 1].offset : runs[i].offset + runs[i].run.end_time() + gap;
    if (t >= runs[i].offset && t < next) return runs[i].run.id;
  }
  return runs.empty() ? "" : runs.back().run.id;
}

ReplayPlan build_plan(std::vector<Run> runs, DurationMs gap, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = runs.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(runs[i - 1], runs[j]);
  }
  ReplayPlan plan;
  plan.gap = gap;
  plan.seed = seed;
  Timestamp offset = 0;
  for (auto& run : runs) {
    PlannedRun pr;
    pr.offset = offset;
    offset += run.end_time() + gap;
    pr.run = std::move(run);
    plan.runs.push_back(std::move(pr));
  }
  return plan;
}

ReplayReport replay(Network& net, const ReplayPlan& plan, const ReplayOptions& options) {
  if (options.speed <= 0) throw std::invalid_argument("speed must be positive");
  Node& ingest = net.node(options.ingest_node);

  struct Pending {
    Timestamp at;
    const SensorEvent* event;
  };
  std::vector<Pending> stream;
  stream.reserve(plan.total_events());
  for (const auto& pr : plan.runs)
    for (const auto& ev : pr.run.events) stream.push_back({pr.offset + ev.time, &ev});

  ReplayReport report;
  report.delivery_wall_ms.reserve(stream.size());

  using WallClock = std::chrono::steady_clock;
  const auto wall_start = WallClock::now();
  auto wall_elapsed = [&]() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(WallClock::now() - wall_start).count();
  };

  Timestamp clock = 0;
  std::int64_t schedule_wall = 0;
  auto scale = [&](Timestamp t) {
    return static_cast<std::int64_t>(static_cast<double>(t) / options.speed);
  };
  net.set_wall_clock([&]() { return options.realtime ? wall_elapsed() : schedule_wall; });

  auto advance_to = [&](Timestamp target) {
    while (clock < target) {
      clock = std::min<Timestamp>(clock + options.tick_quantum, target);
      schedule_wall = scale(clock);
      if (options.realtime) {
        const auto due = scale(clock);
        const auto now = wall_elapsed();
        if (due > now) std::this_thread::sleep_for(std::chrono::milliseconds(due - now));
      }
      net.scheduler_tick(clock);
    }
  };

  net.scheduler_tick(0);
  for (const auto& item : stream) {
    advance_to(item.at);
    schedule_wall = scale(item.at);
    if (options.realtime) {
      const std::int64_t lag = wall_elapsed() - schedule_wall;
      if (lag > options.drop_after_lag) {
        ++report.dropped;
        continue;
      }
    }
    Statement raw;
    raw.name = item.event->sensor;
    raw.state = item.event->value;
    raw.time = item.at;
    raw.provenance = Provenance::Sensor;
    placing_ingest(ingest, raw, &net.sink());
    ++report.delivered;
    report.delivery_wall_ms.push_back(options.realtime ? wall_elapsed() : schedule_wall);
    net.scheduler_tick(item.at);
  }
  advance_to(plan.end() + options.drain);
  report.wall_ms = options.realtime ? wall_elapsed() : scale(clock);
  net.set_wall_clock({});
  return report;
}

}  // namespace fluentnet
