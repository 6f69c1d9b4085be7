#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fluentnet/metrics.hpp"
#include "fluentnet/network.hpp"
#include "fluentnet/topology.hpp"

namespace fluentnet {

/// One normalized sensor record.
struct SensorEvent {
  Timestamp time = 0;  // run-local ms
  std::string sensor;
  SensorKind kind = SensorKind::Motion;
  bool value = false;
  std::optional<int> label;
};

/// Token-to-state table for sensor values. Extendable so dataset mirrors
/// with different spellings stay ingestible without code changes.
struct ValueMap {
  std::map<std::string, bool> entries;

  static ValueMap defaults();
  std::optional<bool> lookup(const std::string& token) const;
};

struct Run {
  std::string id;
  std::vector<SensorEvent> events;  // time-ascending
  std::size_t skipped = 0;          // temperature/brightness/unknown kinds

  Timestamp end_time() const { return events.empty() ? 0 : events.back().time; }

  /// Label spans present in this run: activity -> [first, last] event time.
  std::map<int, std::pair<Timestamp, Timestamp>> label_spans() const;
};

/// Parses one run. Two line formats are accepted and may not be mixed with
/// malformed content:
///   raw:        <YYYY-MM-DD> <HH:MM:SS[.ffffff]> <sensor> <value> [label]
///   normalized: <ms> <sensor> <value> [label]
/// Sensor kind comes from the id's letter prefix; records of kinds other
/// than M/I/P/D/F (temperature, brightness, ...) are skipped and counted.
/// Values go through the ValueMap; an unmapped value on an accepted sensor
/// is an error, as are timestamps running backwards. Raw runs are rebased so
/// their first record sits at 0; normalized runs keep their times verbatim.
Run parse_run(const std::string& text, const std::string& id,
              const ValueMap& values = ValueMap::defaults());

/// A directory yields one run per regular file (sorted by name, dotfiles
/// skipped); a single file yields one run.
std::vector<Run> parse_dataset(const std::string& path,
                               const ValueMap& values = ValueMap::defaults());

struct PlannedRun {
  Run run;
  Timestamp offset = 0;  // global instant of the run's local zero
};

/// Runs concatenated onto one timeline in seeded-shuffle order, each
/// starting `gap` after the previous one ends.
struct ReplayPlan {
  std::vector<PlannedRun> runs;
  DurationMs gap = 0;
  std::uint64_t seed = 0;

  std::size_t total_events() const;
  Timestamp end() const;
  std::vector<LabelWindow> labels() const;

  /// Id of the run whose span (start to start-of-next) contains `t`.
  std::string run_at(Timestamp t) const;
};

/// Deterministic for a given seed on every platform (the shuffle is done by
/// hand on a fixed generator, not std::shuffle).
ReplayPlan build_plan(std::vector<Run> runs, DurationMs gap, std::uint64_t seed);

struct ReplayOptions {
  double speed = 1.0;
  bool realtime = false;            // sleep between deliveries
  DurationMs tick_quantum = 100;    // scheduler granularity, timeline ms
  std::int64_t drop_after_lag = 2000;  // wall ms behind schedule => drop
  DurationMs drain = 3000;          // timeline ms of post-stream ticking
  std::string ingest_node = "O0";
};

struct ReplayReport {
  std::size_t delivered = 0;
  std::size_t dropped = 0;
  std::int64_t wall_ms = 0;  // measured wall span (realtime) or schedule
  std::vector<std::int64_t> delivery_wall_ms;  // one entry per delivery
};

/// Streams the plan into the network's ingest node in timeline order,
/// ticking the scheduler as the clock advances. Under real-time pacing each
/// event is delivered at (timeline / speed) wall milliseconds from start and
/// events falling further behind schedule than the drop threshold are
/// dropped; under virtual pacing delivery is immediate and the wall column
/// is the schedule itself. Condition polling runs on the timeline clock, so
/// recognition results are speed-invariant by construction.
ReplayReport replay(Network& net, const ReplayPlan& plan,
                    const ReplayOptions& options = {});

}  // namespace fluentnet
