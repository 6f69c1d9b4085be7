#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fluentnet/metrics.hpp"
#include "fluentnet/rules.hpp"
#include "fluentnet/topology.hpp"

namespace fluentnet {

struct NodeMetrics {
  std::size_t complexity = 0;
  std::size_t baseline = 0;  // complexity of the empty node (its rules)
  std::int64_t last_eval_ns = 0;
  std::size_t unknown_sensors = 0;
};

/// A knowledge node: one statement store plus the models and tag rules that
/// interpret it. All mutation goes through the owner of `mutex` (single
/// writer); condition polls only try the lock and back off.
class Node {
 public:
  Node(std::string id, StatementStore::Policy policy)
      : store(policy), id_(std::move(id)) {}

  const std::string& id() const { return id_; }

  /// statement count + tag assertions + model-rule instantiations.
  std::size_t complexity() const;
  void refresh_metrics();

  StatementStore store;
  std::vector<Model> models;
  std::vector<TagRule> tag_rules;
  std::optional<Topology> placing;  // set on context nodes
  std::set<std::string> location_name_cache;  // filled on first ingest
  NodeMetrics metrics;
  std::mutex mutex;

 private:
  std::string id_;
};

/// Periodically polled existence check against one node. Its observable
/// state is the existence bit plus a fingerprint of the witnessing
/// statements' serials: a fresh witness re-arms the condition without the
/// check ever reading statement state or time.
struct Condition {
  std::string node;
  StatementPattern pattern;
  int frequency = 1;  // polls per timeline second

  enum class Phase { New, Active, Old };
  Phase phase = Phase::New;

  bool truth = false;
  std::uint64_t fingerprint = 0;
  Timestamp next_due = 0;
  std::size_t polls = 0;
  std::size_t users = 0;  // events referencing this condition

  DurationMs period() const { return 1000 / (frequency < 1 ? 1 : frequency); }
};

using ConditionId = std::uint32_t;

/// Conjunction of conditions.
struct Event {
  std::vector<ConditionId> conditions;
};

struct ProcedureSpec {
  std::string id;
  std::string impl;
  std::map<std::string, std::string> params;
  std::vector<Event> events;
};

struct Procedure {
  ProcedureSpec spec;
  bool runnable = false;
  std::size_t dispatches = 0;
};

struct RunError {
  std::string procedure;
  Timestamp at = 0;
  std::string message;
};

class Network;

/// Execution context handed to a procedure implementation.
struct ProcedureContext {
  Network& network;
  const ProcedureSpec& spec;
  Timestamp now;
};

using ProcedureImpl = std::function<void(ProcedureContext&)>;

/// Registry plus scheduler for a distributed set of knowledge nodes. One
/// scheduler owns condition states and dispatch decisions; dispatched
/// procedure bodies may run concurrently across nodes within a tick (each
/// tick joins its executions before returning).
class Network {
 public:
  Network();

  // --- registry -----------------------------------------------------------

  Node& register_node(const std::string& id, StatementStore::Policy policy);
  Node& node(const std::string& id);
  const Node* find_node(const std::string& id) const;
  std::vector<std::string> node_ids() const;

  void register_impl(const std::string& name, ProcedureImpl impl);

  /// Creates a condition, or returns the id of an identical live one so
  /// events across procedures share a single evaluator. New conditions stay
  /// inert until the manager activates them.
  ConditionId add_condition(const std::string& node_id,
                            const StatementPattern& pattern, int frequency);

  /// Validates the implementation id and the event structure (at least one
  /// event, each with at least one existing condition).
  void register_procedure(const ProcedureSpec& spec);
  void deregister_procedure(const std::string& id);
  const Procedure* find_procedure(const std::string& id) const;

  /// Conditions live at stable ids; shared when (node, pattern, frequency)
  /// coincide across events.
  const std::map<ConditionId, Condition>& conditions() const { return conditions_; }

  // --- evaluation ---------------------------------------------------------

  /// Probes one condition immediately (blocking on the node lock) and
  /// returns its updated truth. Throws for an unknown node id. Scheduler
  /// polls use a non-blocking variant instead: a poll landing while the node
  /// is mid-evaluation leaves the state untouched and is retried next tick.
  bool evaluate_condition(ConditionId id);

  /// Procedure ids with at least one fully-true event.
  std::set<std::string> runnable() const;

  /// Activates New conditions (exactly one periodic evaluator each) and
  /// drops Old ones; the self-hosting management step run at every tick.
  void core_manager(Timestamp now);

  /// One scheduler step at timeline instant `now`: runs the manager, polls
  /// due conditions, recomputes affected events, and dispatches procedures
  /// whose runnable state rose (or which received a fresh witness while
  /// runnable). Returns the dispatched procedure ids in registration order.
  std::vector<std::string> scheduler_tick(Timestamp now);

  /// When false, dispatched bodies run sequentially on the scheduler thread.
  void set_parallel_dispatch(bool on) { parallel_ = on; }

  MetricsSink& sink() { return sink_; }
  const std::vector<RunError>& errors() const { return errors_; }

  /// Wall-clock column for emitted recognition records. The replay driver
  /// installs a source mapping timeline onto the configured pacing; with none
  /// installed the column stays 0.
  void set_wall_clock(std::function<std::int64_t()> source) { wall_clock_ = std::move(source); }
  std::int64_t wall_now() const { return wall_clock_ ? wall_clock_() : 0; }

 private:
  bool event_true(const Event& event) const;
  bool poll_condition(Condition& cond);
  void execute(const std::vector<std::string>& procedure_ids, Timestamp now);

  std::map<std::string, std::unique_ptr<Node>> nodes_;
  std::map<std::string, ProcedureImpl> impls_;
  std::vector<std::string> procedure_order_;
  std::map<std::string, Procedure> procedures_;
  std::map<ConditionId, Condition> conditions_;
  ConditionId next_condition_ = 1;
  // Scheduler-side snapshot of each condition's last consumed state; edges
  // are judged against this, so out-of-band evaluate_condition calls cannot
  // swallow a pending dispatch.
  std::map<ConditionId, std::pair<bool, std::uint64_t>> seen_;
  bool parallel_ = true;
  std::function<std::int64_t()> wall_clock_;
  MetricsSink sink_;
  std::mutex errors_mutex_;
  std::vector<RunError> errors_;
};

/// Ingests one raw sensor event into a placing node: contextualizes it, adds
/// the raw statement and the person's location beliefs under the memory-free
/// overwrite policy, flips location beliefs the event no longer supports to
/// false at the event time, classifies, and refreshes metrics. Returns the
/// number of statements written, 0 for unknown sensors (counted + logged).
std::size_t placing_ingest(Node& node, const Statement& raw,
                           MetricsSink* sink = nullptr);

}  // namespace fluentnet
