#include "fluentnet/network.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <stdexcept>
#include <thread>

namespace fluentnet {

std::size_t Node::complexity() const {
  std::size_t rules = 0;
  for (const Model& m : models) rules += m.rules.size() + m.dwell_rules.size();
  return store.size() + store.tag_assertions() + rules;
}

void Node::refresh_metrics() { metrics.complexity = complexity(); }

Network::Network() {
  // Registered out of the box so network definition files can reference them.
  register_impl("noop", [](ProcedureContext&) {});
}

Node& Network::register_node(const std::string& id,
                             StatementStore::Policy policy) {
  if (nodes_.count(id))
    throw std::invalid_argument("duplicate node id '" + id + "'");
  auto node = std::make_unique<Node>(id, policy);
  Node& ref = *node;
  nodes_[id] = std::move(node);
  return ref;
}

Node& Network::node(const std::string& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end())
    throw std::out_of_range("unknown node id '" + id + "'");
  return *it->second;
}

const Node* Network::find_node(const std::string& id) const {
  auto it = nodes_.find(id);
  return it == nodes_.end() ? nullptr : it->second.get();
}

std::vector<std::string> Network::node_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : nodes_) out.push_back(id);
  return out;
}

void Network::register_impl(const std::string& name, ProcedureImpl impl) {
  impls_[name] = std::move(impl);
}

void Network::register_procedure(const ProcedureSpec& spec) {
  if (procedures_.count(spec.id))
    throw std::invalid_argument("duplicate procedure id '" + spec.id + "'");
  if (!impls_.count(spec.impl))
    throw std::invalid_argument("procedure '" + spec.id +
                                "' names unknown implementation '" + spec.impl +
                                "'");
  if (spec.events.empty())
    throw std::invalid_argument("procedure '" + spec.id + "' has no events");

  ProcedureSpec resolved = spec;
  for (Event& event : resolved.events) {
    if (event.conditions.empty())
      throw std::invalid_argument("procedure '" + spec.id +
                                  "' has an event with no conditions");
    for (ConditionId id : event.conditions)
      if (!conditions_.count(id))
        throw std::invalid_argument("unknown condition id");
  }
  for (const Event& event : resolved.events)
    for (ConditionId id : event.conditions) ++conditions_[id].users;

  procedures_[spec.id] = Procedure{std::move(resolved)};
  procedure_order_.push_back(spec.id);
}

ConditionId Network::add_condition(const std::string& node_id,
                                   const StatementPattern& pattern,
                                   int frequency) {
  if (frequency < 1)
    throw std::invalid_argument("condition frequency must be >= 1 poll/s");
  for (auto& [id, cond] : conditions_) {
    if (cond.phase != Condition::Phase::Old && cond.node == node_id &&
        cond.pattern == pattern && cond.frequency == frequency)
      return id;
  }
  Condition cond;
  cond.node = node_id;
  cond.pattern = pattern;
  cond.frequency = frequency;
  ConditionId id = next_condition_++;
  conditions_[id] = std::move(cond);
  return id;
}

void Network::deregister_procedure(const std::string& id) {
  auto it = procedures_.find(id);
  if (it == procedures_.end())
    throw std::out_of_range("unknown procedure id '" + id + "'");
  for (const Event& event : it->second.spec.events) {
    for (ConditionId cid : event.conditions) {
      Condition& cond = conditions_.at(cid);
      if (cond.users > 0 && --cond.users == 0) cond.phase = Condition::Phase::Old;
    }
  }
  procedures_.erase(it);
  procedure_order_.erase(
      std::find(procedure_order_.begin(), procedure_order_.end(), id));
}

const Procedure* Network::find_procedure(const std::string& id) const {
  auto it = procedures_.find(id);
  return it == procedures_.end() ? nullptr : &it->second;
}

bool Network::evaluate_condition(ConditionId id) {
  Condition& cond = conditions_.at(id);
  Node& target = node(cond.node);  // throws for unknown node ids
  std::lock_guard<std::mutex> guard(target.mutex);
  MatchProbe probe = target.store.probe(cond.pattern);
  cond.truth = probe.exists;
  cond.fingerprint = probe.fingerprint;
  ++cond.polls;
  return cond.truth;
}

bool Network::poll_condition(Condition& cond) {
  Node& target = node(cond.node);
  std::unique_lock<std::mutex> guard(target.mutex, std::try_to_lock);
  if (!guard.owns_lock()) return false;  // node busy; retry next tick
  MatchProbe probe = target.store.probe(cond.pattern);
  cond.truth = probe.exists;
  cond.fingerprint = probe.fingerprint;
  ++cond.polls;
  return true;
}

bool Network::event_true(const Event& event) const {
  for (ConditionId id : event.conditions)
    if (!conditions_.at(id).truth) return false;
  return true;
}

std::set<std::string> Network::runnable() const {
  std::set<std::string> out;
  for (const auto& [id, proc] : procedures_) {
    for (const Event& event : proc.spec.events) {
      if (event_true(event)) {
        out.insert(id);
        break;
      }
    }
  }
  return out;
}

void Network::core_manager(Timestamp now) {
  std::vector<ConditionId> stale;
  for (auto& [id, cond] : conditions_) {
    switch (cond.phase) {
      case Condition::Phase::New:
        cond.phase = Condition::Phase::Active;
        cond.next_due = now;
        break;
      case Condition::Phase::Old:
        stale.push_back(id);
        break;
      case Condition::Phase::Active:
        break;
    }
  }
  for (ConditionId id : stale) {
    conditions_.erase(id);
    seen_.erase(id);
  }
}

std::vector<std::string> Network::scheduler_tick(Timestamp now) {
  core_manager(now);

  for (auto& [id, cond] : conditions_) {
    if (cond.phase != Condition::Phase::Active || cond.next_due > now) continue;
    if (poll_condition(cond)) cond.next_due = now + cond.period();
  }

  auto changed = [&](ConditionId id) {
    const Condition& cond = conditions_.at(id);
    auto it = seen_.find(id);
    if (it == seen_.end())
      return cond.truth;  // first observation; a true birth is an edge
    return it->second.first != cond.truth ||
           (cond.truth && it->second.second != cond.fingerprint);
  };

  std::vector<std::string> dispatched;
  for (const std::string& id : procedure_order_) {
    Procedure& proc = procedures_.at(id);
    bool now_runnable = false;
    bool fresh_witness = false;
    for (const Event& event : proc.spec.events) {
      if (!event_true(event)) continue;
      now_runnable = true;
      for (ConditionId cid : event.conditions)
        if (changed(cid)) fresh_witness = true;
    }
    bool rising = now_runnable && !proc.runnable;
    if (rising || (now_runnable && fresh_witness)) dispatched.push_back(id);
    proc.runnable = now_runnable;
  }

  for (const auto& [id, cond] : conditions_)
    seen_[id] = {cond.truth, cond.fingerprint};

  if (!dispatched.empty()) execute(dispatched, now);
  return dispatched;
}

void Network::execute(const std::vector<std::string>& procedure_ids,
                      Timestamp now) {
  auto run_one = [this, now](const std::string& id) {
    Procedure& proc = procedures_.at(id);
    ++proc.dispatches;
    ProcedureContext ctx{*this, proc.spec, now};
    auto impl = impls_.find(proc.spec.impl);
    try {
      impl->second(ctx);
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> guard(errors_mutex_);
      errors_.push_back({id, now, e.what()});
    } catch (...) {
      std::lock_guard<std::mutex> guard(errors_mutex_);
      errors_.push_back({id, now, "unknown error"});
    }
  };

  if (!parallel_ || procedure_ids.size() == 1) {
    for (const std::string& id : procedure_ids) run_one(id);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(procedure_ids.size());
  for (const std::string& id : procedure_ids)
    workers.emplace_back(run_one, id);
  for (std::thread& worker : workers) worker.join();
}

std::size_t placing_ingest(Node& node, const Statement& raw,
                           MetricsSink* sink) {
  auto started = std::chrono::steady_clock::now();
  std::lock_guard<std::mutex> guard(node.mutex);
  if (!node.placing) throw std::logic_error("node '" + node.id() + "' has no topology");

  std::vector<Statement> context = contextualize(*node.placing, raw);
  if (context.empty()) {
    ++node.metrics.unknown_sensors;
    std::fprintf(stderr, "[placing] %s: unknown sensor '%s' dropped\n",
                 node.id().c_str(), raw.name.c_str());
    return 0;
  }

  if (node.location_name_cache.empty())
    node.location_name_cache = node.placing->location_names();

  std::set<std::string> asserted;
  for (std::size_t i = 1; i < context.size(); ++i)
    asserted.insert(context[i].name);

  std::size_t written = 0;
  // When an event localizes the person, they cannot still be at a place it
  // does not support: expire every location belief left unasserted. Events
  // with no location evidence (motion off) leave beliefs untouched.
  if (!asserted.empty()) {
    for (const std::string& name : node.location_name_cache) {
      if (asserted.count(name)) continue;
      const Statement* have = node.store.latest(name);
      if (have && have->state) {
        Statement gone;
        gone.name = name;
        gone.state = false;
        gone.time = raw.time;
        gone.provenance = Provenance::Derived;
        node.store.insert(std::move(gone));
        ++written;
      }
    }
  }
  for (Statement& st : context) {
    node.store.insert(std::move(st));
    ++written;
  }
  classify(node.store, node.tag_rules);
  node.refresh_metrics();

  auto elapsed = std::chrono::steady_clock::now() - started;
  node.metrics.last_eval_ns =
      std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count();
  if (sink) {
    sink->sample({node.id(), raw.time, node.metrics.last_eval_ns,
                  node.metrics.complexity, written});
  }
  return written;
}

}  // namespace fluentnet
