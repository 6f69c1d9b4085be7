#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fluentnet/store.hpp"

namespace fluentnet {

/// Raised by rule evaluation on malformed rules (e.g. a temporal constraint
/// naming a variable no pattern binds).
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One antecedent slot: the variable binds a statement with the required
/// state whose name (or tag set) matches the selector.
struct RulePattern {
  std::string variable;
  bool required_state = true;
  StatementPattern selector;

  bool operator==(const RulePattern&) const = default;
};

/// t(lhs) + offset REL t(rhs), strictly. Equal instants satisfy neither
/// relation; models that must accept ties widen the offset by one.
struct TemporalConstraint {
  enum class Relation { Less, Greater };
  std::string lhs;
  DurationMs offset = 0;
  Relation relation = Relation::Less;
  std::string rhs;

  bool operator==(const TemporalConstraint&) const = default;
};

/// Timestamp recipe for a consequent.
struct TimeExpr {
  enum class Kind { TimeOf, MaxTime, MinTime, Now };
  Kind kind = Kind::Now;
  std::vector<std::string> variables;

  static TimeExpr time_of(std::string v) { return {Kind::TimeOf, {std::move(v)}}; }
  static TimeExpr max_time(std::vector<std::string> vs) { return {Kind::MaxTime, std::move(vs)}; }
  static TimeExpr min_time(std::vector<std::string> vs) { return {Kind::MinTime, std::move(vs)}; }
  static TimeExpr now() { return {Kind::Now, {}}; }

  bool operator==(const TimeExpr&) const = default;
};

struct Consequent {
  std::string name;
  bool state = true;
  TimeExpr time;

  bool operator==(const Consequent&) const = default;
};

struct Rule {
  std::string name;
  std::vector<RulePattern> patterns;
  std::vector<TemporalConstraint> constraints;
  Consequent consequent;

  bool operator==(const Rule&) const = default;
};

/// Duration-accumulation rule: sums the true-state dwell time of one
/// statement's history and derives `out` once the sum reaches `threshold`.
struct DwellRule {
  std::string name;
  std::string over;
  DurationMs threshold = 0;
  std::string out;

  bool operator==(const DwellRule&) const = default;
};

/// An acyclic bundle of rules deriving one final statement.
struct Model {
  std::string name;
  std::vector<Rule> rules;
  std::vector<DwellRule> dwell_rules;
  std::string final_name;
  std::map<std::string, DurationMs> thresholds;

  /// Statement selectors an importer should propagate into this model's node.
  std::vector<StatementPattern> inputs;

  bool operator==(const Model&) const = default;
};

/// Variable assignment produced by bind(); maps each pattern variable to the
/// statement it matched.
using Binding = std::map<std::string, Statement>;

/// All assignments of store statements to the rule's patterns, in
/// deterministic order: statements per pattern are taken in (time, name,
/// state) order and combined left-to-right across patterns.
std::vector<Binding> bind(const Rule& rule, const StatementStore& store);

/// True iff every temporal constraint holds under `binding`. Throws EvalError
/// when a constraint names an unbound variable.
bool check_constraints(const std::vector<TemporalConstraint>& constraints,
                       const Binding& binding);

/// Builds the consequent statement for a satisfied binding. `clock` feeds the
/// `now` time expression. Derived provenance, no tags.
Statement fire(const Rule& rule, const Binding& binding, Timestamp clock);

/// Sweeps the time-ordered history of `name`, summing true-state dwell time
/// (an interval closes at the next false statement or at `clock`). When the
/// sum reaches `threshold` the result carries the instant the threshold was
/// crossed; otherwise nullopt.
std::optional<Statement> accumulate_duration(const StatementStore& store,
                                             const std::string& name,
                                             DurationMs threshold,
                                             const std::string& out_name,
                                             Timestamp clock);

struct EvalResult {
  bool satisfied = false;
  std::vector<Statement> derived;  // newly inserted this call, firing order
};

/// Runs the model's rules to fixpoint against `store`, inserting derived
/// statements with append semantics (duplicate consequents are suppressed, so
/// a second call without new data derives nothing). `satisfied` reports
/// whether a true-state statement named `final_name` exists afterwards.
/// Termination relies on the model's acyclicity precondition; the pass count
/// is bounded by the rule count.
EvalResult evaluate_model(const Model& model, StatementStore& store,
                          Timestamp clock);

}  // namespace fluentnet
