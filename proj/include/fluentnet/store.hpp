#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fluentnet/statement.hpp"

namespace fluentnet {

/// Existence probe result handed to condition evaluation. Exposes no state or
/// time field on purpose: conditions may only observe that witnesses exist and
/// whether the witness set changed (via the serial-derived fingerprint).
struct MatchProbe {
  bool exists = false;
  std::size_t count = 0;
  std::uint64_t fingerprint = 0;

  bool operator==(const MatchProbe&) const = default;
};

/// Statement container with one of two retention policies:
///  - Overwrite: memory-free; at most one statement per name, newest wins.
///  - Append:    time-ordered history per name, duplicates by
///               (name, state, time) suppressed.
class StatementStore {
 public:
  enum class Policy { Overwrite, Append };

  explicit StatementStore(Policy policy = Policy::Append) : policy_(policy) {}

  Policy policy() const { return policy_; }

  /// Inserts a copy of `st`, assigning it a fresh serial. Under Append an
  /// exact (name, state, time) duplicate is dropped. Returns whether the
  /// store changed.
  bool insert(Statement st);

  bool contains(const std::string& name, bool state, Timestamp time) const;

  /// Statements matching a name ("*" = any) and, optionally, a tag, in
  /// stable time order (time, then name, then insertion serial).
  std::vector<Statement> query(const std::string& name_pattern,
                               const std::optional<std::string>& tag = {}) const;

  std::vector<Statement> query(const StatementPattern& pattern) const;

  /// Existence-only view for conditions; see MatchProbe.
  MatchProbe probe(const StatementPattern& pattern) const;

  /// Time-ordered history of one name (at most one entry under Overwrite).
  const std::vector<Statement>& history(const std::string& name) const;

  const Statement* latest(const std::string& name) const;

  /// All statements, stable time order.
  std::vector<Statement> all() const;

  void for_each(const std::function<void(Statement&)>& fn);

  bool erase(const std::string& name);
  void clear();

  std::size_t size() const;
  std::size_t tag_assertions() const;

  /// Line-oriented dump for golden tests: `name state time tags...`, one
  /// statement per line in stable time order, tags alphabetical.
  std::string dump() const;

 private:
  Policy policy_;
  std::map<std::string, std::vector<Statement>> by_name_;
  std::uint64_t next_serial_ = 1;
};

/// Single-statement predicate that assigns a tag. All set fields must hold.
/// Unlike condition checks, tag rules may read state: classification is how
/// state-dependent meaning (e.g. "recognized") becomes tag-visible.
struct TagRule {
  std::string add_tag;
  std::optional<std::string> name;
  std::optional<bool> state;
  std::optional<std::string> has_tag;

  bool matches(const Statement& st) const;
};

/// Applies every rule to every statement, adding tags in place. Monotone and
/// idempotent: repeated calls with the same rules are no-ops. Returns the
/// number of tags added.
std::size_t classify(StatementStore& store, const std::vector<TagRule>& rules);

}  // namespace fluentnet
