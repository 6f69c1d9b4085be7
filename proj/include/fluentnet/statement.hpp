#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fluentnet {

/// Milliseconds since the replay epoch. All engine arithmetic is integral.
using Timestamp = std::int64_t;

/// Millisecond span; offsets in temporal constraints, thresholds, poll periods.
using DurationMs = std::int64_t;

enum class Provenance { Sensor, Derived, Procedure };

const char* to_string(Provenance p);

/// A fluent statement: a named boolean belief stamped with the instant it was
/// generated. Tags are monotone classification marks; they never encode state.
struct Statement {
  std::string name;
  bool state = false;
  Timestamp time = 0;
  std::set<std::string> tags;
  Provenance provenance = Provenance::Sensor;

  /// Store-assigned insertion serial (0 until inserted). Serials give
  /// conditions an identity to witness without touching state or time.
  std::uint64_t serial = 0;

  bool operator==(const Statement& other) const {
    return name == other.name && state == other.state && time == other.time &&
           tags == other.tags && provenance == other.provenance;
  }
};

/// "top"/"bot" rendering used by dumps, traces and error messages.
std::string state_symbol(bool state);

/// Name-or-tag selector shared by conditions, importer filters and rule
/// patterns. Name matching is exact except for the "*" wildcard.
struct StatementPattern {
  enum class Kind { Name, Tag };
  Kind kind = Kind::Name;
  std::string value;

  static StatementPattern by_name(std::string n) {
    return {Kind::Name, std::move(n)};
  }
  static StatementPattern by_tag(std::string t) {
    return {Kind::Tag, std::move(t)};
  }

  bool matches(const Statement& st) const;
  bool operator==(const StatementPattern&) const = default;
};

std::string to_string(const StatementPattern& p);

}  // namespace fluentnet
