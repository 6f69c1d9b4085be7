#pragma once

#include <stdexcept>
#include <string>

#include "fluentnet/rules.hpp"

namespace fluentnet {

struct ParseError : std::runtime_error {
  int line = 0;
  int column = 0;

  ParseError(std::string message, int line_no, int col)
      : std::runtime_error("line " + std::to_string(line_no) + ", col " +
                           std::to_string(col) + ": " + message),
        line(line_no),
        column(col) {}
};

/// Parses a model definition. The format is line-oriented:
///
///   model <name>
///   final <name>
///   threshold <name> = <duration>
///   input <statement-name> | input tag <Tag>
///   rule <name>: when <var>:<state> is <name>|in <Tag> {, ...}
///                [if t(<var>)[+<dur>] </> t(<var>) {, ...}]
///                then <name>:<state> at <time-expr>
///   dwell <name>: over <statement-name> threshold <duration> then <name>:<state>
///
/// States are written as the top/bot glyphs or true/false. Durations take
/// ms/s/min suffixes (bare integers are ms) or name a declared threshold.
/// Time expressions: time-of(v), max-time(v, ...), min-time(v, ...), now.
/// A rule may continue onto following lines that start with "if", "then"
/// or ",". Comments run from '#' to end of line.
///
/// Rejects: empty input, unbound variables in constraints or time
/// expressions, duplicate variables within a rule, cyclic rule chains, a
/// final name that is not the consequent of exactly one rule.
///
/// `overrides` replaces declared threshold values by name (Greek names and
/// their d/e ASCII aliases are interchangeable) before rules resolve them.
Model parse_model(const std::string& text,
                  const std::map<std::string, DurationMs>& overrides = {});

/// Canonical text form; parse_model(print_model(m)) reproduces m.
std::string print_model(const Model& model);

/// Parses "250", "250ms", "30s", "5min" (value may carry one decimal place
/// for s/min). Used by the DSL, the network file and CLI flags.
DurationMs parse_duration(const std::string& token);

}  // namespace fluentnet
