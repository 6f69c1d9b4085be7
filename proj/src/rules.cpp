#include "fluentnet/rules.hpp"

#include <algorithm>

namespace fluentnet {

namespace {

bool candidate_order(const Statement& a, const Statement& b) {
  if (a.time != b.time) return a.time < b.time;
  if (a.name != b.name) return a.name < b.name;
  if (a.state != b.state) return a.state < b.state;
  return a.serial < b.serial;
}

std::vector<Statement> candidates(const RulePattern& pattern,
                                  const StatementStore& store) {
  std::vector<Statement> out;
  for (Statement& st : store.query(pattern.selector)) {
    if (st.state == pattern.required_state) out.push_back(std::move(st));
  }
  std::sort(out.begin(), out.end(), candidate_order);
  return out;
}

Timestamp bound_time(const Binding& binding, const std::string& variable) {
  auto it = binding.find(variable);
  if (it == binding.end())
    throw EvalError("unbound variable '" + variable + "' in temporal expression");
  return it->second.time;
}

}  // namespace

std::vector<Binding> bind(const Rule& rule, const StatementStore& store) {
  std::vector<Binding> out;
  if (rule.patterns.empty()) return out;

  std::vector<std::vector<Statement>> slots;
  slots.reserve(rule.patterns.size());
  for (const RulePattern& pattern : rule.patterns) {
    slots.push_back(candidates(pattern, store));
    if (slots.back().empty()) return out;
  }

  std::vector<std::size_t> pick(slots.size(), 0);
  for (;;) {
    Binding binding;
    for (std::size_t i = 0; i < slots.size(); ++i)
      binding[rule.patterns[i].variable] = slots[i][pick[i]];
    out.push_back(std::move(binding));

    std::size_t i = slots.size();
    while (i > 0) {
      --i;
      if (++pick[i] < slots[i].size()) break;
      pick[i] = 0;
      if (i == 0) return out;
    }
  }
}

bool check_constraints(const std::vector<TemporalConstraint>& constraints,
                       const Binding& binding) {
  for (const TemporalConstraint& c : constraints) {
    Timestamp lhs = bound_time(binding, c.lhs) + c.offset;
    Timestamp rhs = bound_time(binding, c.rhs);
    bool ok = c.relation == TemporalConstraint::Relation::Less ? lhs < rhs
                                                               : lhs > rhs;
    if (!ok) return false;
  }
  return true;
}

Statement fire(const Rule& rule, const Binding& binding, Timestamp clock) {
  Timestamp when = clock;
  const TimeExpr& expr = rule.consequent.time;
  switch (expr.kind) {
    case TimeExpr::Kind::Now:
      break;
    case TimeExpr::Kind::TimeOf:
      when = bound_time(binding, expr.variables.at(0));
      break;
    case TimeExpr::Kind::MaxTime: {
      when = bound_time(binding, expr.variables.at(0));
      for (std::size_t i = 1; i < expr.variables.size(); ++i)
        when = std::max(when, bound_time(binding, expr.variables[i]));
      break;
    }
    case TimeExpr::Kind::MinTime: {
      when = bound_time(binding, expr.variables.at(0));
      for (std::size_t i = 1; i < expr.variables.size(); ++i)
        when = std::min(when, bound_time(binding, expr.variables[i]));
      break;
    }
  }
  Statement out;
  out.name = rule.consequent.name;
  out.state = rule.consequent.state;
  out.time = when;
  out.provenance = Provenance::Derived;
  return out;
}

std::optional<Statement> accumulate_duration(const StatementStore& store,
                                             const std::string& name,
                                             DurationMs threshold,
                                             const std::string& out_name,
                                             Timestamp clock) {
  DurationMs accrued = 0;
  std::optional<Timestamp> open_since;
  std::optional<Timestamp> crossing;

  auto close_at = [&](Timestamp end) {
    if (!open_since || crossing) {
      open_since.reset();
      return;
    }
    Timestamp start = *open_since;
    if (end > start) {
      DurationMs len = end - start;
      if (accrued + len >= threshold) crossing = start + (threshold - accrued);
      accrued += len;
    }
    open_since.reset();
  };

  for (const Statement& st : store.history(name)) {
    if (st.time > clock) break;
    if (st.state) {
      if (!open_since) open_since = st.time;  // repeats continue the interval
    } else {
      close_at(st.time);
    }
  }
  close_at(clock);

  if (!crossing) return std::nullopt;

  Statement out;
  out.name = out_name;
  out.state = true;
  out.time = *crossing;
  out.provenance = Provenance::Derived;
  return out;
}

EvalResult evaluate_model(const Model& model, StatementStore& store,
                          Timestamp clock) {
  EvalResult result;
  std::size_t passes = 0;
  const std::size_t pass_cap = model.rules.size() + model.dwell_rules.size() + 1;

  bool changed = true;
  while (changed && passes++ <= pass_cap) {
    changed = false;

    for (const DwellRule& dwell : model.dwell_rules) {
      auto derived = accumulate_duration(store, dwell.over, dwell.threshold,
                                         dwell.out, clock);
      if (derived && !store.contains(derived->name, derived->state, derived->time)) {
        store.insert(*derived);
        result.derived.push_back(*derived);
        changed = true;
      }
    }

    for (const Rule& rule : model.rules) {
      std::vector<Statement> pending;
      for (const Binding& binding : bind(rule, store)) {
        if (!check_constraints(rule.constraints, binding)) continue;
        Statement st = fire(rule, binding, clock);
        if (store.contains(st.name, st.state, st.time)) continue;
        bool queued = std::any_of(pending.begin(), pending.end(),
                                  [&](const Statement& p) {
                                    return p.state == st.state &&
                                           p.time == st.time;
                                  });
        if (!queued) pending.push_back(std::move(st));
      }
      for (Statement& st : pending) {
        store.insert(st);
        result.derived.push_back(std::move(st));
        changed = true;
      }
    }
  }

  for (const Statement& st : store.history(model.final_name)) {
    if (st.state) {
      result.satisfied = true;
      break;
    }
  }
  return result;
}

}  // namespace fluentnet
