#include "fluentnet/store.hpp"

#include <algorithm>
#include <sstream>

namespace fluentnet {

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::Sensor: return "sensor";
    case Provenance::Derived: return "derived";
    case Provenance::Procedure: return "procedure";
  }
  return "?";
}

std::string state_symbol(bool state) { return state ? "⊤" : "⊥"; }

bool StatementPattern::matches(const Statement& st) const {
  if (kind == Kind::Name) return value == "*" || st.name == value;
  return st.tags.count(value) > 0;
}

std::string to_string(const StatementPattern& p) {
  return (p.kind == StatementPattern::Kind::Name ? "name " : "tag ") + p.value;
}

namespace {

// splitmix64; mixes serials into an order-free witness fingerprint.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

bool time_order(const Statement& a, const Statement& b) {
  if (a.time != b.time) return a.time < b.time;
  if (a.name != b.name) return a.name < b.name;
  return a.serial < b.serial;
}

}  // namespace

bool StatementStore::insert(Statement st) {
  auto& bucket = by_name_[st.name];
  if (policy_ == Policy::Overwrite) {
    st.serial = next_serial_++;
    bucket.clear();
    bucket.push_back(std::move(st));
    return true;
  }
  for (const Statement& have : bucket) {
    if (have.state == st.state && have.time == st.time) return false;
  }
  st.serial = next_serial_++;
  auto pos = std::upper_bound(
      bucket.begin(), bucket.end(), st,
      [](const Statement& a, const Statement& b) { return a.time < b.time; });
  bucket.insert(pos, std::move(st));
  return true;
}

bool StatementStore::contains(const std::string& name, bool state,
                              Timestamp time) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return false;
  for (const Statement& st : it->second) {
    if (st.state == state && st.time == time) return true;
  }
  return false;
}

std::vector<Statement> StatementStore::query(
    const std::string& name_pattern, const std::optional<std::string>& tag) const {
  std::vector<Statement> out;
  auto take = [&](const std::vector<Statement>& bucket) {
    for (const Statement& st : bucket) {
      if (!tag || st.tags.count(*tag)) out.push_back(st);
    }
  };
  if (name_pattern == "*") {
    for (const auto& [_, bucket] : by_name_) take(bucket);
  } else if (auto it = by_name_.find(name_pattern); it != by_name_.end()) {
    take(it->second);
  }
  std::sort(out.begin(), out.end(), time_order);
  return out;
}

std::vector<Statement> StatementStore::query(const StatementPattern& pattern) const {
  if (pattern.kind == StatementPattern::Kind::Name) return query(pattern.value);
  return query("*", pattern.value);
}

MatchProbe StatementStore::probe(const StatementPattern& pattern) const {
  MatchProbe out;
  auto feed = [&](const std::vector<Statement>& bucket) {
    for (const Statement& st : bucket) {
      if (!pattern.matches(st)) continue;
      ++out.count;
      out.fingerprint ^= mix(st.serial);
    }
  };
  if (pattern.kind == StatementPattern::Kind::Name && pattern.value != "*") {
    if (auto it = by_name_.find(pattern.value); it != by_name_.end())
      feed(it->second);
  } else {
    for (const auto& [_, bucket] : by_name_) feed(bucket);
  }
  out.exists = out.count > 0;
  return out;
}

const std::vector<Statement>& StatementStore::history(
    const std::string& name) const {
  static const std::vector<Statement> empty;
  auto it = by_name_.find(name);
  return it == by_name_.end() ? empty : it->second;
}

const Statement* StatementStore::latest(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end() || it->second.empty()) return nullptr;
  return &it->second.back();
}

std::vector<Statement> StatementStore::all() const { return query("*"); }

void StatementStore::for_each(const std::function<void(Statement&)>& fn) {
  for (auto& [_, bucket] : by_name_)
    for (Statement& st : bucket) fn(st);
}

bool StatementStore::erase(const std::string& name) {
  return by_name_.erase(name) > 0;
}

void StatementStore::clear() { by_name_.clear(); }

std::size_t StatementStore::size() const {
  std::size_t n = 0;
  for (const auto& [_, bucket] : by_name_) n += bucket.size();
  return n;
}

std::size_t StatementStore::tag_assertions() const {
  std::size_t n = 0;
  for (const auto& [_, bucket] : by_name_)
    for (const Statement& st : bucket) n += st.tags.size();
  return n;
}

std::string StatementStore::dump() const {
  std::ostringstream out;
  for (const Statement& st : all()) {
    out << st.name << ' ' << state_symbol(st.state) << ' ' << st.time;
    for (const std::string& tag : st.tags) out << ' ' << tag;
    out << '\n';
  }
  return out.str();
}

bool TagRule::matches(const Statement& st) const {
  if (name && st.name != *name) return false;
  if (state && st.state != *state) return false;
  if (has_tag && !st.tags.count(*has_tag)) return false;
  return true;
}

std::size_t classify(StatementStore& store, const std::vector<TagRule>& rules) {
  std::size_t added = 0;
  store.for_each([&](Statement& st) {
    for (const TagRule& rule : rules) {
      if (rule.matches(st) && st.tags.insert(rule.add_tag).second) ++added;
    }
  });
  return added;
}

}  // namespace fluentnet
