#include "fluentnet/model_parser.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace fluentnet {

DurationMs parse_duration(const std::string& token) {
  std::size_t i = 0;
  while (i < token.size() && (std::isdigit((unsigned char)token[i]) || token[i] == '.'))
    ++i;
  std::string number = token.substr(0, i);
  std::string suffix = token.substr(i);
  if (number.empty() || std::count(number.begin(), number.end(), '.') > 1)
    throw std::invalid_argument("bad duration '" + token + "'");

  double scale;
  if (suffix.empty() || suffix == "ms") scale = 1;
  else if (suffix == "s") scale = 1000;
  else if (suffix == "min") scale = 60000;
  else throw std::invalid_argument("bad duration suffix '" + token + "'");

  if (number.find('.') != std::string::npos && scale == 1)
    throw std::invalid_argument("fractional milliseconds in '" + token + "'");
  return static_cast<DurationMs>(std::strtod(number.c_str(), nullptr) * scale + 0.5);
}

namespace {

constexpr const char* kTop = "⊤";
constexpr const char* kBot = "⊥";

struct Token {
  std::string text;
  int line = 0;
  int col = 0;
};

bool is_punct(char c) {
  return c == ':' || c == ',' || c == '(' || c == ')' || c == '+' ||
         c == '<' || c == '>' || c == '=';
}

std::vector<Token> scan(const std::string& text, int line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace((unsigned char)text[i])) {
      ++i;
      continue;
    }
    int col = static_cast<int>(i) + 1;
    if (is_punct(text[i])) {
      out.push_back({std::string(1, text[i]), line_no, col});
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < text.size() && !std::isspace((unsigned char)text[i]) &&
           !is_punct(text[i]))
      ++i;
    out.push_back({text.substr(start, i - start), line_no, col});
  }
  return out;
}

/// Cursor over one logical line's tokens.
class Line {
 public:
  Line(std::vector<Token> tokens, int line_no)
      : tokens_(std::move(tokens)), line_(line_no) {}

  bool done() const { return pos_ >= tokens_.size(); }

  const Token& peek() const {
    if (done()) fail("unexpected end of line");
    return tokens_[pos_];
  }

  Token take() {
    Token t = peek();
    ++pos_;
    return t;
  }

  Token expect(const std::string& what) {
    if (done()) fail("expected " + what);
    return take();
  }

  void expect_literal(const std::string& text) {
    Token t = expect("'" + text + "'");
    if (t.text != text)
      throw ParseError("expected '" + text + "', got '" + t.text + "'", t.line, t.col);
  }

  bool accept(const std::string& text) {
    if (!done() && tokens_[pos_].text == text) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& message) const {
    int col = tokens_.empty() ? 1 : tokens_.back().col + (int)tokens_.back().text.size();
    if (!done()) col = tokens_[pos_].col;
    throw ParseError(message, line_, col);
  }

 private:
  std::vector<Token> tokens_;
  int line_;
  std::size_t pos_ = 0;
};

bool parse_state(const Token& t) {
  if (t.text == kTop || t.text == "true") return true;
  if (t.text == kBot || t.text == "false") return false;
  throw ParseError("expected a state glyph or true/false, got '" + t.text + "'",
                   t.line, t.col);
}

struct ThresholdScope {
  const std::map<std::string, DurationMs>& declared;

  /// Greek names get ASCII aliases: d3 for the delta form, e3 for the
  /// epsilon form, so thresholds stay addressable from plain terminals.
  static std::string greek_for(const std::string& ascii) {
    if (ascii.size() < 2 || !std::isdigit((unsigned char)ascii[1])) return {};
    if (ascii[0] == 'd') return "δ" + ascii.substr(1);
    if (ascii[0] == 'e') return "ε" + ascii.substr(1);
    return {};
  }

  std::optional<DurationMs> lookup(const std::string& name) const {
    if (auto it = declared.find(name); it != declared.end()) return it->second;
    std::string greek = greek_for(name);
    if (!greek.empty()) {
      if (auto it = declared.find(greek); it != declared.end()) return it->second;
    }
    return std::nullopt;
  }

  DurationMs duration(const Token& t) const {
    if (auto v = lookup(t.text)) return *v;
    try {
      return parse_duration(t.text);
    } catch (const std::invalid_argument&) {
      throw ParseError("unknown threshold or bad duration '" + t.text + "'",
                       t.line, t.col);
    }
  }
};

std::string time_var(Line& line) {
  line.expect_literal("t");
  line.expect_literal("(");
  Token v = line.expect("variable name");
  line.expect_literal(")");
  return v.text;
}

TimeExpr parse_time_expr(Line& line) {
  Token head = line.expect("time expression");
  if (head.text == "now") return TimeExpr::now();
  auto vars = [&]() {
    std::vector<std::string> out;
    line.expect_literal("(");
    out.push_back(line.expect("variable name").text);
    while (line.accept(",")) out.push_back(line.expect("variable name").text);
    line.expect_literal(")");
    return out;
  };
  if (head.text == "time-of") {
    auto vs = vars();
    if (vs.size() != 1)
      throw ParseError("time-of takes one variable", head.line, head.col);
    return TimeExpr::time_of(vs[0]);
  }
  if (head.text == "max-time") return TimeExpr::max_time(vars());
  if (head.text == "min-time") return TimeExpr::min_time(vars());
  throw ParseError("unknown time expression '" + head.text + "'", head.line,
                   head.col);
}

Rule parse_rule(Line& line, const ThresholdScope& scope) {
  Rule rule;
  Token name = line.expect("rule name");
  rule.name = name.text;
  line.expect_literal(":");
  line.expect_literal("when");

  std::set<std::string> seen;
  do {
    RulePattern pattern;
    Token var = line.expect("pattern variable");
    pattern.variable = var.text;
    if (!seen.insert(pattern.variable).second)
      throw ParseError("duplicate variable '" + pattern.variable + "'",
                       var.line, var.col);
    line.expect_literal(":");
    pattern.required_state = parse_state(line.expect("state"));
    Token binder = line.expect("'is' or 'in'");
    if (binder.text == "is")
      pattern.selector = StatementPattern::by_name(line.expect("statement name").text);
    else if (binder.text == "in")
      pattern.selector = StatementPattern::by_tag(line.expect("tag").text);
    else
      throw ParseError("expected 'is' or 'in', got '" + binder.text + "'",
                       binder.line, binder.col);
    rule.patterns.push_back(std::move(pattern));
  } while (line.accept(","));

  if (line.accept("if")) {
    do {
      TemporalConstraint c;
      c.lhs = time_var(line);
      if (line.accept("+")) c.offset = scope.duration(line.expect("duration"));
      Token rel = line.expect("'<' or '>'");
      if (rel.text == "<") c.relation = TemporalConstraint::Relation::Less;
      else if (rel.text == ">") c.relation = TemporalConstraint::Relation::Greater;
      else
        throw ParseError("expected '<' or '>', got '" + rel.text + "'",
                         rel.line, rel.col);
      c.rhs = time_var(line);
      if (!seen.count(c.lhs) || !seen.count(c.rhs)) {
        const std::string& missing = seen.count(c.lhs) ? c.rhs : c.lhs;
        throw ParseError("unbound variable '" + missing + "' in constraint",
                         rel.line, rel.col);
      }
      rule.constraints.push_back(std::move(c));
    } while (line.accept(","));
  }

  line.expect_literal("then");
  Token out = line.expect("consequent name");
  rule.consequent.name = out.text;
  line.expect_literal(":");
  rule.consequent.state = parse_state(line.expect("state"));
  line.expect_literal("at");
  rule.consequent.time = parse_time_expr(line);
  for (const std::string& v : rule.consequent.time.variables) {
    if (!seen.count(v))
      throw ParseError("unbound variable '" + v + "' in time expression",
                       out.line, out.col);
  }
  if (!line.done()) line.fail("trailing tokens after rule");
  return rule;
}

DwellRule parse_dwell(Line& line, const ThresholdScope& scope) {
  DwellRule dwell;
  dwell.name = line.expect("dwell rule name").text;
  line.expect_literal(":");
  line.expect_literal("over");
  dwell.over = line.expect("statement name").text;
  line.expect_literal("threshold");
  dwell.threshold = scope.duration(line.expect("duration"));
  line.expect_literal("then");
  Token out = line.expect("consequent name");
  dwell.out = out.text;
  line.expect_literal(":");
  if (!parse_state(line.expect("state")))
    throw ParseError("dwell consequents are true-state", out.line, out.col);
  if (!line.done()) line.fail("trailing tokens after dwell rule");
  return dwell;
}

void check_acyclic(const Model& model) {
  // Node per rule; an edge a -> b when a's consequent can feed b's patterns.
  struct NodeRef {
    std::string out;
    std::vector<std::string> needs;
  };
  std::vector<NodeRef> nodes;
  for (const Rule& r : model.rules) {
    NodeRef n{r.consequent.name, {}};
    for (const RulePattern& p : r.patterns)
      if (p.selector.kind == StatementPattern::Kind::Name)
        n.needs.push_back(p.selector.value);
    nodes.push_back(std::move(n));
  }
  for (const DwellRule& d : model.dwell_rules)
    nodes.push_back({d.out, {d.over}});

  std::vector<std::vector<std::size_t>> edges(nodes.size());
  for (std::size_t a = 0; a < nodes.size(); ++a)
    for (std::size_t b = 0; b < nodes.size(); ++b)
      if (std::find(nodes[b].needs.begin(), nodes[b].needs.end(),
                    nodes[a].out) != nodes[b].needs.end())
        edges[a].push_back(b);

  std::vector<int> mark(nodes.size(), 0);  // 0 fresh, 1 on stack, 2 done
  std::function<bool(std::size_t)> visit = [&](std::size_t i) {
    if (mark[i] == 1) return false;
    if (mark[i] == 2) return true;
    mark[i] = 1;
    for (std::size_t j : edges[i])
      if (!visit(j)) return false;
    mark[i] = 2;
    return true;
  };
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (!visit(i))
      throw ParseError("cyclic rule chain through '" + nodes[i].out + "'", 0, 0);
}

}  // namespace

Model parse_model(const std::string& text,
                  const std::map<std::string, DurationMs>& overrides) {
  Model model;
  std::istringstream in(text);
  std::string physical;
  int line_no = 0;

  // Logical lines: a rule/dwell line continues onto lines opening with
  // "if", "then" or "," and past a trailing comma.
  std::vector<std::pair<int, std::string>> logical;
  auto strip = [](std::string s) {
    if (auto hash = s.find('#'); hash != std::string::npos) s.resize(hash);
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, physical)) {
    ++line_no;
    std::string trimmed = strip(physical);
    if (trimmed.empty()) continue;
    bool continuation =
        !logical.empty() &&
        (logical.back().second.back() == ',' || trimmed.rfind("if ", 0) == 0 ||
         trimmed.rfind("then ", 0) == 0 || trimmed[0] == ',');
    bool head = trimmed.rfind("rule ", 0) == 0 || trimmed.rfind("dwell ", 0) == 0 ||
                trimmed.rfind("model ", 0) == 0 || trimmed.rfind("final ", 0) == 0 ||
                trimmed.rfind("threshold ", 0) == 0 || trimmed.rfind("input ", 0) == 0;
    if (continuation && !head)
      logical.back().second += " " + trimmed;
    else
      logical.emplace_back(line_no, trimmed);
  }

  ThresholdScope scope{model.thresholds};
  for (auto& [no, text_line] : logical) {
    Line line(scan(text_line, no), no);
    Token head = line.take();
    if (head.text == "model") {
      model.name = line.expect("model name").text;
    } else if (head.text == "final") {
      model.final_name = line.expect("final statement name").text;
    } else if (head.text == "threshold") {
      Token name = line.expect("threshold name");
      line.expect_literal("=");
      Token value = line.expect("duration");
      try {
        std::string canonical = name.text;
        if (std::string greek = ThresholdScope::greek_for(name.text); !greek.empty())
          canonical = greek;
        DurationMs resolved = parse_duration(value.text);
        if (auto it = overrides.find(canonical); it != overrides.end()) {
          resolved = it->second;
        } else {
          for (const auto& [key, ms] : overrides) {
            if (ThresholdScope::greek_for(key) == canonical) resolved = ms;
          }
        }
        model.thresholds[canonical] = resolved;
      } catch (const std::invalid_argument& e) {
        throw ParseError(e.what(), value.line, value.col);
      }
    } else if (head.text == "input") {
      if (line.accept("tag"))
        model.inputs.push_back(StatementPattern::by_tag(line.expect("tag").text));
      else
        model.inputs.push_back(
            StatementPattern::by_name(line.expect("statement name").text));
    } else if (head.text == "rule") {
      model.rules.push_back(parse_rule(line, scope));
    } else if (head.text == "dwell") {
      model.dwell_rules.push_back(parse_dwell(line, scope));
    } else {
      throw ParseError("unknown directive '" + head.text + "'", head.line,
                       head.col);
    }
    if (!line.done()) line.fail("trailing tokens");
  }

  if (model.rules.empty() && model.dwell_rules.empty())
    throw ParseError("no rules", line_no ? line_no : 1, 1);
  if (model.final_name.empty())
    throw ParseError("missing 'final' declaration", line_no, 1);
  if (model.name.empty())
    throw ParseError("missing 'model' declaration", line_no, 1);

  std::size_t final_producers = 0;
  for (const Rule& r : model.rules)
    if (r.consequent.name == model.final_name) ++final_producers;
  for (const DwellRule& d : model.dwell_rules)
    if (d.out == model.final_name) ++final_producers;
  if (final_producers != 1)
    throw ParseError("final statement '" + model.final_name +
                         "' must be the consequent of exactly one rule (found " +
                         std::to_string(final_producers) + ")",
                     line_no, 1);

  check_acyclic(model);
  return model;
}

std::string print_model(const Model& model) {
  std::ostringstream out;
  out << "model " << model.name << "\n";
  out << "final " << model.final_name << "\n";
  for (const auto& [name, value] : model.thresholds)
    out << "threshold " << name << " = " << value << "ms\n";
  for (const StatementPattern& input : model.inputs) {
    if (input.kind == StatementPattern::Kind::Name)
      out << "input " << input.value << "\n";
    else
      out << "input tag " << input.value << "\n";
  }
  for (const DwellRule& d : model.dwell_rules)
    out << "dwell " << d.name << ": over " << d.over << " threshold "
        << d.threshold << "ms then " << d.out << ":" << kTop << "\n";
  for (const Rule& r : model.rules) {
    out << "rule " << r.name << ": when ";
    for (std::size_t i = 0; i < r.patterns.size(); ++i) {
      const RulePattern& p = r.patterns[i];
      if (i) out << ", ";
      out << p.variable << ":" << state_symbol(p.required_state) << " "
          << (p.selector.kind == StatementPattern::Kind::Name ? "is " : "in ")
          << p.selector.value;
    }
    if (!r.constraints.empty()) {
      out << " if ";
      for (std::size_t i = 0; i < r.constraints.size(); ++i) {
        const TemporalConstraint& c = r.constraints[i];
        if (i) out << ", ";
        out << "t(" << c.lhs << ")";
        if (c.offset != 0) out << "+" << c.offset << "ms";
        out << (c.relation == TemporalConstraint::Relation::Less ? " < " : " > ");
        out << "t(" << c.rhs << ")";
      }
    }
    out << " then " << r.consequent.name << ":"
        << state_symbol(r.consequent.state) << " at ";
    const TimeExpr& te = r.consequent.time;
    switch (te.kind) {
      case TimeExpr::Kind::Now: out << "now"; break;
      case TimeExpr::Kind::TimeOf: out << "time-of(" << te.variables[0] << ")"; break;
      case TimeExpr::Kind::MaxTime:
      case TimeExpr::Kind::MinTime: {
        out << (te.kind == TimeExpr::Kind::MaxTime ? "max-time(" : "min-time(");
        for (std::size_t i = 0; i < te.variables.size(); ++i)
          out << (i ? ", " : "") << te.variables[i];
        out << ")";
        break;
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace fluentnet
