#include "fluentnet/packages.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fluentnet/builtin_assets.hpp"
#include "fluentnet/model_parser.hpp"

namespace fluentnet {
namespace {

std::string resolve_builtin(const std::string& ref) {
  const std::string key = ref.rfind("builtin:", 0) == 0 ? ref.substr(8) : ref;
  auto found = builtin_asset(key);
  if (!found) throw std::runtime_error("unknown builtin asset '" + key + "'");
  return std::string(*found);
}

std::int64_t elapsed_ns(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now() - since)
      .count();
}

void importer_impl(ProcedureContext& ctx) {
  Node& source = ctx.network.node(ctx.spec.params.at("source"));
  Node& target = ctx.network.node(ctx.spec.params.at("target"));
  const auto started = std::chrono::steady_clock::now();

  std::vector<Statement> snapshot;
  {
    std::lock_guard<std::mutex> lock(source.mutex);
    for (const auto& model : target.models) {
      for (const auto& pattern : model.inputs) {
        for (auto& st : source.store.query(pattern)) snapshot.push_back(std::move(st));
      }
    }
  }

  std::lock_guard<std::mutex> lock(target.mutex);
  std::size_t appended = 0;
  for (auto& st : snapshot) {
    if (target.store.insert(st)) ++appended;
  }
  for (const auto& model : target.models) evaluate_model(model, target.store, ctx.now);
  classify(target.store, target.tag_rules);
  target.refresh_metrics();
  target.metrics.last_eval_ns = elapsed_ns(started);
  ctx.network.sink().sample({target.id(), ctx.now, target.metrics.last_eval_ns,
                             target.metrics.complexity, appended});
}

void detector_impl(ProcedureContext& ctx) {
  Node& node = ctx.network.node(ctx.spec.params.at("node"));
  const int activity = std::stoi(ctx.spec.params.at("activity"));
  const auto started = std::chrono::steady_clock::now();

  std::lock_guard<std::mutex> lock(node.mutex);
  const Statement* hit = nullptr;
  for (const auto& st : node.store.query(StatementPattern::by_tag("Recognized"))) {
    if (!st.state) continue;
    if (!hit || st.time < hit->time) hit = &st;
  }
  if (!hit) return;

  RecognitionRecord rec;
  rec.activity = activity;
  rec.at = hit->time;
  rec.wall_ms = ctx.network.wall_now();
  ctx.network.sink().record(rec);

  node.store.clear();
  node.refresh_metrics();
  node.metrics.last_eval_ns = elapsed_ns(started);
  ctx.network.sink().sample({node.id(), ctx.now, node.metrics.last_eval_ns,
                             node.metrics.complexity, 0});
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw std::runtime_error("network:" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool parse_state(const std::string& tok, std::size_t line) {
  if (tok == "true" || tok == "⊤") return true;
  if (tok == "false" || tok == "⊥") return false;
  fail(line, "bad state '" + tok + "'");
}

Model load_model(const std::string& ref, const AssetResolver& resolve,
                 const ThresholdOverrides& thresholds) {
  const std::string text = resolve(ref);
  Model model = parse_model(text);
  auto it = thresholds.find(model.name);
  if (it == thresholds.end()) return model;
  return parse_model(text, it->second);
}

}  // namespace

AssetResolver builtin_resolver() {
  return [](const std::string& ref) { return resolve_builtin(ref); };
}

AssetResolver file_resolver(const std::string& base_dir) {
  return [base_dir](const std::string& ref) -> std::string {
    if (ref.rfind("builtin:", 0) == 0) return resolve_builtin(ref);
    const auto path = std::filesystem::path(base_dir) / ref;
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
}

void register_standard_impls(Network& net) {
  net.register_impl("importer", importer_impl);
  net.register_impl("detector", detector_impl);
}

NetworkInfo load_network(Network& net, const std::string& text,
                         const AssetResolver& resolve,
                         const ThresholdOverrides& thresholds) {
  std::istringstream in(text);
  std::string raw_line;
  std::size_t lineno = 0;

  std::vector<ProcedureSpec> specs;
  auto spec_of = [&](const std::string& id, std::size_t line) -> ProcedureSpec& {
    for (auto& spec : specs)
      if (spec.id == id) return spec;
    fail(line, "unknown procedure '" + id + "'");
  };

  NetworkInfo info;
  while (std::getline(in, raw_line)) {
    ++lineno;
    if (auto pos = raw_line.find('#'); pos != std::string::npos) raw_line.erase(pos);
    auto tok = split_ws(raw_line);
    if (tok.empty()) continue;
    const std::string& head = tok[0];

    if (head == "node") {
      if (tok.size() < 4 || tok[2] != "policy") fail(lineno, "expected: node <id> policy <overwrite|append> ...");
      StatementStore::Policy policy;
      if (tok[3] == "overwrite") policy = StatementStore::Policy::Overwrite;
      else if (tok[3] == "append") policy = StatementStore::Policy::Append;
      else fail(lineno, "bad policy '" + tok[3] + "'");
      Node& node = net.register_node(tok[1], policy);
      for (std::size_t i = 4; i + 1 < tok.size(); i += 2) {
        if (tok[i] == "topology") {
          node.placing = load_topology(resolve(tok[i + 1]));
          if (info.context_node.empty()) info.context_node = node.id();
        } else if (tok[i] == "model") {
          node.models.push_back(load_model(tok[i + 1], resolve, thresholds));
        } else {
          fail(lineno, "bad node attribute '" + tok[i] + "'");
        }
      }
      node.refresh_metrics();
      node.metrics.baseline = node.metrics.complexity;
    } else if (head == "tagrule") {
      if (tok.size() < 4 || tok[2] != "add") fail(lineno, "expected: tagrule <node> add <Tag> ...");
      TagRule rule;
      rule.add_tag = tok[3];
      for (std::size_t i = 4; i + 1 < tok.size(); i += 2) {
        if (tok[i] == "name") rule.name = tok[i + 1];
        else if (tok[i] == "state") rule.state = parse_state(tok[i + 1], lineno);
        else if (tok[i] == "tag") rule.has_tag = tok[i + 1];
        else fail(lineno, "bad tagrule attribute '" + tok[i] + "'");
      }
      net.node(tok[1]).tag_rules.push_back(std::move(rule));
    } else if (head == "procedure") {
      if (tok.size() < 4 || tok[2] != "impl") fail(lineno, "expected: procedure <id> impl <name> [k=v ...]");
      ProcedureSpec spec;
      spec.id = tok[1];
      spec.impl = tok[3];
      for (std::size_t i = 4; i < tok.size(); ++i) {
        auto eq = tok[i].find('=');
        if (eq == std::string::npos) fail(lineno, "expected key=value, got '" + tok[i] + "'");
        spec.params[tok[i].substr(0, eq)] = tok[i].substr(eq + 1);
      }
      specs.push_back(std::move(spec));
    } else if (head == "event") {
      if (tok.size() != 2) fail(lineno, "expected: event <procedure>");
      spec_of(tok[1], lineno).events.push_back({});
    } else if (head == "condition") {
      if (tok.size() != 8 || tok[2] != "node" || tok[6] != "freq")
        fail(lineno, "expected: condition <procedure> node <id> <name|tag> <pattern> freq <n>");
      ProcedureSpec& spec = spec_of(tok[1], lineno);
      if (spec.events.empty()) fail(lineno, "condition before any event for '" + tok[1] + "'");
      StatementPattern pattern;
      if (tok[4] == "name") pattern = StatementPattern::by_name(tok[5]);
      else if (tok[4] == "tag") pattern = StatementPattern::by_tag(tok[5]);
      else fail(lineno, "expected name or tag, got '" + tok[4] + "'");
      int freq = 0;
      try {
        freq = std::stoi(tok[7]);
      } catch (const std::exception&) {
        fail(lineno, "bad frequency '" + tok[7] + "'");
      }
      if (freq < 1) fail(lineno, "frequency must be >= 1");
      spec.events.back().conditions.push_back(net.add_condition(tok[3], pattern, freq));
    } else {
      fail(lineno, "unknown directive '" + head + "'");
    }
  }

  for (const auto& spec : specs) net.register_procedure(spec);

  for (const auto& spec : specs) {
    if (spec.impl != "detector") continue;
    ActivityPackage pkg;
    pkg.index = std::stoi(spec.params.at("activity"));
    pkg.node = spec.params.at("node");
    pkg.detector = spec.id;
    for (const auto& other : specs) {
      if (other.impl == "importer" && other.params.at("target") == pkg.node) {
        pkg.importer = other.id;
        break;
      }
    }
    const Node& node = net.node(pkg.node);
    if (!node.models.empty()) pkg.model = node.models.front();
    info.packages.push_back(std::move(pkg));
  }
  std::sort(info.packages.begin(), info.packages.end(),
            [](const ActivityPackage& a, const ActivityPackage& b) { return a.index < b.index; });
  return info;
}

NetworkInfo build_builtin_network(Network& net, const ThresholdOverrides& thresholds) {
  register_standard_impls(net);
  return load_network(net, resolve_builtin("network"), builtin_resolver(), thresholds);
}

std::vector<ActivityPackage> builtin_packages() {
  Network net;
  return build_builtin_network(net).packages;
}

RunResult run_replay(std::vector<Run> runs, const RunConfig& config) {
  Network net;
  NetworkInfo info;
  if (config.network_file.empty()) {
    info = build_builtin_network(net, config.thresholds);
  } else {
    std::ifstream in(config.network_file);
    if (!in) throw std::runtime_error(config.network_file + ": cannot open");
    std::stringstream buf;
    buf << in.rdbuf();
    register_standard_impls(net);
    const auto base = std::filesystem::path(config.network_file).parent_path().string();
    info = load_network(net, buf.str(), file_resolver(base.empty() ? "." : base),
                        config.thresholds);
  }
  if (info.context_node.empty()) throw std::runtime_error("network has no topology node");
  net.set_parallel_dispatch(config.parallel_dispatch);

  RunResult result;
  result.plan = build_plan(std::move(runs), config.gap, config.seed);

  ReplayOptions options;
  options.speed = config.speed;
  options.realtime = config.realtime;
  options.ingest_node = info.context_node;
  result.report = replay(net, result.plan, options);

  result.records = net.sink().records();
  for (auto& rec : result.records) rec.run = result.plan.run_at(rec.at);
  result.labels = result.plan.labels();
  ScoreOptions score_options;
  score_options.grace = config.grace;
  result.board = score(result.records, result.labels, score_options);
  result.samples = net.sink().samples();
  result.errors = net.errors();
  result.summary.delivered = result.report.delivered;
  result.summary.dropped = result.report.dropped;
  result.summary.speed = config.speed;
  result.summary.wall_ms = result.report.wall_ms;
  result.summary.runs = result.plan.runs.size();
  return result;
}

}  // namespace fluentnet
