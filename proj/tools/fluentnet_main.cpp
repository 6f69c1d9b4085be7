#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fluentnet/builtin_assets.hpp"
#include "fluentnet/model_parser.hpp"
#include "fluentnet/packages.hpp"
#include "fluentnet/replay.hpp"

namespace {

using namespace fluentnet;

/// "A3:ε3=60s" or "A3:e3=60s" -> {model, threshold, duration}.
void add_threshold_override(ThresholdOverrides& overrides, const std::string& arg) {
  auto colon = arg.find(':');
  auto eq = arg.find('=');
  if (colon == std::string::npos || eq == std::string::npos || eq < colon)
    throw CLI::ValidationError("--threshold", "expected <model>:<name>=<duration>, got '" + arg + "'");
  overrides[arg.substr(0, colon)][arg.substr(colon + 1, eq - colon - 1)] =
      parse_duration(arg.substr(eq + 1));
}

ValueMap load_value_map(const std::string& path) {
  ValueMap vm = ValueMap::defaults();
  if (path.empty()) return vm;
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::string token, state;
  while (in >> token >> state) {
    if (state == "true" || state == "1") vm.entries[token] = true;
    else if (state == "false" || state == "0") vm.entries[token] = false;
    else throw std::runtime_error(path + ": bad state '" + state + "' for " + token);
  }
  return vm;
}

std::string read_script(const std::string& ref) {
  if (ref.rfind("builtin:", 0) == 0) {
    auto text = builtin_asset("script:" + ref.substr(8));
    if (!text) throw std::runtime_error("unknown builtin script '" + ref + "'");
    return std::string(*text);
  }
  std::ifstream in(ref);
  if (!in) throw std::runtime_error(ref + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string script_id(const std::string& ref) {
  if (ref.rfind("builtin:", 0) == 0) return ref.substr(8);
  return std::filesystem::path(ref).stem().string();
}

void print_result(const RunResult& result, std::ostream& out) {
  out << "runs: " << result.summary.runs << ", events delivered: " << result.summary.delivered
      << ", dropped: " << result.summary.dropped << ", wall " << result.summary.wall_ms
      << " ms\n";
  for (const auto& rec : result.records) {
    out << "  A" << rec.activity << " recognized at " << rec.at << " ms (run " << rec.run
        << ")\n";
  }
  if (result.records.empty()) out << "  no recognitions\n";
  for (const auto& row : result.board.rates) {
    if (row.instances == 0) continue;
    out << "  A" << row.activity << " rates: tp " << row.true_positive_pct << "% unknown "
        << row.unknown_pct << "% misclassified " << row.misclassified_pct << "%\n";
  }
  for (const auto& err : result.errors) {
    out << "  procedure error: " << err.procedure << " at " << err.at << ": " << err.message
        << "\n";
  }
}

void export_result(const RunResult& result, const std::string& out_dir, bool plots,
                   const std::string& node_filter) {
  if (out_dir.empty()) return;
  ExportOptions options;
  options.plots = plots;
  if (!node_filter.empty()) options.node_filter = node_filter;
  export_metrics(out_dir, result.board, result.samples, result.labels, result.summary, options);
  std::cout << "metrics written to " << out_dir << "\n";
}

int run_validate(const std::string& dir) {
  std::size_t checked = 0, failed = 0;
  auto validate_text = [&](const std::string& label, const std::string& text) {
    ++checked;
    try {
      Model model = parse_model(text);
      Model again = parse_model(print_model(model));
      if (print_model(model) != print_model(again))
        throw std::runtime_error("canonical form is not stable");
      std::cout << label << ": ok (model " << model.name << ", " << model.rules.size()
                << " rules, " << model.dwell_rules.size() << " dwell)\n";
    } catch (const std::exception& e) {
      ++failed;
      std::cout << label << ": " << e.what() << "\n";
    }
  };
  if (dir.empty()) {
    for (const auto& [key, text] : builtin_assets()) {
      if (key.size() == 2 && key[0] == 'a') validate_text("builtin:" + key, std::string(text));
    }
  } else {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".model")
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      std::ifstream in(file);
      std::stringstream buf;
      buf << in.rdbuf();
      validate_text(file.string(), buf.str());
    }
  }
  std::cout << checked << " model(s) checked, " << failed << " failed\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal fluent-statement activity recognition over distributed knowledge nodes"};
  app.require_subcommand(1);

  std::string dataset, variant, network_file, out_dir, node_filter, value_map_file;
  std::vector<std::string> scripts, threshold_args;
  double speed = 1.0;
  std::string gap = "3min", grace = "60s";
  std::uint64_t seed = 0;
  bool plots = false, realtime = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--speed", speed, "Replay speed factor")->check(CLI::PositiveNumber);
    cmd->add_option("--gap", gap, "Gap between concatenated runs (e.g. 3min)");
    cmd->add_option("--seed", seed, "Shuffle seed for run concatenation");
    cmd->add_option("--network", network_file, "Network definition file (default: embedded)");
    cmd->add_option("--out", out_dir, "Directory for metrics files");
    cmd->add_flag("--plots", plots, "Also render SVG plots under --out");
    cmd->add_option("--node", node_filter, "Restrict eval_trace.csv to one node");
    cmd->add_option("--grace", grace, "Scoring grace span after a label window");
    cmd->add_flag("--realtime", realtime, "Pace deliveries on the wall clock");
    cmd->add_option("--threshold", threshold_args,
                    "Model threshold override, <model>:<name>=<duration>; repeatable");
  };

  auto* replay_cmd = app.add_subcommand("replay", "Replay a recorded dataset");
  replay_cmd->add_option("--dataset", dataset, "Dataset file or directory")->required();
  replay_cmd->add_option("--variant", variant, "Dataset subdirectory (sequential, interwoven)");
  replay_cmd->add_option("--value-map", value_map_file,
                         "Extra sensor value tokens, one '<TOKEN> <true|false>' per line");
  add_common(replay_cmd);

  auto* synth_cmd = app.add_subcommand("synth", "Replay bundled or local synthetic scripts");
  synth_cmd
      ->add_option("--script", scripts,
                   "Script file or builtin:<name> (s1..s8, interwoven, burst); repeatable")
      ->required();
  add_common(synth_cmd);

  std::string models_dir;
  auto* validate_cmd = app.add_subcommand("validate-models", "Parse-check model files");
  validate_cmd->add_option("dir", models_dir, "Directory of .model files (default: embedded)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate_cmd->parsed()) return run_validate(models_dir);

    RunConfig config;
    config.network_file = network_file;
    config.speed = speed;
    config.realtime = realtime;
    config.gap = parse_duration(gap);
    config.grace = parse_duration(grace);
    config.seed = seed;
    for (const auto& arg : threshold_args) add_threshold_override(config.thresholds, arg);

    std::vector<Run> runs;
    if (replay_cmd->parsed()) {
      std::string path = dataset;
      if (!variant.empty()) {
        auto sub = std::filesystem::path(dataset) / variant;
        if (std::filesystem::is_directory(sub)) path = sub.string();
        else throw std::runtime_error("variant directory not found: " + sub.string());
      }
      runs = parse_dataset(path, load_value_map(value_map_file));
    } else {
      for (const auto& ref : scripts)
        runs.push_back(parse_run(read_script(ref), script_id(ref)));
    }

    RunResult result = run_replay(std::move(runs), config);
    print_result(result, std::cout);
    export_result(result, out_dir, plots, node_filter);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
