#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fluentnet/metrics.hpp"
#include "fluentnet/network.hpp"
#include "fluentnet/replay.hpp"

namespace fluentnet {

/// Resolves an asset reference from a network file: "builtin:<key>" names an
/// embedded asset, anything else is read relative to the file's directory.
using AssetResolver = std::function<std::string(const std::string& ref)>;

AssetResolver builtin_resolver();
AssetResolver file_resolver(const std::string& base_dir);

/// Threshold overrides per model name, e.g. {"A3": {"ε3": 60000}}. ASCII
/// aliases (e3, d1) match their Greek spellings.
using ThresholdOverrides = std::map<std::string, std::map<std::string, DurationMs>>;

/// One recognition pipeline: the model node with its importer feeding it
/// from the context node and the detector watching it.
struct ActivityPackage {
  int index = 0;
  std::string node;
  std::string importer;
  std::string detector;
  Model model;
};

struct NetworkInfo {
  std::string context_node;  // placing node fed by the replay driver
  std::vector<ActivityPackage> packages;
};

/// Registers the standard procedure implementations on a network:
///   importer  params source=<node> target=<node>
///     copies statements matching the target's model input patterns from a
///     source snapshot (append-dedup), then evaluates the target's models
///     and reclassifies; evaluation runs even when nothing new propagated.
///   detector  params node=<node> activity=<1..8>
///     on a Recognized-tagged true statement, emits a RecognitionRecord at
///     that statement's time and clears the node back to its baseline.
///   noop      ignores its dispatch (pre-registered by Network itself).
void register_standard_impls(Network& net);

/// Loads a network definition file into `net`:
///   node <id> policy <overwrite|append> [topology <ref>] [model <ref> ...]
///   tagrule <node> add <Tag> [name <n>] [state <true|false>] [tag <T>]
///   procedure <id> impl <name> [key=value ...]
///   event <procedure>
///   condition <procedure> node <id> <name|tag> <pattern> freq <n>
/// Each `event` line opens a fresh event for its procedure; following
/// `condition` lines fill it. Procedures register once the file is read, in
/// declaration order. '#' starts a comment.
NetworkInfo load_network(Network& net, const std::string& text,
                         const AssetResolver& resolve,
                         const ThresholdOverrides& thresholds = {});

/// The embedded eight-activity network over the embedded topology.
NetworkInfo build_builtin_network(Network& net,
                                  const ThresholdOverrides& thresholds = {});

/// The eight builtin recognition pipelines, indexes 1..8.
std::vector<ActivityPackage> builtin_packages();

/// End-to-end driver used by the CLI and the acceptance harness: builds the
/// network, replays the plan, scores the recognitions against the plan's
/// labels and returns everything the exporters need.
struct RunConfig {
  std::string network_file;  // empty: embedded network
  ThresholdOverrides thresholds;
  double speed = 1.0;
  bool realtime = false;
  DurationMs gap = 180'000;
  std::uint64_t seed = 0;
  DurationMs grace = 60'000;
  bool parallel_dispatch = true;
};

struct RunResult {
  ReplayPlan plan;
  ReplayReport report;
  std::vector<RecognitionRecord> records;  // run column filled from the plan
  std::vector<LabelWindow> labels;
  Scoreboard board;
  std::vector<EvalSample> samples;
  std::vector<RunError> errors;
  ReplaySummary summary;
};

RunResult run_replay(std::vector<Run> runs, const RunConfig& config);

}  // namespace fluentnet
