#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fluentnet/statement.hpp"

namespace fluentnet {

/// One activity recognition as emitted by a detector procedure. `at` is the
/// derived statement's timeline instant; `wall_ms` is when the detector ran
/// (schedule-derived under virtual pacing, measured under real-time pacing).
struct RecognitionRecord {
  int activity = 0;
  Timestamp at = 0;
  std::int64_t wall_ms = 0;
  std::string run;  // filled in by scoring from the replay plan
};

/// One node evaluation observation for the performance trace.
struct EvalSample {
  std::string node;
  Timestamp at = 0;
  std::int64_t duration_ns = 0;
  std::size_t complexity = 0;
  std::size_t propagated = 0;
};

/// Labeled ground-truth span for one activity within a run, on the global
/// replay timeline.
struct LabelWindow {
  std::string run;
  int activity = 0;
  Timestamp begin = 0;
  Timestamp end = 0;
};

/// Serialized collection point: procedures running on any thread append
/// through one lock, and readers receive stable copies (records sorted by
/// time then activity, samples by time then node).
class MetricsSink {
 public:
  void record(RecognitionRecord r);
  void sample(EvalSample s);

  std::vector<RecognitionRecord> records() const;
  std::vector<EvalSample> samples() const;

  void clear();

 private:
  mutable std::mutex mutex_;
  std::vector<RecognitionRecord> records_;
  std::vector<EvalSample> samples_;
};

/// Per-activity outcome rates, percentages over that activity's labeled
/// instances; the three buckets sum to 100 for any activity with at least
/// one labeled window.
struct ActivityRates {
  int activity = 0;
  std::size_t instances = 0;
  double true_positive_pct = 0;
  double unknown_pct = 0;
  double misclassified_pct = 0;
};

struct ScoreOptions {
  DurationMs grace = 60'000;  // recognition may trail its window by this much
};

struct Scoreboard {
  std::vector<ActivityRates> rates;                 // activities 1..8
  std::vector<RecognitionRecord> matched;           // true positives, run/window set
  std::vector<RecognitionRecord> unmatched;         // counted as misclassifications
  std::map<int, LabelWindow> matched_window_by_record_index;  // into `matched`
};

/// Matches recognitions against label windows. A record is a true positive
/// iff its activity has a window containing it or preceding it by at most the
/// grace span; a window with no own-activity recognition counts as
/// misclassified when some other activity's stray recognition landed in it,
/// otherwise unknown.
Scoreboard score(const std::vector<RecognitionRecord>& records,
                 const std::vector<LabelWindow>& labels,
                 const ScoreOptions& options = {});

/// Notification lateness per activity: delay is recognition time minus window
/// end, clamped at zero; windows without a recognition are excluded.
struct DelayStats {
  int activity = 0;
  std::size_t matched = 0;
  std::size_t late = 0;
  DurationMs worst = 0;
  double average = 0;
};

std::vector<DelayStats> delay_stats(const Scoreboard& board);

/// Reference recognition rates published for this eight-activity setup, used
/// as the comparison column in rates.csv.
extern const double kBaselineRates[8];

struct ExportOptions {
  bool plots = false;
  std::optional<std::string> node_filter;  // restrict eval_trace.csv to one node
};

struct ReplaySummary {
  std::size_t delivered = 0;
  std::size_t dropped = 0;
  double speed = 1.0;
  std::int64_t wall_ms = 0;
  std::size_t runs = 0;
};

/// Writes recognitions.csv, rates.csv, delays.csv, eval_trace.csv and
/// summary.txt under `out_dir` (created if missing); with plots enabled also
/// renders trace.svg and placing_scatter.svg. CSV content derived from the
/// timeline is byte-stable for identical seeds; eval_trace.csv carries
/// measured durations and is not.
void export_metrics(const std::string& out_dir,
                    const Scoreboard& board,
                    const std::vector<EvalSample>& samples,
                    const std::vector<LabelWindow>& labels,
                    const ReplaySummary& summary,
                    const ExportOptions& options = {});

}  // namespace fluentnet
