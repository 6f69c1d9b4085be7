#include "fluentnet/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "fluentnet/svg_plot.hpp"

namespace fluentnet {

void MetricsSink::record(RecognitionRecord r) {
  std::lock_guard<std::mutex> lock(mutex_);
  records_.push_back(std::move(r));
}

void MetricsSink::sample(EvalSample s) {
  std::lock_guard<std::mutex> lock(mutex_);
  samples_.push_back(std::move(s));
}

std::vector<RecognitionRecord> MetricsSink::records() const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto out = records_;
  std::sort(out.begin(), out.end(), [](const RecognitionRecord& a, const RecognitionRecord& b) {
    if (a.at != b.at) return a.at < b.at;
    return a.activity < b.activity;
  });
  return out;
}

std::vector<EvalSample> MetricsSink::samples() const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto out = samples_;
  std::sort(out.begin(), out.end(), [](const EvalSample& a, const EvalSample& b) {
    if (a.at != b.at) return a.at < b.at;
    return a.node < b.node;
  });
  return out;
}

void MetricsSink::clear() {
  std::lock_guard<std::mutex> lock(mutex_);
  records_.clear();
  samples_.clear();
}

const double kBaselineRates[8] = {65.6, 86.2, 28.4, 58.9, 82.8, 82.6, 88.1, 67.3};

namespace {

struct WindowState {
  LabelWindow window;
  bool true_positive = false;
  bool stray_hit = false;
  std::optional<Timestamp> first_recognition;
};

double pct(std::size_t part, std::size_t whole) {
  if (whole == 0) return 0;
  return 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

}  // namespace

Scoreboard score(const std::vector<RecognitionRecord>& records,
                 const std::vector<LabelWindow>& labels,
                 const ScoreOptions& options) {
  std::vector<WindowState> windows;
  windows.reserve(labels.size());
  for (const auto& w : labels) windows.push_back({w, false, false, std::nullopt});
  std::sort(windows.begin(), windows.end(), [](const WindowState& a, const WindowState& b) {
    if (a.window.begin != b.window.begin) return a.window.begin < b.window.begin;
    return a.window.activity < b.window.activity;
  });

  auto sorted = records;
  std::sort(sorted.begin(), sorted.end(), [](const RecognitionRecord& a, const RecognitionRecord& b) {
    if (a.at != b.at) return a.at < b.at;
    return a.activity < b.activity;
  });

  Scoreboard board;
  for (const auto& rec : sorted) {
    // Own-activity window containing the recognition wins; otherwise the
    // most recently ended one the grace span still reaches back to.
    WindowState* best = nullptr;
    for (auto& ws : windows) {
      if (ws.window.activity != rec.activity) continue;
      if (rec.at < ws.window.begin || rec.at > ws.window.end + options.grace) continue;
      const bool inside = rec.at <= ws.window.end;
      if (!best) {
        best = &ws;
        if (inside) continue;
      }
      const bool best_inside = rec.at <= best->window.end;
      if (inside && !best_inside) best = &ws;
      else if (inside == best_inside && ws.window.end > best->window.end) best = &ws;
    }
    if (best) {
      best->true_positive = true;
      if (!best->first_recognition || rec.at < *best->first_recognition)
        best->first_recognition = rec.at;
      RecognitionRecord matched = rec;
      matched.run = best->window.run;
      const int index = static_cast<int>(board.matched.size());
      board.matched.push_back(std::move(matched));
      board.matched_window_by_record_index[index] = best->window;
    } else {
      for (auto& ws : windows) {
        if (ws.window.activity == rec.activity) continue;
        if (rec.at >= ws.window.begin && rec.at <= ws.window.end) ws.stray_hit = true;
      }
      board.unmatched.push_back(rec);
    }
  }

  for (int activity = 1; activity <= 8; ++activity) {
    ActivityRates row;
    row.activity = activity;
    std::size_t tp = 0, mis = 0;
    for (const auto& ws : windows) {
      if (ws.window.activity != activity) continue;
      ++row.instances;
      if (ws.true_positive) ++tp;
      else if (ws.stray_hit) ++mis;
    }
    row.true_positive_pct = pct(tp, row.instances);
    row.misclassified_pct = pct(mis, row.instances);
    row.unknown_pct = pct(row.instances - tp - mis, row.instances);
    board.rates.push_back(row);
  }
  return board;
}

std::vector<DelayStats> delay_stats(const Scoreboard& board) {
  // First recognition per matched window defines that window's delay.
  std::map<std::pair<int, Timestamp>, Timestamp> first_by_window;
  for (const auto& [index, window] : board.matched_window_by_record_index) {
    const auto& rec = board.matched[static_cast<std::size_t>(index)];
    auto key = std::make_pair(window.activity, window.begin);
    auto it = first_by_window.find(key);
    if (it == first_by_window.end() || rec.at < it->second) first_by_window[key] = rec.at;
  }

  std::map<int, DelayStats> by_activity;
  for (const auto& [index, window] : board.matched_window_by_record_index) {
    (void)index;
    auto& stats = by_activity[window.activity];
    stats.activity = window.activity;
  }
  std::map<std::pair<int, Timestamp>, DurationMs> delay_by_window;
  for (const auto& [index, window] : board.matched_window_by_record_index) {
    (void)index;
    auto key = std::make_pair(window.activity, window.begin);
    delay_by_window[key] = std::max<DurationMs>(0, first_by_window[key] - window.end);
  }
  std::map<int, std::pair<DurationMs, std::size_t>> sums;
  for (const auto& [key, delay] : delay_by_window) {
    auto& stats = by_activity[key.first];
    stats.activity = key.first;
    ++stats.matched;
    if (delay > 0) ++stats.late;
    stats.worst = std::max(stats.worst, delay);
    auto& sum = sums[key.first];
    sum.first += delay;
    sum.second += 1;
  }
  std::vector<DelayStats> out;
  for (auto& [activity, stats] : by_activity) {
    const auto& sum = sums[activity];
    if (sum.second > 0)
      stats.average = static_cast<double>(sum.first) / static_cast<double>(sum.second);
    out.push_back(stats);
  }
  return out;
}

namespace {

std::string fixed1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

}  // namespace

void export_metrics(const std::string& out_dir,
                    const Scoreboard& board,
                    const std::vector<EvalSample>& samples,
                    const std::vector<LabelWindow>& labels,
                    const ReplaySummary& summary,
                    const ExportOptions& options) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto open = [&](const char* name) {
    std::ofstream out(fs::path(out_dir) / name, std::ios::binary);
    if (!out) throw std::runtime_error(std::string(out_dir) + "/" + name + ": cannot write");
    return out;
  };

  {
    auto out = open("recognitions.csv");
    out << "activity,recognized_at_ms,wall_ms,run,matched,window_begin_ms,window_end_ms\n";
    struct Row {
      const RecognitionRecord* rec;
      const LabelWindow* window;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < board.matched.size(); ++i) {
      auto it = board.matched_window_by_record_index.find(static_cast<int>(i));
      rows.push_back({&board.matched[i], it == board.matched_window_by_record_index.end() ? nullptr : &it->second});
    }
    for (const auto& rec : board.unmatched) rows.push_back({&rec, nullptr});
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      if (a.rec->at != b.rec->at) return a.rec->at < b.rec->at;
      return a.rec->activity < b.rec->activity;
    });
    for (const auto& row : rows) {
      out << row.rec->activity << ',' << row.rec->at << ',' << row.rec->wall_ms << ','
          << row.rec->run << ',' << (row.window ? 1 : 0) << ',';
      if (row.window) out << row.window->begin << ',' << row.window->end;
      else out << ',';
      out << '\n';
    }
  }

  {
    auto out = open("rates.csv");
    out << "activity,instances,true_positive_pct,unknown_pct,misclassified_pct,baseline_pct\n";
    for (const auto& row : board.rates) {
      out << row.activity << ',' << row.instances << ',' << fixed1(row.true_positive_pct) << ','
          << fixed1(row.unknown_pct) << ',' << fixed1(row.misclassified_pct) << ',';
      if (row.activity >= 1 && row.activity <= 8) out << fixed1(kBaselineRates[row.activity - 1]);
      out << '\n';
    }
  }

  {
    auto out = open("delays.csv");
    out << "activity,matched,late,worst_ms,average_ms\n";
    for (const auto& stats : delay_stats(board)) {
      out << stats.activity << ',' << stats.matched << ',' << stats.late << ','
          << stats.worst << ',' << fixed1(stats.average) << '\n';
    }
  }

  std::vector<EvalSample> traced;
  for (const auto& s : samples) {
    if (options.node_filter && s.node != *options.node_filter) continue;
    traced.push_back(s);
  }
  {
    auto out = open("eval_trace.csv");
    out << "node,time_ms,duration_ns,complexity,propagated\n";
    for (const auto& s : traced) {
      out << s.node << ',' << s.at << ',' << s.duration_ns << ',' << s.complexity << ','
          << s.propagated << '\n';
    }
  }

  {
    auto out = open("summary.txt");
    out << "runs: " << summary.runs << '\n'
        << "events delivered: " << summary.delivered << '\n'
        << "events dropped: " << summary.dropped << '\n'
        << "speed: " << fixed1(summary.speed) << '\n'
        << "wall ms: " << summary.wall_ms << '\n'
        << "label windows: " << labels.size() << '\n'
        << "recognitions matched: " << board.matched.size() << '\n'
        << "recognitions stray: " << board.unmatched.size() << '\n';
    for (const auto& row : board.rates) {
      if (row.instances == 0) continue;
      out << "A" << row.activity << ": tp " << fixed1(row.true_positive_pct) << "% unknown "
          << fixed1(row.unknown_pct) << "% misclassified " << fixed1(row.misclassified_pct)
          << "%\n";
    }
  }

  if (options.plots) {
    render_trace_svg((fs::path(out_dir) / "trace.svg").string(), traced, board, labels);
    render_scatter_svg((fs::path(out_dir) / "placing_scatter.svg").string(), traced);
  }
}

}  // namespace fluentnet
