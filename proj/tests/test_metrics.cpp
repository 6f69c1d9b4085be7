#include "fluentnet/metrics.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace {

using namespace fluentnet;

RecognitionRecord rec(int activity, Timestamp at, std::int64_t wall = 0) {
  RecognitionRecord r;
  r.activity = activity;
  r.at = at;
  r.wall_ms = wall;
  return r;
}

LabelWindow window(std::string run, int activity, Timestamp begin, Timestamp end) {
  LabelWindow w;
  w.run = std::move(run);
  w.activity = activity;
  w.begin = begin;
  w.end = end;
  return w;
}

const ActivityRates& rates_for(const Scoreboard& board, int activity) {
  for (const auto& row : board.rates)
    if (row.activity == activity) return row;
  REQUIRE(false);
  static ActivityRates none;
  return none;
}

std::string slurp(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("the sink returns time-sorted copies and survives clearing") {
  MetricsSink sink;
  sink.record(rec(2, 900));
  sink.record(rec(1, 100));
  sink.record(rec(1, 900));

  auto records = sink.records();
  REQUIRE(records.size() == 3);
  CHECK(records[0].at == 100);
  CHECK(records[1].activity == 1);
  CHECK(records[2].activity == 2);

  EvalSample b;
  b.node = "O2";
  b.at = 50;
  sink.sample(b);
  EvalSample a;
  a.node = "O1";
  a.at = 50;
  sink.sample(a);
  auto samples = sink.samples();
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].node == "O1");

  sink.clear();
  CHECK(sink.records().empty());
  CHECK(sink.samples().empty());
}

TEST_CASE("concurrent recorders lose nothing") {
  MetricsSink sink;
  std::vector<std::thread> writers;
  for (int t = 0; t < 8; ++t) {
    writers.emplace_back([&sink, t] {
      for (int i = 0; i < 200; ++i) sink.record(rec(t + 1, i));
    });
  }
  for (auto& w : writers) w.join();
  CHECK(sink.records().size() == 1600);
}

TEST_CASE("a recognition inside its own window is a true positive") {
  Scoreboard board = score({rec(1, 500, 7)}, {window("p01", 1, 0, 1000)});
  REQUIRE(board.matched.size() == 1);
  CHECK(board.unmatched.empty());
  CHECK(board.matched[0].run == "p01");
  CHECK(board.matched_window_by_record_index.at(0).begin == 0);

  const auto& row = rates_for(board, 1);
  CHECK(row.instances == 1);
  CHECK(row.true_positive_pct == 100.0);
  CHECK(row.unknown_pct == 0.0);
  CHECK(row.misclassified_pct == 0.0);
}

TEST_CASE("the grace span reaches back to a just-ended window") {
  auto labels = std::vector<LabelWindow>{window("p", 1, 0, 1000)};
  ScoreOptions options;
  options.grace = 60'000;

  CHECK(score({rec(1, 61'000)}, labels, options).matched.size() == 1);
  CHECK(score({rec(1, 61'001)}, labels, options).matched.empty());
  CHECK(score({rec(1, 61'001)}, labels, options).unmatched.size() == 1);
}

TEST_CASE("a recognition before its window does not count") {
  Scoreboard board = score({rec(1, 100)}, {window("p", 1, 500, 1000)});
  CHECK(board.matched.empty());
  CHECK(rates_for(board, 1).unknown_pct == 100.0);
}

TEST_CASE("a stray recognition turns the window it lands in misclassified") {
  Scoreboard board = score({rec(2, 500)}, {window("p", 1, 0, 1000)});
  CHECK(board.matched.empty());
  REQUIRE(board.unmatched.size() == 1);
  const auto& row = rates_for(board, 1);
  CHECK(row.misclassified_pct == 100.0);
  CHECK(row.unknown_pct == 0.0);
}

TEST_CASE("an untouched window counts as unknown") {
  Scoreboard board = score({}, {window("p", 3, 0, 1000)});
  const auto& row = rates_for(board, 3);
  CHECK(row.instances == 1);
  CHECK(row.unknown_pct == 100.0);
}

TEST_CASE("buckets always sum to one hundred per labeled activity") {
  std::vector<LabelWindow> labels = {
      window("p", 1, 0, 1000),      window("p", 1, 10'000, 11'000),
      window("p", 1, 20'000, 21'000), window("p", 2, 30'000, 31'000),
  };
  Scoreboard board = score({rec(1, 500), rec(2, 10'500)}, labels);
  for (const auto& row : board.rates) {
    if (row.instances == 0) continue;
    CHECK(row.true_positive_pct + row.unknown_pct + row.misclassified_pct ==
          doctest::Approx(100.0));
  }
  const auto& a1 = rates_for(board, 1);
  CHECK(a1.true_positive_pct == doctest::Approx(100.0 / 3));
  CHECK(a1.misclassified_pct == doctest::Approx(100.0 / 3));
  CHECK(a1.unknown_pct == doctest::Approx(100.0 / 3));
}

TEST_CASE("a containing window outranks a trailing one") {
  std::vector<LabelWindow> labels = {window("p", 1, 0, 1000),
                                     window("p", 1, 2000, 3000)};
  Scoreboard board = score({rec(1, 2500)}, labels);
  REQUIRE(board.matched.size() == 1);
  CHECK(board.matched_window_by_record_index.at(0).begin == 2000);
}

TEST_CASE("between trailing candidates the most recently ended wins") {
  std::vector<LabelWindow> labels = {window("p", 1, 0, 1000),
                                     window("p", 1, 2000, 3000)};
  Scoreboard board = score({rec(1, 3500)}, labels);
  REQUIRE(board.matched.size() == 1);
  CHECK(board.matched_window_by_record_index.at(0).begin == 2000);
}

TEST_CASE("the rate table always lists activities one through eight") {
  Scoreboard board = score({}, {});
  REQUIRE(board.rates.size() == 8);
  for (int i = 0; i < 8; ++i) {
    CHECK(board.rates[i].activity == i + 1);
    CHECK(board.rates[i].instances == 0);
    CHECK(board.rates[i].true_positive_pct == 0.0);
  }
}

TEST_CASE("delays are recognition minus window end, clamped at zero") {
  std::vector<LabelWindow> labels = {window("p", 1, 0, 1000),
                                     window("p", 1, 10'000, 11'000)};
  Scoreboard board = score({rec(1, 500), rec(1, 12'000)}, labels);
  auto stats = delay_stats(board);
  REQUIRE(stats.size() == 1);
  CHECK(stats[0].activity == 1);
  CHECK(stats[0].matched == 2);
  CHECK(stats[0].late == 1);
  CHECK(stats[0].worst == 1000);
  CHECK(stats[0].average == doctest::Approx(500.0));
}

TEST_CASE("the first recognition in a window defines its delay") {
  Scoreboard board =
      score({rec(1, 1200), rec(1, 1900)}, {window("p", 1, 0, 1000)});
  auto stats = delay_stats(board);
  REQUIRE(stats.size() == 1);
  CHECK(stats[0].matched == 1);
  CHECK(stats[0].worst == 200);
}

TEST_CASE("reference rates cover the eight activities") {
  const double expected[8] = {65.6, 86.2, 28.4, 58.9, 82.8, 82.6, 88.1, 67.3};
  for (int i = 0; i < 8; ++i) CHECK(kBaselineRates[i] == expected[i]);
}

TEST_CASE("exports are written with pinned headers and stable bytes") {
  namespace fs = std::filesystem;
  Scoreboard board = score({rec(1, 500, 5), rec(2, 600, 6)},
                           {window("p01", 1, 0, 1000)});
  std::vector<EvalSample> samples;
  EvalSample s;
  s.node = "O0";
  s.at = 100;
  s.duration_ns = 42;
  s.complexity = 7;
  s.propagated = 3;
  samples.push_back(s);
  s.node = "O1";
  s.at = 150;
  samples.push_back(s);
  ReplaySummary summary;
  summary.delivered = 2;
  summary.runs = 1;
  summary.speed = 4.0;
  std::vector<LabelWindow> labels = {window("p01", 1, 0, 1000)};

  fs::path dir = fs::temp_directory_path() / "fluentnet_metrics_test";
  fs::remove_all(dir);
  export_metrics(dir.string(), board, samples, labels, summary);

  CHECK(slurp(dir / "recognitions.csv") ==
        "activity,recognized_at_ms,wall_ms,run,matched,window_begin_ms,window_end_ms\n"
        "1,500,5,p01,1,0,1000\n"
        "2,600,6,,0,,\n");

  std::string rates = slurp(dir / "rates.csv");
  CHECK(rates.rfind("activity,instances,true_positive_pct,unknown_pct,"
                    "misclassified_pct,baseline_pct\n", 0) == 0);
  CHECK(rates.find("1,1,100.0,0.0,0.0,65.6\n") != std::string::npos);
  CHECK(rates.find("3,0,0.0,0.0,0.0,28.4\n") != std::string::npos);

  CHECK(slurp(dir / "delays.csv") ==
        "activity,matched,late,worst_ms,average_ms\n"
        "1,1,0,0,0.0\n");

  CHECK(slurp(dir / "eval_trace.csv") ==
        "node,time_ms,duration_ns,complexity,propagated\n"
        "O0,100,42,7,3\n"
        "O1,150,42,7,3\n");

  std::string text = slurp(dir / "summary.txt");
  CHECK(text.find("runs: 1\n") != std::string::npos);
  CHECK(text.find("events delivered: 2\n") != std::string::npos);
  CHECK(text.find("speed: 4.0\n") != std::string::npos);
  CHECK(text.find("A1: tp 100.0% unknown 0.0% misclassified 0.0%") !=
        std::string::npos);

  // Identical inputs produce identical bytes for the timeline-derived files.
  fs::path again = fs::temp_directory_path() / "fluentnet_metrics_test2";
  fs::remove_all(again);
  export_metrics(again.string(), board, samples, labels, summary);
  for (const char* name : {"recognitions.csv", "rates.csv", "delays.csv"})
    CHECK(slurp(dir / name) == slurp(again / name));

  fs::remove_all(dir);
  fs::remove_all(again);
}

TEST_CASE("the trace export can be narrowed to one node and plotted") {
  namespace fs = std::filesystem;
  std::vector<EvalSample> samples;
  EvalSample s;
  s.node = "O0";
  s.at = 100;
  s.duration_ns = 1000;
  s.complexity = 5;
  samples.push_back(s);
  s.node = "O3";
  s.at = 200;
  samples.push_back(s);

  Scoreboard board = score({rec(1, 500)}, {window("p", 1, 0, 1000)});
  ExportOptions options;
  options.node_filter = "O0";
  options.plots = true;

  fs::path dir = fs::temp_directory_path() / "fluentnet_metrics_plots";
  fs::remove_all(dir);
  export_metrics(dir.string(), board, samples, {window("p", 1, 0, 1000)},
                 ReplaySummary{}, options);

  std::string trace = slurp(dir / "eval_trace.csv");
  CHECK(trace.find("O0,") != std::string::npos);
  CHECK(trace.find("O3,") == std::string::npos);

  CHECK(slurp(dir / "trace.svg").rfind("<svg", 0) == 0);
  CHECK(slurp(dir / "placing_scatter.svg").rfind("<svg", 0) == 0);
  fs::remove_all(dir);
}
