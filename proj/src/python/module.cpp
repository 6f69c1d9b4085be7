#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fluentnet/builtin_assets.hpp"
#include "fluentnet/model_parser.hpp"
#include "fluentnet/packages.hpp"
#include "fluentnet/replay.hpp"
#include "fluentnet/rules.hpp"
#include "fluentnet/store.hpp"

namespace py = pybind11;
using namespace fluentnet;

namespace {

StatementStore::Policy policy_from(const std::string& name) {
  if (name == "overwrite") return StatementStore::Policy::Overwrite;
  if (name == "append") return StatementStore::Policy::Append;
  throw std::invalid_argument("policy must be 'overwrite' or 'append'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Temporal fluent-statement rule engine and replay driver";

  py::class_<Statement>(m, "Statement")
      .def(py::init([](std::string name, bool state, Timestamp time) {
             Statement st;
             st.name = std::move(name);
             st.state = state;
             st.time = time;
             return st;
           }),
           py::arg("name"), py::arg("state"), py::arg("time"))
      .def_readwrite("name", &Statement::name)
      .def_readwrite("state", &Statement::state)
      .def_readwrite("time", &Statement::time)
      .def_readwrite("tags", &Statement::tags)
      .def_readonly("serial", &Statement::serial)
      .def("__repr__", [](const Statement& st) {
        return "Statement(" + st.name + " " + state_symbol(st.state) + " @" +
               std::to_string(st.time) + ")";
      });

  py::class_<StatementStore>(m, "StatementStore")
      .def(py::init([](const std::string& policy) {
             return StatementStore(policy_from(policy));
           }),
           py::arg("policy") = "append")
      .def("insert",
           [](StatementStore& store, const std::string& name, bool state,
              Timestamp time) {
             Statement st;
             st.name = name;
             st.state = state;
             st.time = time;
             return store.insert(std::move(st));
           },
           py::arg("name"), py::arg("state"), py::arg("time"))
      .def("insert", py::overload_cast<Statement>(&StatementStore::insert),
           py::arg("statement"))
      .def("query",
           [](const StatementStore& store, const std::string& name_pattern,
              const std::optional<std::string>& tag) {
             return store.query(name_pattern, tag);
           },
           py::arg("name_pattern") = "*", py::arg("tag") = py::none())
      .def("contains", &StatementStore::contains, py::arg("name"),
           py::arg("state"), py::arg("time"))
      .def("dump", &StatementStore::dump)
      .def("clear", &StatementStore::clear)
      .def("__len__", &StatementStore::size);

  py::class_<Model>(m, "Model")
      .def_readonly("name", &Model::name)
      .def_readonly("final_name", &Model::final_name)
      .def_readonly("thresholds", &Model::thresholds)
      .def_property_readonly(
          "rule_names",
          [](const Model& model) {
            std::vector<std::string> names;
            for (const auto& rule : model.rules) names.push_back(rule.name);
            for (const auto& dwell : model.dwell_rules) names.push_back(dwell.name);
            return names;
          })
      .def("__repr__", [](const Model& model) {
        return "Model(" + model.name + ", final=" + model.final_name + ")";
      });

  m.def("parse_model", &parse_model, py::arg("text"),
        py::arg("overrides") = std::map<std::string, DurationMs>{});
  m.def("print_model", &print_model, py::arg("model"));
  m.def("parse_duration", &parse_duration, py::arg("token"));

  m.def(
      "evaluate_model",
      [](const Model& model, StatementStore& store, Timestamp clock) {
        EvalResult result = evaluate_model(model, store, clock);
        return py::make_tuple(result.satisfied, result.derived);
      },
      py::arg("model"), py::arg("store"), py::arg("clock"),
      "Runs the model to fixpoint; returns (satisfied, derived statements).");

  py::class_<RecognitionRecord>(m, "RecognitionRecord")
      .def_readonly("activity", &RecognitionRecord::activity)
      .def_readonly("at", &RecognitionRecord::at)
      .def_readonly("wall_ms", &RecognitionRecord::wall_ms)
      .def_readonly("run", &RecognitionRecord::run)
      .def("__repr__", [](const RecognitionRecord& rec) {
        return "RecognitionRecord(A" + std::to_string(rec.activity) + " @" +
               std::to_string(rec.at) + ", run=" + rec.run + ")";
      });

  py::class_<ActivityRates>(m, "ActivityRates")
      .def_readonly("activity", &ActivityRates::activity)
      .def_readonly("instances", &ActivityRates::instances)
      .def_readonly("true_positive_pct", &ActivityRates::true_positive_pct)
      .def_readonly("unknown_pct", &ActivityRates::unknown_pct)
      .def_readonly("misclassified_pct", &ActivityRates::misclassified_pct);

  py::class_<RunResult>(m, "ReplayOutcome")
      .def_readonly("records", &RunResult::records)
      .def_property_readonly(
          "rates", [](const RunResult& result) { return result.board.rates; })
      .def_property_readonly(
          "delivered",
          [](const RunResult& result) { return result.summary.delivered; })
      .def_property_readonly(
          "dropped", [](const RunResult& result) { return result.summary.dropped; });

  m.def(
      "replay_runs",
      [](const std::vector<std::pair<std::string, std::string>>& runs,
         double speed, DurationMs gap, std::uint64_t seed,
         const ThresholdOverrides& thresholds) {
        std::vector<Run> parsed;
        for (const auto& [id, text] : runs) parsed.push_back(parse_run(text, id));
        RunConfig config;
        config.speed = speed;
        config.gap = gap;
        config.seed = seed;
        config.thresholds = thresholds;
        return run_replay(std::move(parsed), config);
      },
      py::arg("runs"), py::arg("speed") = 1.0, py::arg("gap") = 180'000,
      py::arg("seed") = 0, py::arg("thresholds") = ThresholdOverrides{},
      "Replays (id, text) event scripts through the embedded network.");

  m.def(
      "builtin_asset",
      [](const std::string& key) -> std::optional<std::string> {
        auto text = builtin_asset(key);
        if (!text) return std::nullopt;
        return std::string(*text);
      },
      py::arg("key"),
      "Embedded asset text by key ('a1'..'a8', 'script:s1'.., 'network', ...).");
}
