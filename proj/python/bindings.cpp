#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rmtl/error.hpp"
#include "rmtl/estimators.hpp"
#include "rmtl/hypothesis_tests.hpp"
#include "rmtl/report.hpp"
#include "rmtl/simulation.hpp"

namespace py = pybind11;
using namespace rmtl;

namespace {

Sample make_sample(const std::vector<double>& time, const std::vector<int>& status,
                   const std::vector<int>& group) {
  if (time.size() != status.size() || time.size() != group.size()) {
    throw InputError("time, status and group must have the same length");
  }
  std::vector<SurvRecord> records;
  records.reserve(time.size());
  for (std::size_t i = 0; i < time.size(); ++i) {
    records.push_back({time[i], status_from_code(status[i]), group[i]});
  }
  return Sample(std::move(records));
}

PermutationPlan make_plan(std::size_t permutations, std::uint64_t seed, unsigned threads,
                          const std::string& tau_mode) {
  PermutationPlan plan;
  plan.count = permutations;
  plan.seed = seed;
  plan.threads = threads;
  if (tau_mode == "fixed") plan.tau_mode = TauMode::Fixed;
  else if (tau_mode != "recompute") throw InputError("tau_mode must be 'recompute' or 'fixed'");
  return plan;
}

py::dict outcome_dict(const TestOutcome& t) {
  py::dict d;
  d["method"] = std::string(method_name(t.method));
  d["statistic"] = t.statistic;
  d["p_value"] = t.p_value;
  if (t.effect) {
    d["effect"] = py::dict(py::arg("point") = t.effect->point,
                           py::arg("ci_lower") = t.effect->ci_lower,
                           py::arg("ci_upper") = t.effect->ci_upper,
                           py::arg("label") = t.effect->label);
  } else {
    d["effect"] = py::none();
  }
  if (t.meta.stage) d["stage"] = *t.meta.stage;
  if (t.meta.stage_one_level) d["stage_one_level"] = *t.meta.stage_one_level;
  if (t.meta.permutations_used) d["permutations_used"] = *t.meta.permutations_used;
  if (t.meta.permutations_invalid) d["permutations_invalid"] = *t.meta.permutations_invalid;
  if (t.meta.tau) d["tau"] = *t.meta.tau;
  d["warnings"] = t.meta.warnings;
  return d;
}

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

ScenarioConfig config_from_kwargs(const py::kwargs& kwargs) {
  std::string text;
  for (auto [k, v] : kwargs) {
    text += py::str(k).cast<std::string>() + " = " + py::str(v).cast<std::string>() + "\n";
  }
  return validated(parse_config_text(text));
}

}  // namespace

PYBIND11_MODULE(_rmtl, m) {
  m.doc() = "Restricted mean time lost estimation and two-sample tests for competing risks";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<DegenerateError>(m, "DegenerateError", PyExc_RuntimeError);

  py::class_<StepFunction>(m, "StepFunction")
      .def_readonly("knots", &StepFunction::knots)
      .def_readonly("values", &StepFunction::values)
      .def_readonly("value_at_zero", &StepFunction::value_at_zero)
      .def_readonly("horizon", &StepFunction::horizon)
      .def("__call__", &StepFunction::operator())
      .def("left_limit", &StepFunction::left_limit)
      .def("integral", py::overload_cast<double>(&StepFunction::integral, py::const_));

  py::class_<Sample>(m, "Sample")
      .def(py::init(&make_sample), py::arg("time"), py::arg("status"), py::arg("group"))
      .def("__len__", &Sample::size)
      .def("group_size", &Sample::group_size)
      .def("max_time", &Sample::max_time)
      .def_property_readonly("time", [](const Sample& s) {
        std::vector<double> v;
        for (const auto& r : s.records()) v.push_back(r.time);
        return v;
      })
      .def_property_readonly("status", [](const Sample& s) {
        std::vector<int> v;
        for (const auto& r : s.records()) v.push_back(status_code(r.status));
        return v;
      })
      .def_property_readonly("group", [](const Sample& s) {
        std::vector<int> v;
        for (const auto& r : s.records()) v.push_back(r.group);
        return v;
      });

  py::class_<CifEstimate>(m, "CifEstimate")
      .def_readonly("event_type", &CifEstimate::event_type)
      .def_readonly("cif", &CifEstimate::cif)
      .def_readonly("overall_survival", &CifEstimate::overall_survival)
      .def_readonly("n", &CifEstimate::n);

  py::class_<RmtlEstimate>(m, "RmtlEstimate")
      .def_readonly("tau", &RmtlEstimate::tau)
      .def_readonly("point", &RmtlEstimate::point)
      .def_readonly("per_subject_variance", &RmtlEstimate::per_subject_variance)
      .def_readonly("n", &RmtlEstimate::n)
      .def_property_readonly("standard_error", &RmtlEstimate::standard_error);

  py::class_<RcEstimate>(m, "RcEstimate")
      .def_readonly("tau", &RcEstimate::tau)
      .def_readonly("point", &RcEstimate::point)
      .def_readonly("per_subject_variance", &RcEstimate::per_subject_variance)
      .def_readonly("n", &RcEstimate::n)
      .def_property_readonly("standard_error", &RcEstimate::standard_error);

  m.def("read_csv", [](const std::filesystem::path& p) { return parse_dataset(p); }, py::arg("path"));
  m.def("parse_csv", &parse_dataset_text, py::arg("text"));

  m.def("kaplan_meier", [](const Sample& s) { return kaplan_meier(s); }, py::arg("sample"));
  m.def("censoring_km", &censoring_km, py::arg("sample"));
  m.def("aalen_johansen", &aalen_johansen, py::arg("sample"), py::arg("event_type") = 1);
  m.def("rmtl", &rmtl::rmtl, py::arg("cif"), py::arg("tau"));
  m.def("rc", &rc, py::arg("sample"), py::arg("tau"));
  m.def("select_tau", &select_tau, py::arg("sample"));

  m.def("gray_test", [](const Sample& s) { return outcome_dict(gray_test(s)); }, py::arg("sample"));
  m.def("diff_test",
        [](const Sample& s, double tau, double alpha) { return outcome_dict(diff_test(s, tau, alpha)); },
        py::arg("sample"), py::arg("tau"), py::arg("alpha") = 0.05);
  m.def("diff_star_test",
        [](const Sample& s, double tau, double alpha) {
          return outcome_dict(diff_star_test(s, tau, alpha));
        },
        py::arg("sample"), py::arg("tau"), py::arg("alpha") = 0.05);
  m.def("rmst_test",
        [](const Sample& s, double tau, double alpha, const std::string& variant) {
          if (variant != "interest" && variant != "composite") {
            throw InputError("variant must be 'interest' or 'composite'");
          }
          return outcome_dict(rmst_diff_test(
              s, tau, alpha, variant == "interest" ? RmstVariant::Interest : RmstVariant::Composite));
        },
        py::arg("sample"), py::arg("tau"), py::arg("alpha") = 0.05, py::arg("variant") = "interest");
  m.def("combined_tests",
        [](const Sample& s, double tau, double alpha, std::size_t permutations, std::uint64_t seed,
           unsigned threads, const std::string& tau_mode) {
          CombinedOutcomes c;
          {
            py::gil_scoped_release release;
            c = combined_tests(s, tau, alpha, make_plan(permutations, seed, threads, tau_mode));
          }
          py::dict d;
          d["PComb"] = outcome_dict(c.pcomb);
          d["FComb"] = outcome_dict(c.fcomb);
          d["TComb"] = outcome_dict(c.tcomb);
          return d;
        },
        py::arg("sample"), py::arg("tau"), py::arg("alpha") = 0.05, py::arg("permutations") = 200,
        py::arg("seed") = 20200901, py::arg("threads") = 0, py::arg("tau_mode") = "recompute");

  m.def("analyze",
        [](const Sample& s, std::optional<double> tau, double alpha, std::size_t permutations,
           std::uint64_t seed, unsigned threads, const std::string& tau_mode) {
          AnalysisOptions o;
          o.tau = tau;
          o.alpha = alpha;
          o.permutations = permutations;
          o.seed = seed;
          o.threads = threads;
          o.tau_mode = make_plan(permutations, seed, threads, tau_mode).tau_mode;
          AnalysisReport r;
          {
            py::gil_scoped_release release;
            r = analyze(s, o);
          }
          return json_to_py(to_json(r));
        },
        py::arg("sample"), py::arg("tau") = py::none(), py::arg("alpha") = 0.05,
        py::arg("permutations") = 200, py::arg("seed") = 20200901, py::arg("threads") = 0,
        py::arg("tau_mode") = "recompute");
  m.def("format_report", [](const py::dict& report) {
    const auto text = py::module_::import("json").attr("dumps")(report).cast<std::string>();
    return format_text(analysis_report_from_json(nlohmann::json::parse(text)));
  });

  m.def("simulate_dataset",
        [](std::uint64_t seed, const py::kwargs& kwargs) {
          const ScenarioConfig c = config_from_kwargs(kwargs);
          Rng rng(seed);
          return simulate_dataset(c, rng);
        },
        py::arg("seed"),
        "Draw one dataset; keyword arguments use the config-file keys "
        "(scenario, n1, n2, censoring, censoring_mode, p1, beta).");
  m.def("run_monte_carlo",
        [](const py::kwargs& kwargs) {
          const ScenarioConfig c = config_from_kwargs(kwargs);
          MonteCarloReport r;
          {
            py::gil_scoped_release release;
            r = run_monte_carlo(c);
          }
          return json_to_py(to_json(r));
        },
        "Run one Monte Carlo cell; keyword arguments use the config-file keys.");
}
