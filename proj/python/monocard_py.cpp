#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "monocard/errors.hpp"
#include "monocard/harness.hpp"
#include "monocard/plan_model.hpp"
#include "monocard/similarity.hpp"
#include "monocard/validator.hpp"

namespace py = pybind11;
using namespace monocard;

namespace {

py::dict verdictDict(const Verdict& v) {
    py::dict d;
    d["kind"] = verdictName(v);
    if (const auto* x = std::get_if<Violation>(&v)) {
        d["original"] = x->originalEstimate;
        d["restricted"] = x->restrictedEstimate;
        d["margin"] = x->margin;
    } else if (const auto* x = std::get_if<Incomparable>(&v)) {
        d["distance"] = x->distance;
    }
    return d;
}

py::dict statsDict(const RunStats& s) {
    py::dict d;
    d["pairs_validated"] = s.pairsValidated;
    d["passes"] = s.passes;
    d["violations"] = s.violations;
    d["incomparables"] = s.incomparables;
    d["errors"] = s.errors;
    d["elapsed"] = s.elapsed;
    d["violation_rate"] = s.violationRateText();
    return d;
}

}  // namespace

PYBIND11_MODULE(pymonocard, m) {
    m.doc() = "Cardinality restriction monotonicity checks";

    // Translators are tried newest first, so the base class goes first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<MalformedPlan>(m, "MalformedPlan", PyExc_ValueError);
    py::register_exception<MissingEstimate>(m, "MissingEstimate", PyExc_ValueError);
    py::register_exception<AdapterUnavailable>(m, "AdapterUnavailable", PyExc_ConnectionError);

    py::class_<PlanNode>(m, "PlanNode")
        .def_readonly("op_name", &PlanNode::opName)
        .def_readonly("estimated_rows", &PlanNode::estimatedRows)
        .def_readonly("children", &PlanNode::children)
        .def("flatten", [](const PlanNode& n) { return flatten(n); })
        .def("root_estimate", [](const PlanNode& n) { return rootEstimate(n); });

    m.def("edit_distance", &editDistance, py::arg("a"), py::arg("b"));
    m.def("parse_text_plan", &parseTextPlan, py::arg("text"));
    m.def(
        "check_pair",
        [](const std::string& original, const std::string& restricted, double epsilon, std::size_t threshold) {
            return verdictDict(checkPair(parseTextPlan(original), parseTextPlan(restricted), {epsilon, threshold}));
        },
        py::arg("original"), py::arg("restricted"), py::arg("epsilon") = 0.0, py::arg("similarity_threshold") = 1);
    m.def(
        "run_campaign",
        [](std::uint64_t pairs, std::uint64_t seed, const std::vector<std::string>& bugs, int workers) {
            RunConfig cfg;
            cfg.pairs = pairs;
            cfg.seed = seed;
            cfg.workers = workers;
            for (const auto& b : bugs) cfg.bugs.insert(parseBug(b));
            CampaignResult result;
            {
                py::gil_scoped_release release;
                result = runCampaign(cfg);
            }
            py::dict d = statsDict(result.stats);
            py::list signatures;
            for (const auto& r : result.reports) signatures.append(r.signature);
            d["signatures"] = signatures;
            return d;
        },
        py::arg("pairs"), py::arg("seed") = 0, py::arg("bugs") = std::vector<std::string>{}, py::arg("workers") = 1);
    m.def(
        "replay_offline",
        [](const std::string& reportDir) {
            const auto result = replay(readReport(reportDir), nullptr, true);
            py::dict d = verdictDict(result.verdict);
            d["mismatch"] = result.mismatch;
            return d;
        },
        py::arg("report_dir"));
}
