// Python module exposing the main operations: registry parsing and queries,
// topology maths, request parsing, scenario handling, and simulation runs.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "firm/registry.hpp"
#include "firm/scenario.hpp"
#include "firm/sim.hpp"
#include "firm/topology.hpp"

namespace py = pybind11;
using namespace firm;

PYBIND11_MODULE(_firmsim, m) {
  m.doc() = "Service composition control loop and data-center simulation";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_RuntimeError);

  py::class_<EndpointRef>(m, "EndpointRef")
      .def_readonly("impl_name", &EndpointRef::impl_name)
      .def_readonly("variant", &EndpointRef::variant)
      .def_readonly("alias", &EndpointRef::alias)
      .def_readonly("address", &EndpointRef::address)
      .def("__repr__", [](const EndpointRef& e) {
        return "<EndpointRef " + e.alias + "@" + e.address + ">";
      });

  py::class_<Registry>(m, "Registry")
      .def_property_readonly("top_level_count", &Registry::top_level_count)
      .def_property_readonly("service_names",
                             [](const Registry& r) {
                               std::vector<std::string> names;
                               for (const auto& s : r.services()) names.push_back(s.name);
                               return names;
                             })
      .def_property_readonly("composition_names",
                             [](const Registry& r) {
                               std::vector<std::string> names;
                               for (const auto& c : r.compositions()) names.push_back(c.name);
                               return names;
                             })
      .def("total_deployments", &Registry::total_deployments, py::arg("service"))
      .def("lookup_endpoints", &Registry::lookup_endpoints, py::arg("service"))
      .def("validate", &Registry::validate)
      .def("serialize", &Registry::serialize)
      .def("catalog_csv", &Registry::catalog_csv);

  m.def("parse_registry", &parse_registry, py::arg("text"));
  m.def("alternative_path_bound", &alternative_path_bound, py::arg("registry"),
        py::arg("composition"));

  py::class_<PathMetric>(m, "PathMetric")
      .def_readonly("hop_count", &PathMetric::hop_count)
      .def_readonly("inter_rack", &PathMetric::inter_rack)
      .def_readonly("inter_pod", &PathMetric::inter_pod);

  py::class_<Topology>(m, "Topology")
      .def_static("fat_tree", &Topology::fat_tree, py::arg("k"))
      .def_property_readonly("arity", &Topology::arity)
      .def_property_readonly("host_count", &Topology::host_count)
      .def_property_readonly("switch_count", &Topology::switch_count)
      .def("shortest_path", &Topology::shortest_path, py::arg("host_a"), py::arg("host_b"))
      .def("proximity_rank", &Topology::proximity_rank, py::arg("anchors"),
           py::arg("candidates"))
      .def("export_csv", &Topology::export_csv);

  py::class_<InvocationNode>(m, "InvocationNode")
      .def_readonly("id", &InvocationNode::id)
      .def_readonly("service", &InvocationNode::service)
      .def_readonly("parent", &InvocationNode::parent);

  py::class_<CompositionRequest>(m, "CompositionRequest")
      .def_property_readonly("nodes",
                             [](const CompositionRequest& r) { return r.nodes(); });

  m.def("parse_request", &parse_request, py::arg("text"));

  py::class_<EngineParams>(m, "EngineParams")
      .def(py::init<>())
      .def_readwrite("capacity", &EngineParams::capacity)
      .def_readwrite("base_service_time", &EngineParams::base_service_time)
      .def_readwrite("job_size_factor", &EngineParams::job_size_factor)
      .def_readwrite("failure_probability", &EngineParams::failure_probability)
      .def_readwrite("host", &EngineParams::host);

  py::enum_<Mode>(m, "Mode")
      .value("base", Mode::base)
      .value("affinity", Mode::affinity)
      .value("firm", Mode::firm);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("mode", &Scenario::mode)
      .def_readwrite("k", &Scenario::k)
      .def_readwrite("requests", &Scenario::requests)
      .def_readwrite("window", &Scenario::window)
      .def_readwrite("rate", &Scenario::rate)
      .def_readwrite("clients", &Scenario::clients)
      .def_readwrite("seed", &Scenario::seed)
      .def_readwrite("frequency", &Scenario::frequency)
      .def_readwrite("threshold", &Scenario::threshold)
      .def_readwrite("health_window", &Scenario::health_window)
      .def_readwrite("memoize", &Scenario::memoize)
      .def_readwrite("request_templates", &Scenario::request_templates)
      .def_readwrite("defaults", &Scenario::defaults)
      .def("validate", &Scenario::validate);

  m.def("parse_scenario", &parse_scenario, py::arg("text"));

  py::class_<RunTotals>(m, "RunTotals")
      .def_readonly("arrivals", &RunTotals::arrivals)
      .def_readonly("completed", &RunTotals::completed)
      .def_readonly("failures", &RunTotals::failures)
      .def_readonly("admissions", &RunTotals::admissions)
      .def_readonly("memo_hits", &RunTotals::memo_hits)
      .def_readonly("demotions", &RunTotals::demotions)
      .def_readonly("promotions", &RunTotals::promotions)
      .def_readonly("triggers", &RunTotals::triggers);

  py::class_<MetricsRecord>(m, "MetricsRecord")
      .def_readonly("request", &MetricsRecord::request)
      .def_readonly("client", &MetricsRecord::client)
      .def_readonly("arrived", &MetricsRecord::arrived)
      .def_readonly("completion_time", &MetricsRecord::completion_time)
      .def_readonly("inter_rack_hops", &MetricsRecord::inter_rack_hops)
      .def_readonly("result_value", &MetricsRecord::result_value);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("metrics", &RunResult::metrics)
      .def_readonly("totals", &RunResult::totals)
      .def_property_readonly("mode", [](const RunResult& r) { return r.mode; })
      .def("event_log_csv", [](const RunResult& r) { return r.log.to_csv(); })
      .def("metrics_csv", [](const RunResult& r) { return metrics_csv(r.metrics); });

  m.def("run", &run, py::arg("scenario"), py::arg("registry"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<CompareRow>(m, "CompareRow")
      .def_readonly("requests", &CompareRow::requests)
      .def_readonly("mode", &CompareRow::mode)
      .def_readonly("mean_completion", &CompareRow::mean_completion)
      .def_readonly("deviation_pct", &CompareRow::deviation_pct)
      .def_readonly("inter_rack_hops", &CompareRow::inter_rack_hops)
      .def_readonly("completed", &CompareRow::completed)
      .def_readonly("failures", &CompareRow::failures);

  m.def("compare_modes", &compare_modes, py::arg("scenario"), py::arg("registry"),
        py::arg("request_counts"), py::call_guard<py::gil_scoped_release>());
  m.def("deviation_percent", &deviation_percent, py::arg("values"));
}
