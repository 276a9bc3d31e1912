#include "nsasym/config.hpp"
#include "nsasym/landau.hpp"
#include "nsasym/oseen.hpp"
#include "nsasym/parallel.hpp"
#include "nsasym/perturbed.hpp"
#include "nsasym/potentials.hpp"
#include "nsasym/report.hpp"
#include "nsasym/suites.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>

namespace py = pybind11;
using namespace nsasym;

namespace {

/// Runs one subcommand; returns (report JSON text, timings JSON text).
std::pair<std::string, std::string> run(const std::string& subcommand, const std::map<std::string, std::string>& params) {
  Report report;
  Json timings = Json::object();
  SuiteContext ctx;
  ctx.params = resolve_params(params_for(subcommand), {}, params);
  ctx.seed = static_cast<std::uint64_t>(ctx.params.integer("seed"));
  ctx.output_dir = ctx.params.text("output_dir");
  set_jobs(static_cast<int>(ctx.params.integer("jobs")));
  std::filesystem::create_directories(ctx.output_dir);
  report.set_meta("subcommand", subcommand);
  ctx.report = &report;
  ctx.timings = &timings;
  {
    py::gil_scoped_release release;
    run_subcommand(subcommand, ctx);
  }
  return {report.to_json("").dump(), timings.dump()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Landau solutions, Oseen kernels, potentials and the perturbed Picard solver";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  auto conv = py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<DivergenceError>(m, "DivergenceError", conv.ptr());
  py::register_exception<EvaluationError>(m, "EvaluationError", PyExc_RuntimeError);

  m.def("b_of_A", &b_of_A, py::arg("A"));
  m.def("a_of_b", &a_of_b, py::arg("mag_b"), py::arg("tol") = 1e-13);

  py::class_<LandauSolution>(m, "LandauSolution")
      .def(py::init<const Vec3&, double>(), py::arg("b"), py::arg("tol") = 1e-13)
      .def_static("from_A", &LandauSolution::from_A, py::arg("A"), py::arg("axis"))
      .def_property_readonly("b", &LandauSolution::b)
      .def_property_readonly("A", &LandauSolution::A)
      .def("velocity", &LandauSolution::velocity, py::arg("x"))
      .def("velocity_gradient", &LandauSolution::velocity_gradient, py::arg("x"))
      .def("pressure", &LandauSolution::pressure, py::arg("x"));

  m.def("heat_kernel", &heat_kernel, py::arg("t"), py::arg("x"));
  m.def("oseen", [](double t, const Vec3& x) { return oseen_eval(t, x); }, py::arg("t"), py::arg("x"));
  m.def("oseen_brute", &oseen_brute, py::arg("t"), py::arg("x"), py::arg("order") = 48);

  m.def(
      "int_est_ratio",
      [](double b, double c, double mu, double lambda, double t, const std::vector<Vec3>& xs) {
        return int_est_ratio(IntEstParams(b, c, mu, lambda, t), xs).ratios;
      },
      py::arg("b"), py::arg("c"), py::arg("mu"), py::arg("lam"), py::arg("t"), py::arg("x_samples"));

  m.def("subcommands", &subcommands);
  m.def("_run", &run, py::arg("subcommand"), py::arg("params"));
}
