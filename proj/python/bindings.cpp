// Python bindings: the JSON-level entry point plus a few direct calls.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dfatoms/error.hpp"
#include "dfatoms/io.hpp"
#include "dfatoms/scf.hpp"

namespace py = pybind11;
using namespace dfatoms;

namespace {

py::dict solve(double z, const std::vector<std::tuple<int, int, double>>& shells, std::size_t grid_size, double c) {
  ProblemSpec spec;
  spec.nuclear.charge = z;
  spec.speed_of_light = c;
  spec.grid.size = grid_size;
  for (const auto& [n, kappa, w] : shells) spec.shells.push_back({n, kappa, w});
  SCFReport r;
  {
    py::gil_scoped_release unlock;
    r = scf_solve(spec);
  }
  const auto& psi = r.configuration;
  const RadialGrid& g = *psi.grid;
  py::list orbitals;
  for (const auto& s : psi.shells) {
    py::dict o;
    o["n"] = s.n;
    o["kappa"] = s.channel;
    o["w"] = s.occupation;
    o["energy_shifted"] = s.energy - c * c;
    o["P"] = s.large(g);
    o["Q"] = s.small(g);
    orbitals.append(o);
  }
  py::dict out;
  out["converged"] = r.converged;
  out["iterations"] = r.iterations;
  out["energy_shifted"] = r.energy.shifted;
  out["energy_total"] = r.energy.total;
  out["r"] = g.nodes();
  out["r_mid"] = g.midpoints();
  out["orbitals"] = orbitals;
  out["gram_error"] = psi.gram_error();
  return out;
}

py::dict conditions(double z, double n, double c) {
  const HypothesisReport h = validate_conditions(z, n, c);
  py::dict flags;
  for (const auto& f : h.flags) flags[py::str(f.name)] = f.holds;
  py::dict out;
  out["constant"] = h.constant;
  out["threshold"] = h.threshold;
  out["all_hold"] = h.all_hold();
  out["flags"] = flags;
  return out;
}

std::string run_text(const std::string& config_text) {
  const RunConfig cfg = parse_config_text(config_text);
  RunOutcome out;
  {
    py::gil_scoped_release unlock;
    out = run(cfg);
  }
  return dump_json(out.report);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Closed-shell Dirac-Fock atoms on a radial grid";
  static py::exception<Error> error(m, "DfAtomsError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(std::string(to_string(e.code())) + ": " + e.what());
      py::setattr(exc, "code", py::str(std::string(to_string(e.code()))));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.attr("SPEED_OF_LIGHT") = kSpeedOfLight;
  m.attr("CONFIG_SCHEMA") = kConfigSchema;
  m.attr("REPORT_FORMAT") = kReportFormat;

  m.def("run_json", &run_text, py::arg("config"),
        "Run a configuration given as JSON text; returns the report as JSON text.");
  m.def("default_config", [](const std::string& text) { return dump_json(serialize_config(parse_config_text(text))); },
        py::arg("config"), "Parse a configuration and return it with every default filled in.");
  m.def("oracle_sommerfeld", &oracle_sommerfeld, py::arg("z"), py::arg("kappa"), py::arg("n"),
        py::arg("c") = kSpeedOfLight);
  m.def("oracle_sommerfeld_shifted", &oracle_sommerfeld_shifted, py::arg("z"), py::arg("kappa"), py::arg("n"),
        py::arg("c") = kSpeedOfLight);
  m.def("validate_conditions", &conditions, py::arg("z"), py::arg("n"), py::arg("c") = kSpeedOfLight);
  m.def("solve", &solve, py::arg("z"), py::arg("shells"), py::arg("grid_size") = 2000,
        py::arg("c") = kSpeedOfLight,
        "Closed-shell Dirac-Fock; shells are (n, kappa, occupation) tuples.");
}
