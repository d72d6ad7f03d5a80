#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "torus_floer/errors.hpp"
#include "torus_floer/pipeline.hpp"

namespace py = pybind11;
using namespace floer;

namespace {

py::dict orbit_dict(const PeriodicOrbit& o) {
  py::dict d;
  d["id"] = o.id;
  d["point"] = Vec(o.point());
  d["action"] = o.action;
  d["cz"] = o.cz;
  d["rel_index"] = o.rel_index ? py::cast(*o.rel_index) : py::none();
  d["constant"] = o.is_constant(1e-9);
  return d;
}

std::map<int, std::vector<std::vector<int>>> matrices(const std::map<int, GF2Matrix>& m) {
  std::map<int, std::vector<std::vector<int>>> out;
  for (const auto& [k, v] : m) out[k] = v.to_rows();
  return out;
}

py::dict complex_dict(const GradedComplex& c) {
  std::map<int, std::vector<int>> gens;
  for (const auto& [k, gs] : c.generators)
    for (const auto& g : gs) gens[k].push_back(g.id);
  py::dict d;
  d["generators"] = gens;
  d["boundary"] = matrices(c.boundary);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Morse, Floer and hybrid complexes of trigonometric Hamiltonians on tori";

  static py::exception<Error> err(m, "FloerError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string msg = "[" + e.module() + ", " + to_string(e.kind()) + "] " + e.what();
      PyErr_SetString(err.ptr(), msg.c_str());
    }
  });

  py::class_<TrigTerm>(m, "TrigTerm")
      .def(py::init([](double a, std::vector<int> mm, double phi, int l, double psi) {
             return TrigTerm{a, std::move(mm), phi, l, psi};
           }),
           py::arg("a"), py::arg("m"), py::arg("phi") = 0.0, py::arg("l") = 0, py::arg("psi") = 0.0)
      .def_readwrite("a", &TrigTerm::a)
      .def_readwrite("m", &TrigTerm::m)
      .def_readwrite("phi", &TrigTerm::phi)
      .def_readwrite("l", &TrigTerm::l)
      .def_readwrite("psi", &TrigTerm::psi);

  py::class_<TrigHamiltonian>(m, "TrigHamiltonian")
      .def(py::init<int, std::vector<TrigTerm>>(), py::arg("n"), py::arg("terms"))
      .def_property_readonly("n", &TrigHamiltonian::n)
      .def("value", &TrigHamiltonian::value, py::arg("t"), py::arg("x"))
      .def("gradient", &TrigHamiltonian::gradient, py::arg("t"), py::arg("x"))
      .def("hessian", &TrigHamiltonian::hessian, py::arg("t"), py::arg("x"))
      .def("autonomous", &TrigHamiltonian::autonomous);

  m.def(
      "find_orbits",
      [](const TrigHamiltonian& h) {
        py::list out;
        for (const auto& o : find_orbits(h)) out.append(orbit_dict(o));
        return out;
      },
      py::arg("h"), "Nondegenerate contractible 1-periodic orbits, sorted by action");

  m.def(
      "cz_diagonal",
      [](int n, double lambda) {
        return cz_index(constant_generator_path(lambda * Mat::Identity(2 * n, 2 * n)));
      },
      py::arg("n"), py::arg("lam"), "Conley-Zehnder index of t -> exp(J0 lambda t)");

  m.def(
      "cz_constant",
      [](const Mat& s) { return cz_index(constant_generator_path(s)); }, py::arg("s"),
      "Conley-Zehnder index of t -> exp(J0 S t) for symmetric S");

  m.def(
      "action",
      [](const TrigHamiltonian& h, int N, const Vec& modes) { return ActionContext(h, {h.n(), N}).action(modes); },
      py::arg("h"), py::arg("N"), py::arg("modes"));
  m.def(
      "gradient",
      [](const TrigHamiltonian& h, int N, const Vec& modes) { return ActionContext(h, {h.n(), N}).gradient(modes); },
      py::arg("h"), py::arg("N"), py::arg("modes"), "H^{1/2} gradient of the action in mode coordinates");

  m.def(
      "fredholm_diag",
      [](double a, double b, int n, int N, double L, int intervals, double sigma_rel) {
        const FredholmReport r = fredholm_diag(a, b, {n, N}, L, intervals, sigma_rel);
        py::dict d;
        d["dim_ker"] = r.dim_ker;
        d["dim_coker"] = r.dim_coker;
        d["index"] = r.index;
        d["predicted_index"] = r.predicted_index;
        return d;
      },
      py::arg("a"), py::arg("b"), py::arg("n") = 1, py::arg("N") = 3, py::arg("L") = 3.0,
      py::arg("intervals") = 48, py::arg("sigma_rel") = 1e-6);

  m.def(
      "homology_ranks",
      [](const std::map<int, std::vector<std::vector<int>>>& boundary, const std::map<int, int>& counts) {
        GradedComplex c;
        int id = 0;
        for (const auto& [k, n] : counts)
          for (int i = 0; i < n; ++i) c.generators[k].push_back({id++, 0.0});
        for (const auto& [k, rows] : boundary) {
          GF2Matrix mat(c.count(k - 1), c.count(k));
          for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < rows[i].size(); ++j)
              if (rows[i][j] & 1) mat.set(static_cast<int>(i), static_cast<int>(j), true);
          c.boundary[k] = mat;
        }
        c.check_shapes();
        return homology_ranks(c);
      },
      py::arg("boundary"), py::arg("counts"),
      "GF(2) homology ranks; boundary[k] has rows of degree k-1 and columns of degree k");

  py::class_<RunConfig>(m, "RunConfig")
      .def_readwrite("name", &RunConfig::name)
      .def_readwrite("n", &RunConfig::n)
      .def_readwrite("N", &RunConfig::N)
      .def_readwrite("M_s", &RunConfig::M_s)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("multistart", &RunConfig::multistart)
      .def_readwrite("threads", &RunConfig::threads)
      .def_readwrite("out", &RunConfig::out)
      .def_property_readonly("terms", [](const RunConfig& c) { return c.terms; })
      .def("hamiltonian", &RunConfig::hamiltonian);
  m.def("parse_config", &parse_config, py::arg("text"));
  m.def("load_config", &load_config, py::arg("path"));

  py::class_<Pipeline>(m, "Pipeline")
      .def(py::init<RunConfig, bool>(), py::arg("config"), py::arg("full") = false)
      .def("orbits", &Pipeline::orbits, py::call_guard<py::gil_scoped_release>())
      .def("cz", &Pipeline::cz, py::call_guard<py::gil_scoped_release>())
      .def("morse", &Pipeline::morse, py::call_guard<py::gil_scoped_release>())
      .def("floer", &Pipeline::floer, py::call_guard<py::gil_scoped_release>())
      .def("hybrid", &Pipeline::hybrid, py::call_guard<py::gil_scoped_release>())
      .def("homology", &Pipeline::homology, py::call_guard<py::gil_scoped_release>())
      .def("independent_checks", &Pipeline::independent_checks, py::call_guard<py::gil_scoped_release>())
      .def("verify_all", &Pipeline::verify_all, py::call_guard<py::gil_scoped_release>())
      .def("write_summary", &Pipeline::write_summary)
      .def("all_pass", &Pipeline::all_pass)
      .def("orbit_list",
           [](const Pipeline& p) {
             py::list out;
             for (const auto& o : p.orbit_list()) out.append(orbit_dict(o));
             return out;
           })
      .def("morse_complex", [](const Pipeline& p) { return complex_dict(p.morse_result().complex); })
      .def("floer_complex", [](const Pipeline& p) { return complex_dict(p.floer_result().complex); })
      .def("phi", [](const Pipeline& p) { return matrices(p.phi_result().phi); })
      .def("checks", [](const Pipeline& p) {
        py::list out;
        for (const auto& c : p.checks()) {
          py::dict d;
          d["criterion"] = c.criterion;
          d["name"] = c.name;
          d["pass"] = c.pass;
          d["detail"] = c.detail;
          out.append(d);
        }
        return out;
      });
}
