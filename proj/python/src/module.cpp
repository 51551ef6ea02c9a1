#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "bifurcate/run.hpp"

namespace py = pybind11;
using namespace bifurcate;

namespace {

py::array_t<double> to_numpy(const Field& f) {
  py::array_t<double> out(f.size());
  auto w = out.mutable_unchecked<1>();
  for (int i = 0; i < f.size(); ++i) w(i) = static_cast<double>(f[i]);
  return out;
}

Field from_numpy(const Problem& pb, py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  if (a.ndim() != 1 || a.shape(0) != pb.domain().size()) {
    throw DomainError("expected a 1-d array of " + std::to_string(pb.domain().size()) + " values");
  }
  Field f(pb.domain());
  auto r = a.unchecked<1>();
  for (int i = 0; i < f.size(); ++i) f[i] = r(i);
  return f;
}

py::object json_to_py(const io::Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::dict point_dict(const SolutionPoint& p) {
  py::dict d;
  d["a"] = static_cast<double>(p.a());
  d["c"] = static_cast<double>(p.c());
  d["u"] = to_numpy(p.u());
  d["residual"] = static_cast<double>(p.residual_norm);
  d["iterations"] = p.iterations;
  d["morse_index"] = p.morse_index;
  d["degenerate"] = p.degenerate;
  d["tag"] = to_string(p.tag);
  std::vector<double> mu;
  for (const auto& e : p.spectrum.pairs) mu.push_back(static_cast<double>(e.value));
  d["mu"] = mu;
  return d;
}

}  // namespace

PYBIND11_MODULE(_bifurcate, m) {
  m.doc() = "Steady states of -u'' = a u - f(u) - c h on (0, L), Dirichlet conditions";

  // Translators run newest first, so the base class goes first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NonConvergence>(m, "NonConvergence", PyExc_RuntimeError);

  py::class_<Problem>(m, "Problem")
      .def(py::init([](int n_interior, double length, double M, int p, const std::string& harvest, double scale) {
             return Problem(build_grid(n_interior, length), NonlinearitySpec{M, p},
                            HarvestSpec{parse_harvest_profile(harvest), scale});
           }),
           py::arg("n_interior") = 399, py::arg("length") = 1.0, py::arg("M") = 0.2, py::arg("p") = 3,
           py::arg("harvest") = "canonical", py::arg("scale") = 1.0)
      .def_property_readonly("lambda1", [](const Problem& pb) { return static_cast<double>(pb.lambda1()); })
      .def_property_readonly("lambda2", [](const Problem& pb) { return static_cast<double>(pb.lambda2()); })
      .def_property_readonly("lambda3", [](const Problem& pb) { return static_cast<double>(pb.lambda3()); })
      .def_property_readonly("beta", [](const Problem& pb) { return static_cast<double>(pb.beta()); })
      .def_property_readonly("phi", [](const Problem& pb) { return to_numpy(pb.phi()); })
      .def_property_readonly("psi", [](const Problem& pb) { return to_numpy(pb.psi()); })
      .def_property_readonly("harvest", [](const Problem& pb) { return to_numpy(pb.harvest()); })
      .def_property_readonly("nodes", [](const Problem& pb) {
        return to_numpy(Field::sample(pb.domain(), [](Real x) { return x; }));
      });

  m.def("check_hypotheses", [](const Problem& pb) {
    const HypothesisReport r = check_hypotheses(pb.nonlinearity().spec(), pb.harvest_spec(), pb.domain());
    return json_to_py(io::to_json(r));
  });

  m.def(
      "newton_solve",
      [](const Problem& pb, py::array_t<double> u0, double a, double c) {
        return point_dict(newton_solve(pb, from_numpy(pb, u0), a, c));
      },
      py::arg("problem"), py::arg("u0"), py::arg("a"), py::arg("c"));

  m.def(
      "count_solutions",
      [](const Problem& pb, double a, double c, int n_starts, std::uint64_t seed, int threads) {
        CountOptions o;
        o.n_starts = n_starts;
        o.seed = seed;
        o.threads = threads;
        SolutionSet s;
        {
          py::gil_scoped_release release;
          s = count_solutions(pb, a, c, o);
        }
        py::dict d;
        d["count"] = s.count();
        d["indices"] = s.indices();
        py::list members;
        for (const auto& p : s.members) members.append(point_dict(p));
        d["members"] = members;
        d["n_starts"] = s.n_starts;
        d["n_converged"] = s.n_converged;
        d["degenerate"] = static_cast<int>(s.degenerate.size());
        return d;
      },
      py::arg("problem"), py::arg("a"), py::arg("c"), py::arg("n_starts") = 400, py::arg("seed") = 20240917,
      py::arg("threads") = 0);

  m.def(
      "numerical_delta",
      [](const Problem& pb, double halfwidth) { return static_cast<double>(numerical_delta(pb, halfwidth)); },
      py::arg("problem"), py::arg("chart_halfwidth") = 0.8);

  m.def(
      "detect_regime",
      [](const Problem& pb, double a) { return to_string(detect_regime(pb, a, DiagramOptions{})); },
      py::arg("problem"), py::arg("a"));

  m.def(
      "diagram",
      [](const Problem& pb, double a, double c_min, bool verify) {
        DiagramOptions o;
        o.c_min = c_min;
        io::Json j;
        {
          py::gil_scoped_release release;
          const BifurcationDiagram dg = assemble_diagram(pb, a, o);
          j = io::envelope(io::Json::object(), dg, verify ? io::to_json(verify_structure(pb, dg)) : io::Json(nullptr));
        }
        return json_to_py(j);
      },
      py::arg("problem"), py::arg("a"), py::arg("c_min") = -10.0, py::arg("verify") = false);

  m.def(
      "run",
      [](const std::string& command, const std::string& config_text, std::optional<std::string> out, bool force) {
        RunRequest req;
        req.command = command;
        req.config = parse_config(config_text);
        req.force = force;
        if (out) req.out = *out;
        std::ostringstream log, err;
        int status;
        {
          py::gil_scoped_release release;
          status = run(req, log, err).status;
        }
        return py::make_tuple(status, log.str(), err.str());
      },
      py::arg("command"), py::arg("config"), py::arg("out") = py::none(), py::arg("force") = false);
}
