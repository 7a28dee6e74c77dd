#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "rsjd/cli.hpp"
#include "rsjd/json_io.hpp"
#include "rsjd/measures.hpp"
#include "rsjd/memm.hpp"
#include "rsjd/simulate.hpp"
#include "rsjd/volterra.hpp"

namespace py = pybind11;
using namespace rsjd;

namespace {

// Models and changes cross the boundary as JSON text.
ModelSpec model_arg(const std::string& text) { return model_from_json(Json::parse(text)); }
MeasureChangeSpec change_arg(const std::string& text) { return change_from_json(Json::parse(text)); }

py::dict grid_dict(const GridFunctionSet& g) {
  py::dict d;
  d["t"] = g.grid;
  d["values"] = g.values;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Regime-switching jump-diffusion toolkit";

  py::register_exception<SpecError>(m, "SpecError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::class_<MemmProblem>(m, "MemmProblem")
      .def(py::init<>())
      .def(py::init([](std::array<double, 2> lambda, std::array<double, 2> c, std::array<double, 2> h,
                       std::array<double, 2> sigma) {
             MemmProblem p{lambda, c, h, sigma};
             p.validate();
             return p;
           }),
           py::arg("lambda_"), py::arg("c"), py::arg("h"), py::arg("sigma"))
      .def_readwrite("lambda_", &MemmProblem::lambda)
      .def_readwrite("c", &MemmProblem::c)
      .def_readwrite("h", &MemmProblem::h)
      .def_readwrite("sigma", &MemmProblem::sigma);

  py::class_<EntropyCoefficients>(m, "EntropyCoefficients")
      .def_readonly("b1", &EntropyCoefficients::b1)
      .def_readonly("b2", &EntropyCoefficients::b2)
      .def_readonly("A1", &EntropyCoefficients::A1)
      .def_readonly("A2", &EntropyCoefficients::A2)
      .def_readonly("B", &EntropyCoefficients::B)
      .def_readonly("lambda1_star", &EntropyCoefficients::lambda1_star)
      .def_readonly("lambda2_star", &EntropyCoefficients::lambda2_star);

  py::class_<MemmSolution>(m, "MemmSolution")
      .def_readonly("lambda_star", &MemmSolution::lambda_star)
      .def_readonly("sigma_star", &MemmSolution::sigma_star)
      .def_readonly("coefficients", &MemmSolution::coefficients)
      .def_readonly("converged", &MemmSolution::converged)
      .def_readonly("diagnostic", &MemmSolution::diagnostic)
      .def_property_readonly("kind", [](const MemmSolution& s) { return to_string(s.kind); });

  py::class_<LevySolution>(m, "LevySolution")
      .def_readonly("beta_star", &LevySolution::beta_star)
      .def_readonly("lambda_star", &LevySolution::lambda_star)
      .def_readonly("entropy_slope", &LevySolution::entropy_slope);

  m.def("figure_one_problem", &figure_one_problem);
  m.def("symmetric_problem", &symmetric_problem);
  m.def("memm_b", &memm_b, py::arg("problem"), py::arg("regime"), py::arg("x"));
  m.def("solve_short_term", &solve_short_term, py::arg("problem"), py::arg("tol") = 1e-12);
  m.def("solve_long_term", &solve_long_term, py::arg("problem"), py::arg("tol") = 1e-12);
  m.def("solve_horizon", &solve_horizon, py::arg("problem"), py::arg("t"), py::arg("initial_state") = 0,
        py::arg("tol") = 1e-10);
  m.def("horizon_entropy", &horizon_entropy, py::arg("problem"), py::arg("t"), py::arg("initial_state"),
        py::arg("lambda1_star"), py::arg("lambda2_star"));
  m.def("solve_levy", &solve_levy, py::arg("c"), py::arg("h"), py::arg("sigma"), py::arg("lambda_"),
        py::arg("tol") = 1e-12);
  m.def(
      "closed_form_entropy",
      [](double b1, double b2, double l1, double l2, double t) {
        const auto r = closed_form_entropy(b1, b2, l1, l2, t);
        return py::make_tuple(r.H1, r.H2, r.coefficients);
      },
      py::arg("b1"), py::arg("b2"), py::arg("lambda1_star"), py::arg("lambda2_star"), py::arg("t"));
  m.def(
      "horizon_sweep",
      [](const MemmProblem& p, const std::vector<double>& times, std::size_t i0) {
        std::ostringstream os;
        write_sweep_csv(os, horizon_sweep(p, times, i0));
        return os.str();
      },
      py::arg("problem"), py::arg("times"), py::arg("initial_state") = 0);

  m.def(
      "validate_model",
      [](const std::string& model, double horizon) { return to_json(validate_model(model_arg(model), horizon)).dump(); },
      py::arg("model_json"), py::arg("horizon"));
  m.def(
      "solve_mu",
      [](const std::string& model, double horizon, double step) { return grid_dict(solve_mu(model_arg(model), horizon, step)); },
      py::arg("model_json"), py::arg("horizon"), py::arg("step") = 0.0);
  m.def(
      "solve_entropy",
      [](const std::string& model, const std::string& change, double horizon, double step) {
        return grid_dict(solve_entropy(model_arg(model), change_arg(change), horizon, step));
      },
      py::arg("model_json"), py::arg("change_json"), py::arg("horizon"), py::arg("step") = 0.0);
  m.def(
      "mc_expectation",
      [](const std::string& model, std::size_t i0, const std::vector<double>& times, std::size_t n_paths,
         std::uint64_t seed) {
        McConfig cfg;
        cfg.n_paths = n_paths;
        cfg.seed = seed;
        py::list rows;
        for (const auto& e : mc_expectation(model_arg(model), i0, Functional::TerminalX, times, cfg))
          rows.append(py::make_tuple(e.t, e.estimate, e.std_error));
        return rows;
      },
      py::arg("model_json"), py::arg("initial_state"), py::arg("times"), py::arg("n_paths") = 10000,
      py::arg("seed") = 0);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"rsjd"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
