#include "svilab/cli.hpp"
#include "svilab/io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace svilab;

namespace {

// Paths cross the boundary as (nodes, dim) arrays with time along the rows.
Matrix rows(const GridPath& p) { return p.values().transpose(); }
GridPath from_rows(double dt, const Matrix& values) { return GridPath(dt, values.transpose()); }

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config: malformed JSON: ") + e.what());
  }
}

py::dict solution_dict(const SolutionPair& s) {
  py::dict d;
  d["dt"] = s.x.dt();
  d["x"] = rows(s.x);
  d["k"] = rows(s.k);
  d["tv_k"] = s.tv_k;
  return d;
}

std::string run_study(const std::string& name, const std::string& config, std::uint64_t seed, int workers) {
  const json j = parse(config);
  const RunOptions run{seed, workers};
  ExperimentReport r;
  if (name == "limit-theorem") {
    r = limit_theorem_study(limit_config_from_json(j), run);
  } else if (name == "support-direct") {
    r = support_direct_study(limit_config_from_json(j), run);
  } else if (name == "continuity") {
    r = approx_continuity_study(continuity_config_from_json(j), run);
  } else if (name == "small-ball") {
    r = small_ball_study(small_ball_config_from_json(j), run);
  } else if (name == "levy-area") {
    r = levy_area_study(levy_config_from_json(j), run);
  } else if (name == "k-tail") {
    r = k_tail_study(k_tail_config_from_json(j), run);
  } else {
    throw InputError("study: unknown study '" + name + "'");
  }
  return to_json(r).dump();
}

}  // namespace

PYBIND11_MODULE(_svilab, m) {
  m.doc() = "Numerical laboratory for stochastic variational inequalities";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<UnsupportedError>(m, "UnsupportedError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<OperatorSpec>(m, "Operator")
      .def_static("from_json", [](const std::string& text) { return operator_from_json(parse(text)); })
      .def("to_json", [](const OperatorSpec& s) { return to_json(s).dump(); })
      .def_property_readonly("dim", &OperatorSpec::dim)
      .def_property_readonly("kind", &OperatorSpec::kind_name);

  m.def("evaluate", &evaluate, py::arg("op"), py::arg("x"));
  m.def(
      "resolvent", [](const OperatorSpec& s, double lambda, const Vector& x) { return resolvent(s, lambda, x); },
      py::arg("op"), py::arg("lam"), py::arg("x"));
  m.def(
      "yosida", [](const OperatorSpec& s, double lambda, const Vector& x) { return yosida(s, lambda, x); },
      py::arg("op"), py::arg("lam"), py::arg("x"));
  m.def("minimal_section", &minimal_section, py::arg("op"), py::arg("x"));
  m.def(
      "check_operator_laws",
      [](const OperatorSpec& s, int cases, std::uint64_t seed) {
        const OperatorLawReport r = check_operator_laws(s, cases, seed);
        py::dict d;
        d["cases"] = r.cases;
        d["nonexpansive_excess"] = r.nonexpansive_excess;
        d["lipschitz_excess"] = r.lipschitz_excess;
        d["monotone_deficit"] = r.monotone_deficit;
        d["moreau_error"] = r.moreau_error;
        d["norm_decrease"] = r.norm_decrease;
        d["section_gap"] = r.section_gap;
        d["pass"] = r.pass();
        return d;
      },
      py::arg("op"), py::arg("cases") = 1000, py::arg("seed") = 0);

  m.def(
      "generate_driver",
      [](int noise_dim, double horizon, int level, std::uint64_t seed) {
        return rows(generate_driver(noise_dim, horizon, level, seed).w);
      },
      py::arg("noise_dim"), py::arg("horizon"), py::arg("level"), py::arg("seed"));
  m.def(
      "solve_svi",
      [](const std::string& problem, int level, std::uint64_t seed) {
        const SviProblem p = svi_problem_from_json(parse(problem));
        p.validate();
        const DyadicDriver driver = generate_driver(p.noise_dim(), p.horizon, level, seed);
        const SolutionPair sol = reference_solve(p, driver);
        const ValidationReport v = validate_solution(p, sol, driver.w, sample_graph(p.spec, 100, seed),
                                                     interior_certificate(p.spec));
        py::dict d = solution_dict(sol);
        d["w"] = rows(driver.w);
        d["valid"] = v.all_pass();
        d["dynamics_residual"] = v.dynamics_residual;
        d["flow_slack"] = v.flow_slack;
        return d;
      },
      py::arg("problem"), py::arg("level"), py::arg("seed"),
      "Reference solution of a JSON problem on a fresh driver, with its validation.");
  m.def(
      "skorokhod_oracle",
      [](double x, const Matrix& w, double dt) { return solution_dict(skorokhod_oracle(x, from_rows(dt, w))); },
      py::arg("x"), py::arg("w"), py::arg("dt"));
  m.def("bridge_survival", &bridge_survival, py::arg("a"), py::arg("b"), py::arg("lower"), py::arg("upper"),
        py::arg("t"));
  m.def("run_study", &run_study, py::arg("name"), py::arg("config"), py::arg("seed") = 0, py::arg("workers") = 1,
        "Runs a study from its JSON config and returns the report as JSON text.", py::call_guard<py::gil_scoped_release>());
  m.def(
      "run_cli",
      [](const std::string& command, const std::filesystem::path& config, std::uint64_t seed,
         const std::filesystem::path& out, int workers) {
        std::ostringstream log;
        return run({command, config, seed, out, workers, OutputFormat::both}, log);
      },
      py::arg("command"), py::arg("config"), py::arg("seed") = 0, py::arg("out") = ".", py::arg("workers") = 1,
      "Runs one svilab subcommand; returns its exit status.");
  m.attr("schema_version") = kSchemaVersion;
}
