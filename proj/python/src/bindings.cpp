// Python bindings for the model checker: text in, plain dicts and lists out.
// The heavy lifting stays in the C++ core; this layer only converts values
// and maps the error types onto Python exceptions.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ctmck/ctmc.hpp"
#include "ctmck/engine.hpp"
#include "ctmck/errors.hpp"
#include "ctmck/model.hpp"
#include "ctmck/property.hpp"
#include "ctmck/ram.hpp"
#include "ctmck/sim.hpp"

namespace py = pybind11;
using namespace ctmck;

namespace {

std::map<std::string, Value> to_overrides(const py::dict& d) {
  std::map<std::string, Value> out;
  for (auto item : d) {
    std::string name = py::cast<std::string>(item.first);
    py::handle v = item.second;
    if (py::isinstance<py::bool_>(v)) {
      out.emplace(name, Value::boolean(py::cast<bool>(v)));
    } else if (py::isinstance<py::int_>(v)) {
      out.emplace(name, Value::integer(py::cast<long long>(v)));
    } else if (py::isinstance<py::float_>(v)) {
      out.emplace(name, Value::real(py::cast<double>(v)));
    } else {
      throw py::type_error("override '" + name +
                           "' must be a bool, int, or float");
    }
  }
  return out;
}

SolverOptions solver_options(double eps) {
  SolverOptions opt;
  opt.eps = eps;
  opt.steady_tol = eps;
  opt.linear_tol = eps;
  return opt;
}

Ctmc build_chain(const std::string& model_text, const py::dict& overrides) {
  ModelAst bound = bind_constants(parse_model(model_text), to_overrides(overrides));
  return build_state_space(bound);
}

std::vector<Property> parse_queries(const std::vector<std::string>& queries) {
  std::vector<Property> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(parse_property(q));
  return out;
}

}  // namespace

PYBIND11_MODULE(_ctmck, m) {
  m.doc() = "CSL model checking and simulation for guarded-command CTMC models";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<NumericsError>(m, "NumericsError", PyExc_ArithmeticError);

  m.def(
      "check",
      [](const std::string& model, const std::vector<std::string>& queries,
         const py::dict& overrides, double eps) {
        Ctmc c = build_chain(model, overrides);
        auto results = check_all(c, parse_queries(queries), solver_options(eps));
        py::list out;
        for (const auto& r : results) {
          py::dict d;
          d["query"] = r.text;
          d["numeric"] = r.numeric;
          d["value"] = r.value;
          d["satisfied"] = r.numeric ? py::object(py::none())
                                     : py::object(py::bool_(r.satisfied));
          d["tolerance"] = r.tolerance;
          d["seconds"] = r.seconds;
          out.append(std::move(d));
        }
        return out;
      },
      py::arg("model"), py::arg("queries"),
      py::arg("overrides") = py::dict(), py::arg("eps") = 1e-10,
      "Evaluate CSL queries on a model given as source text. Returns one dict "
      "per query with its canonical text, numeric value, and (for threshold "
      "queries) the verdict at the initial state.");

  m.def(
      "simulate",
      [](const std::string& model, const std::vector<std::string>& queries,
         const py::dict& overrides, uint64_t replications, uint64_t seed,
         double confidence) {
        Ctmc c = build_chain(model, overrides);
        SimConfig cfg;
        cfg.replications = replications;
        cfg.seed = seed;
        cfg.confidence = confidence;
        py::list out;
        for (const auto& p : parse_queries(queries)) {
          Estimate e = estimate_query(c, p, cfg);
          py::dict d;
          d["query"] = p.text;
          d["mean"] = e.mean;
          d["ci_low"] = e.ci_low;
          d["ci_high"] = e.ci_high;
          d["stddev"] = e.stddev;
          d["replications"] = e.replications;
          d["seed"] = e.seed;
          d["confidence"] = e.confidence;
          out.append(std::move(d));
        }
        return out;
      },
      py::arg("model"), py::arg("queries"),
      py::arg("overrides") = py::dict(), py::arg("replications") = 100000,
      py::arg("seed") = 1, py::arg("confidence") = 0.99,
      "Monte Carlo estimates with confidence intervals, one dict per query. "
      "Results are reproducible for a fixed seed.");

  m.def(
      "sweep",
      [](const std::string& model, const std::vector<std::string>& queries,
         const std::vector<std::string>& sweeps, const py::dict& overrides,
         double eps, unsigned jobs) {
        ModelAst ast = parse_model(model);
        if (py::len(overrides) > 0)
          ast = bind_constants(ast, to_overrides(overrides));
        std::vector<ram::SweepSpec> specs;
        for (const auto& s : sweeps) specs.push_back(ram::parse_sweep(s));
        ram::SweepTable t = ram::run_sweep(ast, parse_queries(queries), specs,
                                           solver_options(eps), jobs);
        py::list rows;
        for (const auto& row : t.rows) {
          py::dict d;
          d["params"] = row.params;
          d["query"] = row.query;
          d["value"] = row.value;
          rows.append(std::move(d));
        }
        py::dict out;
        out["columns"] = t.columns;
        out["rows"] = rows;
        out["csv"] = ram::sweep_csv(t);
        return out;
      },
      py::arg("model"), py::arg("queries"), py::arg("sweeps"),
      py::arg("overrides") = py::dict(), py::arg("eps") = 1e-10,
      py::arg("jobs") = 1,
      "Evaluate queries over a parameter grid ('name=lo:hi:step', at most "
      "two). Returns the table rows plus the CSV text.");

  m.def(
      "run_manifest",
      [](const std::string& path, const std::string& out_dir, double eps,
         unsigned jobs) {
        ram::Manifest man = ram::load_manifest(path);
        std::string base = std::filesystem::path(path).parent_path().string();
        auto results =
            ram::run_manifest(man, base, out_dir, solver_options(eps), jobs);
        py::list out;
        for (const auto& r : results) {
          py::dict d;
          d["name"] = r.name;
          d["rows"] = r.table.rows.size();
          d["csv"] = r.csv;
          d["file"] = r.file;
          out.append(std::move(d));
        }
        return out;
      },
      py::arg("path"), py::arg("out_dir") = std::string(),
      py::arg("eps") = 1e-10, py::arg("jobs") = 1,
      "Run every experiment in a manifest file. Writes one CSV per experiment "
      "under out_dir when it is non-empty; the CSV text is always returned.");

  m.def(
      "export_dot",
      [](const std::string& model, const py::dict& overrides) {
        return export_dot(build_chain(model, overrides));
      },
      py::arg("model"), py::arg("overrides") = py::dict(),
      "Render the reachable state space as a DOT digraph.");

  m.def(
      "export_csv",
      [](const std::string& model, const py::dict& overrides) {
        return export_csv(build_chain(model, overrides));
      },
      py::arg("model"), py::arg("overrides") = py::dict(),
      "Serialize the transitions as CSV (source,target,rate,action).");

  m.def(
      "satellite_source",
      []() { return ram::satellite_source(ram::satellite_defaults()); },
      "Source text of the bundled single-satellite model at its defaults.");

  m.def(
      "constellation_source",
      []() { return ram::constellation_source(ram::constellation_defaults()); },
      "Source text of the bundled constellation model at its defaults.");
}
