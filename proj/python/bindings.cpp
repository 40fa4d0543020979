#include "lsemink/objective.hpp"
#include "lsemink/problems.hpp"
#include "lsemink/solvers.hpp"
#include "lsemink/types.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

namespace py = pybind11;
using namespace lsemink;

namespace {

py::dict trace_to_dict(const SolveTrace& t) {
  std::vector<double> f, gnorm, shift;
  std::vector<std::uint64_t> work;
  for (const IterationRecord& r : t.records) {
    f.push_back(r.f);
    gnorm.push_back(r.grad_norm);
    work.push_back(r.work_units);
    shift.push_back(r.shift_or_step);
  }
  py::dict d;
  d["method"] = t.method;
  d["status"] = std::string(to_string(t.status));
  d["message"] = t.message;
  d["f"] = f;
  d["grad_norm"] = gnorm;
  d["work_units"] = work;
  d["shift_or_step"] = shift;
  d["x"] = t.final_x;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Log-sum-exp minimization with modified Newton-Krylov solvers";

  py::register_exception<Error>(m, "LseminkError", PyExc_ValueError);

  m.def(
      "logsumexp",
      [](const Vector& z) {
        const LseValue v = logsumexp_stable(z);
        return py::make_tuple(v.value, v.p);
      },
      py::arg("z"), "Return (lse(z), softmax(z)).");

  py::class_<LseObjective>(m, "Objective")
      .def_property_readonly("dim", &LseObjective::dim)
      .def_property_readonly("num_terms", &LseObjective::num_terms)
      .def_property_readonly("alpha", &LseObjective::alpha)
      .def("value", [](const LseObjective& o, const Vector& x) { return o.evaluate(x).f(); })
      .def("gradient",
           [](const LseObjective& o, const Vector& x) { return o.gradient(o.evaluate(x)); })
      .def("hessian_vec",
           [](const LseObjective& o, const Vector& x, const Vector& v) {
             return o.hessian_vec(o.evaluate(x), v);
           })
      .def_property_readonly("matvec_count", &LseObjective::matvec_count);

  m.def("make_gp", &make_gp, py::arg("m"), py::arg("n"), py::arg("eta"), py::arg("seed") = 0);

  m.def(
      "make_synthetic_mlr",
      [](std::size_t num_samples, Eigen::Index n_f, Eigen::Index n_c, Eigen::Index n_p,
         std::uint64_t seed, double alpha) {
        return make_mlr(make_synthetic_classification(num_samples, n_f, n_c, n_p, seed), alpha);
      },
      py::arg("num_samples"), py::arg("n_f"), py::arg("n_c"), py::arg("n_p"),
      py::arg("seed") = 0, py::arg("alpha") = 0.0);

  m.def(
      "solve",
      [](const std::string& method, const LseObjective& obj, std::optional<Vector> x0,
         std::uint64_t max_work_units, double beta0, double gtol) {
        SolverConfig cfg;
        cfg.max_work_units = max_work_units;
        cfg.beta0 = beta0;
        cfg.gtol = gtol;
        const Vector start = x0 ? *x0 : Vector::Zero(obj.dim());
        SolveTrace t;
        {
          py::gil_scoped_release release;
          t = solve(parse_method(method), obj, start, cfg);
        }
        return trace_to_dict(t);
      },
      py::arg("method"), py::arg("objective"), py::arg("x0") = py::none(),
      py::arg("max_work_units") = 3000, py::arg("beta0") = 1.0, py::arg("gtol") = 1e-14,
      "Run one solver and return its trace as a dict of lists.");
}
