#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "calibr/acceptance.hpp"
#include "calibr/io.hpp"

namespace py = pybind11;
using namespace calibr;

namespace {

// Reports cross the boundary as plain dicts, with the same fields as the CLI JSON.
py::object to_py(const io::Json& j) { return py::module_::import("json").attr("loads")(io::dump(j)); }

io::Json from_py(const py::object& o) {
  return io::parse_json(py::module_::import("json").attr("dumps")(o).cast<std::string>(), "<python>");
}

ExteriorElement form_from_dict(int n, int p, const std::map<std::vector<int>, double>& terms) {
  ExteriorElement a(n, p);
  for (const auto& [idx, c] : terms) {
    if (static_cast<int>(idx.size()) != p) throw DimensionError("term length does not match degree");
    a += ExteriorElement::basis(n, std::span<const int>(idx), c);
  }
  return a;
}

py::dict terms_dict(const ExteriorElement& a) {
  py::dict d;
  for (const auto& [b, c] : a.terms()) d[py::tuple(py::cast(b.indices()))] = c;
  return d;
}

std::vector<Eigen::VectorXd> to_points(const std::vector<std::vector<double>>& pts) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& p : pts) out.push_back(Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size())));
  return out;
}

}  // namespace

PYBIND11_MODULE(_calibr, m) {
  m.doc() = "Calibrated geometry in flat R^n";
  m.attr("__version__") = "0.1.0";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);

  py::class_<ExteriorElement>(m, "Form")
      .def(py::init<int, int>(), py::arg("n"), py::arg("p"))
      .def(py::init(&form_from_dict), py::arg("n"), py::arg("p"), py::arg("terms"),
           "Terms map 1-based increasing index tuples to coefficients.")
      .def_static("from_dense", &ExteriorElement::from_dense, py::arg("n"), py::arg("p"), py::arg("coeffs"))
      .def_static("from_json", [](const py::object& o) { return io::form_from_json(from_py(o)); })
      .def_property_readonly("n", &ExteriorElement::dim)
      .def_property_readonly("p", &ExteriorElement::degree)
      .def("terms", &terms_dict)
      .def("to_dense", &ExteriorElement::to_dense)
      .def("to_json", [](const ExteriorElement& a) { return to_py(io::form_to_json(a)); })
      .def("norm", &ExteriorElement::norm)
      .def(py::self + py::self)
      .def(py::self - py::self)
      .def(py::self * double())
      .def(double() * py::self)
      .def(-py::self)
      .def("__repr__", [](const ExteriorElement& a) { return "Form(" + to_string(a) + ")"; });

  m.def("wedge", &wedge);
  m.def("pairing", &pairing);
  m.def("hodge_star", &hodge_star);
  m.def("interior_product", &interior_product, py::arg("v"), py::arg("form"));
  m.def("plucker", &plucker, py::arg("frame"), "Unit p-vector of the span of the frame columns.");

  py::class_<Calibration>(m, "Calibration")
      .def_readonly("name", &Calibration::name)
      .def_readonly("form", &Calibration::form)
      .def_readonly("certified_comass", &Calibration::certified_comass)
      .def_property_readonly("n", &Calibration::dim)
      .def_property_readonly("p", &Calibration::degree)
      .def("__repr__", [](const Calibration& c) { return "Calibration('" + c.name + "')"; });

  m.def("catalogue", &catalogue, py::arg("selector"), py::arg("certify") = true);
  m.def("catalogue_list", [] {
    py::list out;
    for (const auto& e : catalogue_list())
      out.append(py::dict(py::arg("name") = e.name, py::arg("n") = e.n, py::arg("p") = e.p, py::arg("terms") = e.terms));
    return out;
  });
  m.def("user_calibration", &user_calibration, py::arg("name"), py::arg("form"), py::arg("rescale") = false);

  m.def(
      "comass",
      [](const ExteriorElement& phi, int multistarts, std::uint64_t seed, int threads) {
        py::gil_scoped_release release;
        auto r = comass(phi, ComassOptions{.multistarts = multistarts, .seed = seed, .threads = threads});
        py::gil_scoped_acquire acquire;
        return to_py(io::to_json(r));
      },
      py::arg("form"), py::arg("multistarts") = 200, py::arg("seed") = 7, py::arg("threads") = 0);

  m.def(
      "sample_grassmannian",
      [](const Calibration& cal, int count, std::uint64_t seed, double tol, int threads) {
        return to_py(io::to_json(
            sample_grassmannian(cal, SampleOptions{.tol = tol, .count = count, .seed = seed, .threads = threads})));
      },
      py::arg("calibration"), py::arg("count") = 50, py::arg("seed") = 7, py::arg("tol") = 1e-6,
      py::arg("threads") = 0);

  m.def(
      "mass_norm",
      [](const ExteriorElement& xi, double tol) {
        MassOptions opts;
        opts.tol = tol;
        return to_py(io::to_json(mass_norm_estimate(xi, {}, opts)));
      },
      py::arg("pvector"), py::arg("tol") = 1e-6);

  m.def(
      "normality_check",
      [](const ExteriorElement& phi, int trials, std::uint64_t seed) {
        return to_py(io::to_json(normality_check(phi, trials, NormalityOptions{.seed = seed})));
      },
      py::arg("form"), py::arg("trials") = 50, py::arg("seed") = 7);

  m.def(
      "boundary_batch",
      [](const Calibration& cal, const std::vector<std::vector<double>>& sites, int count, int degree,
         std::uint64_t seed) {
        const auto model = FiniteDualityModel::build(cal, to_points(sites), DualityModelOptions{.seed = seed});
        const auto batch = random_boundary_batch(assemble_boundary_model(model, degree), count, seed);
        py::list instances;
        for (const auto& b : batch) instances.append(to_py(io::to_json(b.result)));
        return py::dict(py::arg("summary") = to_py(io::to_json(summarize(batch))), py::arg("instances") = instances);
      },
      py::arg("calibration"), py::arg("sites"), py::arg("count") = 100, py::arg("degree") = 2, py::arg("seed") = 7);

  m.def(
      "jensen",
      [](const Calibration& cal, const std::vector<std::vector<double>>& sites, const std::vector<int>& k_sites,
         int x_site, int degree, std::uint64_t seed) {
        const auto model = FiniteDualityModel::build(cal, to_points(sites), DualityModelOptions{.seed = seed});
        return to_py(io::to_json(jensen_alternative(model, k_sites, x_site, degree)));
      },
      py::arg("calibration"), py::arg("sites"), py::arg("K"), py::arg("x"), py::arg("degree") = 2,
      py::arg("seed") = 7);

  m.def("criterion_name", &criterion_name);
  m.attr("criterion_count") = kCriterionCount;
  m.def(
      "run_criterion",
      [](int id, std::uint64_t seed) {
        CriterionResult r;
        {
          py::gil_scoped_release release;
          r = run_criterion(id, AcceptanceOptions{.seed = seed});
        }
        py::dict metrics;
        for (const auto& [k, v] : r.metrics) metrics[py::str(k)] = v;
        return py::dict(py::arg("id") = r.id, py::arg("name") = r.name, py::arg("passed") = r.passed,
                        py::arg("detail") = r.detail, py::arg("metrics") = metrics);
      },
      py::arg("id"), py::arg("seed") = 7);
}
