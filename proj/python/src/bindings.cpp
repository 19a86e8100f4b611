#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rdagraph/errors.hpp"
#include "rdagraph/experiments.hpp"
#include "rdagraph/graph1d.hpp"
#include "rdagraph/rda2d.hpp"

namespace py = pybind11;
using namespace rdag;

namespace {

SpectralKernel kernel_from(const std::string& name, double r) {
  if (name == "gauss_pi") return SpectralKernel(GaussPiKernel{});
  if (name == "heat") return SpectralKernel(HeatKernel{r});
  if (name == "poisson") return SpectralKernel(PoissonKernel{r});
  if (name == "riesz") return SpectralKernel(RieszKernel{r});
  if (name == "bessel") return SpectralKernel(BesselKernel{r});
  throw std::invalid_argument("unknown kernel '" + name + "'");
}

ExperimentConfig config_from(const std::string& kind, const std::map<std::string, std::string>& overrides,
                             bool desk) {
  ExperimentConfig c = ExperimentConfig::defaults_for(parse_kind(kind));
  for (const auto& [k, v] : overrides) c.set(k, v);
  if (desk) {
    c.desk = true;
    c.apply_desk();
  }
  c.validate();
  return c;
}

py::list rows(const ErrorTable& t) {
  py::list out;
  for (const ErrorRow& r : t.rows) out.append(py::make_tuple(r.label, r.error, r.std_error));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Finite-difference and particle solvers for advection-dominated SPDEs and their graph limits.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<HamiltonianProfile>(m, "Profile")
      .def_static("exp_decay", [](double a) { return HamiltonianProfile(ZetaProfile::exp_decay(a)); },
                  py::arg("alpha0") = 0.5)
      .def_static("power_tail",
                  [](double a, double b) { return HamiltonianProfile(ZetaProfile::power_tail(a, b)); },
                  py::arg("alpha0") = 0.5, py::arg("beta0") = 1.0)
      .def("zeta", [](const HamiltonianProfile& p, double z) { return p.zeta().value(z); })
      .def_property_readonly("r0", [](const HamiltonianProfile& p) { return p.zeta().r0(); })
      .def_property_readonly("r0_tilde", [](const HamiltonianProfile& p) { return p.zeta().r0_tilde(); });

  m.def("H", [](const HamiltonianProfile& p, double x1, double x2) { return eval_H(p, {x1, x2}); });
  m.def("invert_F", &invert_F, py::arg("profile"), py::arg("z"));
  m.def("period_T", &period_T);
  m.def("area_A", &area_A);
  m.def("alpha", &alpha);
  m.def("beta", &beta);
  m.def("level_coefficients", [](const HamiltonianProfile& p, double z) {
    const LevelCoefficients c = level_coefficients(p, z);
    py::dict d;
    d["F"] = c.F;
    d["T"] = c.T;
    d["A"] = c.A;
    d["A_prime"] = c.A_prime;
    d["alpha"] = c.alpha;
    d["beta"] = c.beta;
    return d;
  });
  m.def(
      "validate_profile",
      [](const HamiltonianProfile& p, double z_max, int n) {
        const ProfileReport r = validate_profile(p, z_max, n);
        return py::make_tuple(r.pass, r.first_violation, r.reason);
      },
      py::arg("profile"), py::arg("z_max") = 20.0, py::arg("samples") = 200);

  m.def(
      "wedge",
      [](const HamiltonianProfile& p, const std::function<double(double, double)>& phi, double z, int n_theta) {
        return wedge(p, [&](Point x) { return phi(x[0], x[1]); }, z, AngularQuadrature(n_theta));
      },
      py::arg("profile"), py::arg("phi"), py::arg("z"), py::arg("n_theta") = 256);

  m.def(
      "kernel", [](const std::string& name, double rho, double r) { return kernel_from(name, r).radial(rho); },
      py::arg("name"), py::arg("rho"), py::arg("r") = 1.0);
  m.def(
      "covariance_matrix_2d",
      [](const std::string& name, double r, double L, int M) {
        return covariance_matrix_2d(kernel_from(name, r), Grid2D(L, M));
      },
      py::arg("kernel"), py::arg("r"), py::arg("L"), py::arg("M"));
  m.def(
      "graph_kernel_bar",
      [](const std::string& name, double r, const HamiltonianProfile& p, double z, double y) {
        return graph_kernel_bar(kernel_from(name, r), p, z, y);
      },
      py::arg("kernel"), py::arg("r"), py::arg("profile"), py::arg("z"), py::arg("y"));

  m.def("matrix_exp", &matrix_exp, py::arg("A"), py::arg("t") = 1.0);
  m.def("psd_sqrt", &psd_sqrt, py::arg("S"), py::arg("clip_tol") = 1e-12);
  m.def("kron", &kron);

  m.def(
      "generator_2d",
      [](const HamiltonianProfile& p, double L, int M, double eps, double nu) {
        return assemble_generator(Grid2D(L, M), p, eps, nu);
      },
      py::arg("profile"), py::arg("L"), py::arg("M"), py::arg("eps"), py::arg("nu") = 0.5);
  m.def(
      "generator_graph",
      [](const HamiltonianProfile& p, double L, int M) { return assemble_generator_graph(GraphGrid(L, M), p); },
      py::arg("profile"), py::arg("L"), py::arg("M"));

  m.def(
      "increments",
      [](std::uint64_t seed, double tau_min, std::size_t dim, long horizon, std::uint64_t path, int level) {
        return NoiseStream(seed, tau_min, dim, horizon, path).all_increments(level);
      },
      py::arg("seed"), py::arg("tau_min"), py::arg("dim"), py::arg("horizon"), py::arg("path") = 0,
      py::arg("level") = 0);

  m.def(
      "run",
      [](const std::string& kind, const std::map<std::string, std::string>& overrides, bool desk) -> py::object {
        const ExperimentConfig c = config_from(kind, overrides, desk);
        if (c.kind == ExperimentKind::KernelTable || c.kind == ExperimentKind::ProfileValidate) {
          throw ConfigError("run: use the CLI for " + to_string(c.kind));
        }
        py::gil_scoped_release release;
        switch (c.kind) {
          case ExperimentKind::Convergence2d: {
            ErrorTable t = run_convergence_2d(c);
            py::gil_scoped_acquire acquire;
            return rows(t);
          }
          case ExperimentKind::ConvergenceGraph: {
            ErrorTable t = run_convergence_graph(c);
            py::gil_scoped_acquire acquire;
            return rows(t);
          }
          case ExperimentKind::Asymptotics: {
            ErrorTable t = run_asymptotics(c);
            py::gil_scoped_acquire acquire;
            return rows(t);
          }
          case ExperimentKind::ApCompare: {
            ApCompareResult r = run_ap_compare(c);
            py::gil_scoped_acquire acquire;
            py::dict d;
            d["exp-euler"] = rows(r.exponential_euler);
            d["euler-maruyama"] = rows(r.euler_maruyama);
            return d;
          }
          default:
            break;
        }
        return py::none();
      },
      py::arg("kind"), py::arg("overrides") = std::map<std::string, std::string>{}, py::arg("desk") = false,
      "Runs an experiment and returns (label, error, std_error) rows.");

  m.def(
      "fit_slope",
      [](const std::vector<std::tuple<double, double, double>>& r) {
        ErrorTable t;
        for (const auto& [a, b, c] : r) t.rows.push_back({a, b, c});
        const SlopeFit f = fit_loglog_slope(t);
        return py::make_tuple(f.slope, f.half_width);
      },
      py::arg("rows"));
  m.def("spearman", &spearman);
}
