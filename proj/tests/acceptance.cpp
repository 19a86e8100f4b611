// Acceptance run: one PASS/FAIL line per criterion. `acceptance N` runs criterion N only.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rdagraph/experiments.hpp"
#include "rdagraph/graph1d.hpp"
#include "rdagraph/rda2d.hpp"

using namespace rdag;
using std::numbers::pi;

namespace {

// Pinned tolerances.
constexpr double kSlopeLo = 0.35, kSlopeHi = 0.65;
constexpr double kApFloorFactor = 10.0;
constexpr double kSemigroupRel = 1e-9;
constexpr double kIdentityRel = 1e-10;
constexpr double kClosedFormF = 1e-10;
constexpr double kGaussPiHeat = 1e-15;
constexpr double kWedgeVee = 1e-13;
constexpr double kContractionSlack = 1e-3;
constexpr double kRadialEquality = 1e-12;
constexpr double kCommutation = 1e-3;
constexpr double kCovarianceSigmas = 5.0;
constexpr int kCovarianceSamples = 100000;
constexpr double kPsdSqrtRel = 1e-8;

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string list(const ErrorTable& t) {
  std::string s;
  for (const ErrorRow& r : t.rows) s += (s.empty() ? "" : " ") + fmt(r.error);
  return s;
}

bool strictly_decreasing(const ErrorTable& t) {
  for (std::size_t i = 1; i < t.rows.size(); ++i)
    if (!(t.rows[i].error < t.rows[i - 1].error)) return false;
  return true;
}

void check_convergence(Outcome& out, const ErrorTable& t, const std::string& tag) {
  const SlopeFit fit = fit_loglog_slope(t);
  const bool dec = strictly_decreasing(t);
  out.require(fit.slope >= kSlopeLo && fit.slope <= kSlopeHi, tag + " slope out of range");
  out.require(dec, tag + " errors not strictly decreasing");
  out.detail += (out.detail.empty() ? "" : "; ") + tag + " slope " + fmt(fit.slope) + " +- " + fmt(fit.half_width) +
                " errors [" + list(t) + "]";
}

Outcome criterion1() {
  ExperimentConfig c = ExperimentConfig::defaults_for(ExperimentKind::Convergence2d);
  c.desk = true;
  c.apply_desk();
  c.validate();
  Outcome out;
  check_convergence(out, run_convergence_2d(c), "2d P=" + std::to_string(c.P));
  return out;
}

Outcome criterion2() {
  Outcome out;
  for (const char* family : {"exp_decay", "power_tail"}) {
    ExperimentConfig c = ExperimentConfig::defaults_for(ExperimentKind::ConvergenceGraph);
    c.set("hamiltonian.family", family);
    c.desk = true;
    c.apply_desk();
    c.validate();
    check_convergence(out, run_convergence_graph(c), std::string(family) + " P=" + std::to_string(c.P));
  }
  return out;
}

Outcome criterion3() {
  ExperimentConfig c = ExperimentConfig::defaults_for(ExperimentKind::Asymptotics);
  c.desk = true;
  c.apply_desk();
  c.eps_list = {0.02, 0.06, 0.10, 0.14, 0.20};
  c.validate();
  const ErrorTable t = run_asymptotics(c);
  std::vector<double> eps, err;
  for (const ErrorRow& r : t.rows) {
    eps.push_back(r.label);
    err.push_back(r.error);
  }
  const double rho = spearman(eps, err);
  Outcome out;
  out.require(err.front() < err.back(), "error(0.02) >= error(0.20)");
  out.require(rho > 0.0, "Spearman <= 0");
  out.detail += (out.detail.empty() ? "" : "; ") + std::string("P=") + std::to_string(c.P) +
                " Q=" + std::to_string(c.Q) + " errors [" + list(t) + "] std_error " + fmt(t.rows.front().std_error) +
                " Spearman " + fmt(rho);
  return out;
}

Outcome criterion4() {
  ExperimentConfig c = ExperimentConfig::defaults_for(ExperimentKind::ApCompare);
  c.validate();
  const ApCompareResult r = run_ap_compare(c);
  const auto& ee = r.exponential_euler.rows;
  const auto& em = r.euler_maruyama.rows;
  double em_min = em.front().error;
  for (const ErrorRow& row : em) em_min = std::min(em_min, row.error);
  // rows are ordered by increasing eps
  bool monotone = true;
  for (std::size_t i = 1; i < ee.size(); ++i) monotone = monotone && ee[i - 1].error < ee[i].error;
  Outcome out;
  out.require(em_min >= kApFloorFactor * ee.front().error, "Euler-Maruyama floor below 10x the exponential value");
  out.require(monotone, "exponential discrepancy not decreasing as eps decreases");
  out.detail += (out.detail.empty() ? "" : "; ") + std::string("tau=") + fmt(c.tau_base) + " exp-euler [" +
                list(r.exponential_euler) + "] euler-maruyama [" + list(r.euler_maruyama) + "] ratio " +
                fmt(em_min / ee.front().error);
  return out;
}

Outcome criterion5() {
  Outcome out;
  const double tau = std::ldexp(1.0, -11), T = 0.125;
  const long N = std::lround(T / tau);
  {
    Rda2dOptions o;
    o.grid = Grid2D(1.0, 5);
    o.tau = tau;
    const Rda2dSystem s(o);
    const Vector u0 = sample_on_grid(o.grid, [&](Point x) { return std::exp(-eval_H(o.profile, x)); });
    const NoiseStream stream(1, tau, o.grid.n_interior(), N, 0);
    const Vector got = solve_path(s, u0, stream, 0, N).final_state;
    const Vector ref = matrix_exp(s.generator(), T) * u0;
    const double rel = (got - ref).norm() / ref.norm();
    out.require(rel <= kSemigroupRel, "2d mismatch");
    out.detail += "2d rel " + fmt(rel);
  }
  {
    Graph1dOptions o;
    o.grid = GraphGrid(10.0, 100);
    o.tau = tau;
    const Graph1dSystem s(o);
    const Vector u0 = sample_on_graph(o.grid, [](double z) { return std::exp(-z); });
    const NoiseStream stream(1, tau, o.grid.size(), N, 0);
    const Vector got = solve_path_graph(s, u0, stream, 0, N).final_state;
    const Vector ref = matrix_exp(s.generator(), T) * u0;
    const double rel = (got - ref).norm() / ref.norm();
    out.require(rel <= kSemigroupRel, "graph mismatch");
    out.detail += "; graph rel " + fmt(rel);
  }
  out.detail += "; " + std::to_string(N) + " steps";
  return out;
}

Outcome criterion6() {
  Outcome out;
  const HamiltonianProfile presets[] = {HamiltonianProfile(ZetaProfile::exp_decay(0.5)),
                                        HamiltonianProfile(ZetaProfile::power_tail(0.5, 1.0))};
  const std::function<double(double)> closed[] = {oracle::F_exp_decay_half, oracle::F_power_tail_half_one};
  double worst_identity = 0.0, worst_F = 0.0;
  int bound_violations = 0;
  for (int p = 0; p < 2; ++p) {
    const HamiltonianProfile& prof = presets[p];
    const double r0 = prof.zeta().r0(), rt = prof.zeta().r0_tilde();
    for (int i = 0; i < 200; ++i) {
      const double z = 20.0 * i / 199.0;
      const LevelCoefficients c = level_coefficients(prof, z);
      const double slack = 1e-14;
      bound_violations += !(c.T >= pi / (1.0 + rt) * (1 - slack) && c.T <= pi / (1.0 - r0) * (1 + slack));
      bound_violations += !(c.A >= 2 * pi * (1 - r0) / (1 + rt) * z * (1 - slack) &&
                            c.A <= 2 * pi * (1 + rt) / (1 - r0) * z * (1 + slack));
      bound_violations += !(c.F >= z / (1 + rt) * (1 - slack) && c.F <= z / (1 - r0) * (1 + slack));
      if (z > 0.0) {
        worst_identity = std::max(worst_identity, std::abs(c.alpha * c.T - c.A) / std::abs(c.A));
      }
      worst_identity = std::max(worst_identity, std::abs(c.beta * c.T - c.A_prime) / std::abs(c.A_prime));
      worst_F = std::max(worst_F, std::abs(c.F - closed[p](z)) / std::max(1.0, z));
    }
  }
  out.require(bound_violations == 0, std::to_string(bound_violations) + " bound violations");
  out.require(worst_identity <= kIdentityRel, "alpha T = A or beta T = A' off");
  out.require(worst_F <= kClosedFormF, "F closed form off");

  double worst_kernel = 0.0, worst_gp = 0.0;
  for (double r : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    worst_kernel = std::max(worst_kernel, std::abs(SpectralKernel(HeatKernel{r}).radial(0.0) - 1.0 / (2.0 * pi * r)));
    worst_kernel = std::max(worst_kernel, std::abs(SpectralKernel(PoissonKernel{r}).radial(0.0) - 1.0 / (pi * r)));
  }
  const SpectralKernel gp{GaussPiKernel{}}, heat{HeatKernel{0.5}};
  for (int i = 0; i <= 400; ++i) {
    const double rho = 5.0 * i / 400.0;
    worst_gp = std::max(worst_gp, std::abs(gp.radial(rho) - heat.radial(rho)));
  }
  out.require(worst_kernel == 0.0, "kernel origin values not exact");
  out.require(worst_gp <= kGaussPiHeat, "GaussPi differs from Heat(1/2)");
  out.detail += (out.detail.empty() ? "" : "; ") + std::string("identity rel ") + fmt(worst_identity) + ", F err " +
                fmt(worst_F) + ", kernel origin err " + fmt(worst_kernel) + ", GaussPi-Heat " + fmt(worst_gp);
  return out;
}

Outcome criterion7() {
  Outcome out;
  const HamiltonianProfile prof(ZetaProfile::exp_decay(0.5));
  const WeightProfile gamma{ExpSqrtWeight{}};

  // wedge of vee on radial functions
  double worst_wv = 0.0;
  const std::vector<LevelFunction> radial_f = {[](double z) { return std::exp(-z); },
                                               [](double z) { return std::sin(z) + z * z; },
                                               [](double z) { return 1.0 / (1.0 + z); }};
  for (const auto& f : radial_f) {
    for (int i = 0; i <= 100; ++i) {
      const double z = 10.0 * i / 100.0;
      const double w = wedge(prof, [&](Point x) { return vee(prof, f, x); }, z);
      worst_wv = std::max(worst_wv, std::abs(w - f(z)) / std::max(1.0, std::abs(f(z))));
    }
  }
  out.require(worst_wv <= kWedgeVee, "wedge of vee off");

  // contraction on a 10-function family
  const auto r2 = [](Point x) { return x[0] * x[0] + x[1] * x[1]; };
  const std::vector<PlaneFunction> family = {
      [&](Point x) { return std::exp(-r2(x)); },
      [&](Point x) { return 1.0 / (1.0 + r2(x)); },
      [&](Point x) { return std::exp(-r2(x)) * (1.0 + 0.5 * x[0]); },
      [&](Point x) { return std::cos(x[0]) * std::exp(-r2(x) / 2.0); },
      [&](Point x) { return x[0] * x[1] * std::exp(-r2(x)); },
      [&](Point x) { return std::sin(x[0] + x[1]) / (1.0 + r2(x)); },
      [&](Point x) { return std::exp(-(x[0] - 1.0) * (x[0] - 1.0) - x[1] * x[1]); },
      [&](Point x) { return (x[0] * x[0] - x[1] * x[1]) * std::exp(-r2(x) / 3.0); },
      [&](Point x) { return std::tanh(x[0]) * std::exp(-r2(x) / 4.0); },
      [&](Point x) { return std::exp(-r2(x)) * (2.0 + std::cos(3.0 * std::atan2(x[1], x[0]))); },
  };
  const Grid2D plane(6.0, 600);
  const GraphGrid graph(20.0, 80000);  // level circles stay inside the square
  double worst_ratio = 0.0, worst_radial = 0.0;
  for (std::size_t f = 0; f < family.size(); ++f) {
    const PlaneFunction& phi = family[f];
    std::vector<double> v(plane.n_interior()), w(graph.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = phi(plane.node(k));
    for (int i = 0; i < graph.M; ++i) w[static_cast<std::size_t>(i)] = wedge(prof, phi, graph.node(i));
    const double lhs = norm_sq_L2Tgamma_1d(w, graph, gamma, prof);
    const double rhs = norm_sq_Hgamma_2d(v, plane, gamma, prof);
    worst_ratio = std::max(worst_ratio, lhs / rhs);

    // same quadrature measure on both sides: polar nodes, T dz = 2 pi r dr
    const int nr = 4000, nt = 256;
    const double R = 4.0, dr = R / nr;
    double plane_sum = 0.0, graph_sum = 0.0;
    for (int i = 0; i < nr; ++i) {
      const double r = (i + 0.5) * dr;
      const double z = eval_H(prof, {r, 0.0});
      double sq = 0.0;
      for (int j = 0; j < nt; ++j) {
        const double t = 2.0 * pi * j / nt;
        const double val = phi({r * std::cos(t), r * std::sin(t)});
        sq += val * val;
      }
      plane_sum += sq / nt * gamma(z) * 2.0 * pi * r * dr;
      const double wz = wedge(prof, phi, z);
      graph_sum += wz * wz * gamma(z) * 2.0 * pi * r * dr;
    }
    if (f < 2) worst_radial = std::max(worst_radial, std::abs(graph_sum - plane_sum) / plane_sum);
    out.require(graph_sum <= plane_sum * (1.0 + kRadialEquality), "polar contraction fails for f" + std::to_string(f));
  }
  out.require(worst_ratio <= 1.0 + kContractionSlack, "grid contraction ratio above slack");
  out.require(worst_radial <= kRadialEquality, "radial equality off");

  // radial commutation
  double worst_comm = 0.0;
  for (const auto& p : {prof, HamiltonianProfile(ZetaProfile::power_tail(0.5, 1.0))}) {
    const auto g = [&](double z) { return std::exp(-invert_F(p, z)); };
    const PlaneFunction half_lap = [&](Point x) { return 2.0 * (r2(x) - 1.0) * std::exp(-r2(x)); };
    for (int i = 0; i <= 49; ++i) {
      const double z = 0.1 + 4.9 * i / 49.0;
      const double h = 1e-3;
      const double lhs = wedge(p, half_lap, z);
      const double rhs = alpha(p, z) * oracle::second_diff(g, z, h) + beta(p, z) * oracle::central_diff(g, z, h);
      worst_comm = std::max(worst_comm, std::abs(lhs - rhs));
    }
  }
  out.require(worst_comm <= kCommutation, "radial commutation residual too large");
  out.detail += (out.detail.empty() ? "" : "; ") + std::string("wedge-vee ") + fmt(worst_wv) + ", max norm ratio " +
                fmt(worst_ratio) + ", radial equality " + fmt(worst_radial) + ", commutation " + fmt(worst_comm);
  return out;
}

Outcome criterion8() {
  Outcome out;
  // dyadic coupling
  const NoiseStream s(2024, std::ldexp(1.0, -12), 81, 512, 3);
  bool exact = true;
  for (int level = 1; level <= 9; ++level) {
    const DenseMatrix coarse = s.all_increments(level), fine = s.all_increments(level - 1);
    for (Eigen::Index n = 0; n < coarse.cols(); ++n)
      exact = exact && (coarse.col(n).array() == (fine.col(2 * n) + fine.col(2 * n + 1)).array()).all();
  }
  out.require(exact, "coarse increments differ from sums of fine ones");

  // covariance of field increments
  const Grid2D g(1.0, 2);
  const DenseMatrix F = covariance_matrix_2d(SpectralKernel(GaussPiKernel{}), g);
  const DenseMatrix root = psd_sqrt(F);
  const double tau = std::ldexp(1.0, -10);
  const NoiseStream field(77, tau, 9, kCovarianceSamples, 0);
  const DenseMatrix inc = root * field.all_increments(0);
  double worst_z = 0.0;
  for (int k = 0; k < 9; ++k) {
    for (int l = k; l < 9; ++l) {
      std::vector<double> prod(kCovarianceSamples);
      for (int n = 0; n < kCovarianceSamples; ++n) prod[static_cast<std::size_t>(n)] = inc(k, n) * inc(l, n);
      const auto m = oracle::mean_se(prod);
      worst_z = std::max(worst_z, std::abs(m.mean - tau * F(k, l)) / m.se);
    }
  }
  out.require(worst_z <= kCovarianceSigmas, "field increment covariance off");

  // psd_sqrt on well-conditioned inputs
  double worst_rec = 0.0;
  const std::vector<DenseMatrix> inputs = {
      covariance_matrix_2d(SpectralKernel(PoissonKernel{1.0}), Grid2D(1.0, 3)),
      covariance_matrix_2d(SpectralKernel(HeatKernel{0.05}), Grid2D(1.0, 3)),
      DenseMatrix(Vector::LinSpaced(6, 1.0, 6.0).asDiagonal()),
  };
  for (const DenseMatrix& S : inputs) {
    const DenseMatrix R = psd_sqrt(S);
    worst_rec = std::max(worst_rec, (R * R.transpose() - S).norm() / S.norm());
  }
  out.require(worst_rec <= kPsdSqrtRel, "psd_sqrt reconstruction off");
  out.detail += (out.detail.empty() ? "" : "; ") + std::string("coupling ") + (exact ? "bit-exact" : "broken") +
                ", covariance max |z| " + fmt(worst_z) + " at " + std::to_string(kCovarianceSamples) +
                " samples, psd_sqrt rel " + fmt(worst_rec);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                          criterion5, criterion6, criterion7, criterion8};
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (int i = 1; i <= 8; ++i) which.push_back(i);
  bool all = true;
  for (int k : which) {
    if (k < 1 || k > 8) {
      std::fprintf(stderr, "unknown criterion %d\n", k);
      return 1;
    }
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(k - 1)]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %d: %s (%s)\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
