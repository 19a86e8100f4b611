#include <doctest.h>

#include <cmath>

#include "rdagraph/graph1d.hpp"

using namespace rdag;

namespace {

HamiltonianProfile exp_half() { return HamiltonianProfile(ZetaProfile::exp_decay(0.5)); }

// Largest interior-row residual of the generator on f(z) = exp(-z) sin(z) over z in [0.5, 4].
double interior_residual(int M) {
  const GraphGrid g(8.0, M);
  const auto p = exp_half();
  const DenseMatrix L = assemble_generator_graph(g, p);
  const auto f = [](double z) { return std::exp(-z) * std::sin(z); };
  const Vector d = L * sample_on_graph(g, f);
  double worst = 0.0;
  for (int i = 1; i < M - 1; ++i) {
    const double z = g.node(i);
    if (z < 0.5 || z > 4.0) continue;
    const double f1 = std::exp(-z) * (std::cos(z) - std::sin(z));
    const double f2 = -2.0 * std::exp(-z) * std::cos(z);
    worst = std::max(worst, std::abs(d(i) - (alpha(p, z) * f2 + beta(p, z) * f1)));
  }
  return worst;
}

}  // namespace

TEST_SUITE("graph1d") {

TEST_CASE("generator rows") {
  const GraphGrid g(5.0, 10);
  const DenseMatrix L = assemble_generator_graph(g, exp_half());
  // tridiagonal
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      if (std::abs(i - j) > 1) CHECK(L(i, j) == 0.0);
  // vertex row: drift only, beta(0) = 3
  CHECK(L(0, 0) == doctest::Approx(-3.0 / g.h()).epsilon(1e-14));
  CHECK(L(0, 1) == doctest::Approx(3.0 / g.h()).epsilon(1e-14));
  // constants are annihilated except where the Dirichlet end is seen
  const Vector d = L * Vector::Ones(10);
  for (int i = 0; i < 9; ++i) CHECK(std::abs(d(i)) <= 1e-12 * L.row(i).norm());
  CHECK(d(9) < 0.0);
  CHECK_THROWS(assemble_generator_graph(GraphGrid(1.0, 1), exp_half()));
}

TEST_CASE("interior rows are second order") {
  CHECK(interior_residual(80) / interior_residual(160) == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("interpolation") {
  const GraphGrid g(4.0, 4);
  Vector v(4);
  v << 1.0, 3.0, -1.0, 2.0;
  CHECK(interpolate_graph(g, v, 0.0) == 1.0);
  CHECK(interpolate_graph(g, v, 1.0) == 3.0);
  CHECK(interpolate_graph(g, v, 0.5) == 2.0);
  CHECK(interpolate_graph(g, v, 3.5) == 1.0);
  CHECK(interpolate_graph(g, v, 4.0) == 0.0);
  CHECK(interpolate_graph(g, v, 9.0) == 0.0);
  CHECK_THROWS(interpolate_graph(g, v, -0.1));
  CHECK_THROWS(interpolate_graph(g, Vector::Ones(3), 1.0));
}

TEST_CASE("system caches") {
  Graph1dOptions o;
  o.grid = GraphGrid(10.0, 50);
  o.tau = 1.0 / 64.0;
  const Graph1dSystem s(o);
  const DenseMatrix two = matrix_exp(s.generator(), 2.0 * o.tau);
  CHECK((s.propagator() * s.propagator() - two).norm() <= 1e-9 * two.norm());
  const DenseMatrix& R = s.sde().noise_root();
  CHECK((R * R.transpose() - s.covariance()).norm() <= 1e-8 * s.covariance().norm());
}

TEST_CASE("graph path matches manual stepping") {
  Graph1dOptions o;
  o.grid = GraphGrid(10.0, 20);
  o.tau = 1.0 / 32.0;
  o.diffusion = [](double x) { return std::sin(x); };
  const Graph1dSystem s(o);
  const NoiseStream stream(3, 1.0 / 64.0, 20, 16, 2);
  const Vector u0 = sample_on_graph(o.grid, [](double z) { return std::exp(-z); });
  const PathResult r = solve_path_graph(s, u0, stream, 1, 8);
  Vector u = u0;
  for (long n = 0; n < 8; ++n) u = step_exponential_euler_graph(s, u, stream.sample_increments(1, n));
  CHECK((u - r.final_state).norm() == 0.0);
}

}  // TEST_SUITE
