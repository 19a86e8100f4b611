#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "rdagraph/errors.hpp"
#include "rdagraph/rda2d.hpp"

using namespace rdag;
using std::numbers::pi;

namespace {

HamiltonianProfile exp_half() { return HamiltonianProfile(ZetaProfile::exp_decay(0.5)); }

// Largest |discrete - exact| of the advection on phi = x1 exp(-|x|^2) over nodes with |x|_inf <= 1.
double advection_residual(int M) {
  const Grid2D g(4.0, M);
  const auto p = exp_half();
  const DenseMatrix adv = assemble_advection(g, p) / (2.0 * g.h());
  const auto phi = [](Point x) { return x[0] * std::exp(-(x[0] * x[0] + x[1] * x[1])); };
  const Vector v = sample_on_grid(g, phi);
  const Vector d = adv * v;
  double worst = 0.0;
  for (std::size_t k = 0; k < g.n_interior(); ++k) {
    const Point x = g.node(k);
    if (std::max(std::abs(x[0]), std::abs(x[1])) > 1.0) continue;
    const double e = std::exp(-(x[0] * x[0] + x[1] * x[1]));
    const double d1 = (1.0 - 2.0 * x[0] * x[0]) * e, d2 = -2.0 * x[0] * x[1] * e;
    const auto gp = grad_perp_H(p, x);
    worst = std::max(worst, std::abs(d(static_cast<Eigen::Index>(k)) - (gp[0] * d1 + gp[1] * d2)));
  }
  return worst;
}

}  // namespace

TEST_SUITE("rda2d") {

TEST_CASE("matrix structure") {
  for (int M : {1, 2, 4}) {
    const DenseMatrix A = assemble_laplacian(M);
    CHECK(A.rows() == (2 * M - 1) * (2 * M - 1));
    CHECK((A - A.transpose()).norm() == 0.0);
    const DenseMatrix R = assemble_gradient_1d(M);
    CHECK((R + R.transpose()).norm() == 0.0);
  }
  const DenseMatrix A2 = assemble_laplacian(2);
  CHECK(A2(4, 4) == -4.0);
  CHECK(A2(4, 3) == 1.0);
  CHECK(A2(4, 1) == 1.0);
  CHECK(A2(0, 4) == 0.0);
  const DenseMatrix R2 = assemble_gradient_1d(2);
  CHECK(R2(0, 1) == 1.0);
  CHECK(R2(1, 0) == -1.0);
  CHECK(R2(0, 0) == 0.0);
}

TEST_CASE("Laplacian eigenfunction") {
  const int M = 6;
  const Grid2D g(1.5, M);
  const auto mode = [&](Point x) { return std::sin(pi * (x[0] + g.L) / (2 * g.L)) * std::sin(pi * (x[1] + g.L) / (2 * g.L)); };
  const Vector v = sample_on_grid(g, mode);
  const double lambda = -8.0 * std::pow(std::sin(pi / (4.0 * M)), 2);
  CHECK((assemble_laplacian(M) * v - lambda * v).norm() <= 1e-12 * v.norm());
}

TEST_CASE("advection annihilates constants away from the boundary") {
  const Grid2D g(2.0, 5);
  const DenseMatrix adv = assemble_advection(g, exp_half());
  const Vector one = Vector::Ones(static_cast<Eigen::Index>(g.n_interior()));
  const Vector d = adv * one;
  for (int j = 2 - g.M; j <= g.M - 2; ++j) {
    for (int i = 2 - g.M; i <= g.M - 2; ++i) CHECK(std::abs(d(index_k(i, j, g.M) - 1)) <= 1e-14);
  }
}

TEST_CASE("advection is second order") {
  const double coarse = advection_residual(16), fine = advection_residual(32);
  CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("generator is affine in 1/eps") {
  const Grid2D g(1.0, 3);
  const auto p = exp_half();
  const DenseMatrix diff = assemble_laplacian(3) * (0.5 / (g.h() * g.h()));
  const DenseMatrix L1 = assemble_generator(g, p, 1.0) - diff;
  const DenseMatrix Lq = assemble_generator(g, p, 0.25) - diff;
  CHECK((Lq - 4.0 * L1).norm() <= 1e-13 * Lq.norm());
  CHECK_THROWS(assemble_generator(g, p, 0.0));
}

TEST_CASE("cached propagator is a semigroup") {
  Rda2dOptions o;
  o.grid = Grid2D(1.0, 5);
  o.tau = 1.0 / 128.0;
  const Rda2dSystem s(o);
  const DenseMatrix two = matrix_exp(s.generator(), 2.0 * o.tau);
  CHECK((s.propagator() * s.propagator() - two).norm() <= 1e-9 * two.norm());
  CHECK(s.covariance().rows() == 81);
}

TEST_CASE("Euler-Maruyama local error is second order") {
  Rda2dOptions o;
  o.grid = Grid2D(1.0, 4);
  const auto p = o.profile;
  const Vector u = sample_on_grid(o.grid, [&](Point x) { return std::exp(-eval_H(p, x)); });
  double err[2];
  for (int t = 0; t < 2; ++t) {
    o.tau = t == 0 ? 1e-3 : 5e-4;
    const Rda2dSystem s(o);
    const Vector zero = Vector::Zero(u.size());
    err[t] = (step_euler_maruyama(s, u, zero) - step_exponential_euler(s, u, zero)).norm();
  }
  CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("frozen update uses g, b and the noise root") {
  Rda2dOptions o;
  o.grid = Grid2D(1.0, 2);
  o.diffusion = [](double x) { return 2.0 * x; };
  o.reaction = [](double x) { return x + 1.0; };
  o.tau = 0.1;
  const Rda2dSystem s(o);
  const Vector u = Vector::LinSpaced(9, -1.0, 1.0);
  Vector dB = Vector::Zero(9);
  dB(3) = 0.5;
  const Vector expected = u + 0.1 * (u.array() + 1.0).matrix() +
                          (2.0 * u).asDiagonal() * (s.sde().noise_root() * dB);
  CHECK((s.sde().frozen_update(u, dB) - expected).norm() <= 1e-15);
  // Euler-Maruyama drops the reaction
  const Vector em = step_euler_maruyama(s, u, dB);
  const Vector em_expected = u + 0.1 * (s.generator() * u) + (2.0 * u).asDiagonal() * (s.sde().noise_root() * dB);
  CHECK((em - em_expected).norm() <= 1e-14);
}

TEST_CASE("one-step covariance of the additive noise") {
  Rda2dOptions o;
  o.grid = Grid2D(1.0, 1);  // one node, F = 1/pi
  o.diffusion = [](double) { return 1.0; };
  o.tau = 0.01;
  const Rda2dSystem s(o);
  const int n = 50000;
  const NoiseStream stream(5, o.tau, 1, n, 0);
  const DenseMatrix inc = stream.all_increments(0);
  std::vector<double> sq(n);
  for (int i = 0; i < n; ++i) {
    const Vector dB = inc.col(i);
    const double v = s.sde().frozen_update(Vector::Zero(1), dB)(0);
    sq[static_cast<std::size_t>(i)] = v * v;
  }
  const auto m = oracle::mean_se(sq);
  CHECK(std::abs(m.mean - o.tau / pi) <= 5.0 * m.se);
}

TEST_CASE("solve_path checks and failure reporting") {
  Rda2dOptions o;
  o.grid = Grid2D(1.0, 2);
  o.tau = 1.0 / 64.0;
  const Rda2dSystem s(o);
  const NoiseStream stream(1, 1.0 / 128.0, 9, 32, 0);
  const Vector u0 = Vector::Ones(9);
  CHECK_THROWS_AS(solve_path(s, u0, stream, 0, 4), std::invalid_argument);
  CHECK_THROWS_AS(solve_path(s, u0, stream, 1, 17), std::out_of_range);
  const PathResult r = solve_path(s, u0, stream, 1, 16, Scheme::ExponentialEuler, true);
  CHECK(r.trajectory.size() == 17);
  CHECK((r.trajectory.back() - r.final_state).norm() == 0.0);

  // u doubles every step from 5e307 and overflows on the second
  const LinearSdeSystem blow(DenseMatrix::Identity(1, 1), 1.0, DenseMatrix::Zero(1, 1), {}, {});
  const NoiseStream one(1, 1.0, 1, 8, 0);
  try {
    solve_path(blow, Vector::Constant(1, 5e307), one, 0, 8, Scheme::EulerMaruyama);
    FAIL("expected a non-finite state");
  } catch (const NonFiniteState& e) {
    CHECK(e.step() == 2);
  }
}

}  // TEST_SUITE
