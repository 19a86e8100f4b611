#include "rdagraph/rda2d.hpp"

#include <stdexcept>

namespace rdag {

namespace {

DenseMatrix tridiagonal(int n, double below, double diag, double above) {
  DenseMatrix T = DenseMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    T(i, i) = diag;
    if (i > 0) T(i, i - 1) = below;
    if (i + 1 < n) T(i, i + 1) = above;
  }
  return T;
}

DenseMatrix noise_root_for(const Rda2dOptions& o, const DenseMatrix& covariance) {
  return psd_sqrt(covariance, o.clip_tol);
}

}  // namespace

DenseMatrix assemble_laplacian(int M) {
  if (M < 1) throw std::invalid_argument("assemble_laplacian: M must be >= 1");
  const int s = 2 * M - 1;
  const DenseMatrix D = tridiagonal(s, 1.0, -2.0, 1.0);
  const DenseMatrix I = DenseMatrix::Identity(s, s);
  return kron(I, D) + kron(D, I);
}

DenseMatrix assemble_gradient_1d(int M) {
  if (M < 1) throw std::invalid_argument("assemble_gradient_1d: M must be >= 1");
  return tridiagonal(2 * M - 1, -1.0, 0.0, 1.0);
}

DenseMatrix assemble_advection(const Grid2D& grid, const HamiltonianProfile& profile) {
  const int s = grid.side();
  const DenseMatrix G = assemble_gradient_1d(grid.M);
  const DenseMatrix I = DenseMatrix::Identity(s, s);
  const DenseMatrix R1 = kron(I, G);
  const DenseMatrix R2 = kron(G, I);
  const auto n = static_cast<Eigen::Index>(grid.n_interior());
  Vector h1(n), h2(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Point g = grad_H(profile, grid.node(static_cast<std::size_t>(k)));
    h1(k) = g[0];
    h2(k) = g[1];
  }
  return -(h2.asDiagonal() * R1) + h1.asDiagonal() * R2;
}

DenseMatrix assemble_generator(const Grid2D& grid, const HamiltonianProfile& profile, double eps, double nu) {
  if (!(eps > 0.0)) throw std::invalid_argument("assemble_generator: eps must be > 0");
  if (!(nu >= 0.0)) throw std::invalid_argument("assemble_generator: nu must be >= 0");
  const double h = grid.h();
  return (nu / (h * h)) * assemble_laplacian(grid.M) + (1.0 / (2.0 * h * eps)) * assemble_advection(grid, profile);
}

Rda2dSystem::Rda2dSystem(Rda2dOptions options)
    : options_(std::move(options)),
      covariance_(covariance_matrix_2d(options_.kernel, options_.grid)),
      sde_(assemble_generator(options_.grid, options_.profile, options_.eps, options_.nu), options_.tau,
           noise_root_for(options_, covariance_), options_.reaction, options_.diffusion) {}

Vector sample_on_grid(const Grid2D& grid, const std::function<double(Point)>& f) {
  const auto n = static_cast<Eigen::Index>(grid.n_interior());
  Vector v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = f(grid.node(static_cast<std::size_t>(k)));
  return v;
}

Vector step_exponential_euler(const Rda2dSystem& system, const Vector& u, const Vector& dB) {
  return step_exponential_euler(system.sde(), u, dB);
}

Vector step_euler_maruyama(const Rda2dSystem& system, const Vector& u, const Vector& dB) {
  return step_euler_maruyama(system.sde(), u, dB);
}

PathResult solve_path(const Rda2dSystem& system, const Vector& u0, const NoiseStream& stream, int level,
                      long n_steps, Scheme scheme, bool store_trajectory) {
  return solve_path(system.sde(), u0, stream, level, n_steps, scheme, store_trajectory);
}

}  // namespace rdag
