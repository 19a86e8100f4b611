#pragma once

#include "rdagraph/dense_ops.hpp"
#include "rdagraph/grids.hpp"
#include "rdagraph/hamiltonian.hpp"
#include "rdagraph/noise.hpp"
#include "rdagraph/stepping.hpp"

namespace rdag {

/// I (x) D_M + D_M (x) I with D_M = tridiag(1, -2, 1) of size 2M-1.
DenseMatrix assemble_laplacian(int M);

/// Central-difference matrix of size 2M-1: -1 below the diagonal, +1 above.
DenseMatrix assemble_gradient_1d(int M);

/// -H_2 R_1 + H_1 R_2 with R_1 = I (x) grad_M, R_2 = grad_M (x) I and H_i = diag(d_i H(X_k)).
/// Dividing by 2h gives the discrete <grad_perp H, grad u>.
DenseMatrix assemble_advection(const Grid2D& grid, const HamiltonianProfile& profile);

/// (nu / h^2) A + (1 / (2 h eps)) (-H_2 R_1 + H_1 R_2). nu = 1/2 matches the (1/2) Laplacian
/// of the continuous model.
DenseMatrix assemble_generator(const Grid2D& grid, const HamiltonianProfile& profile, double eps,
                               double nu = 0.5);

struct Rda2dOptions {
  Grid2D grid;
  HamiltonianProfile profile{ZetaProfile::exp_decay(0.5)};
  double eps = 1.0;
  double tau = 1.0 / 128.0;
  double nu = 0.5;
  SpectralKernel kernel;
  ScalarFunction reaction;   ///< empty means b = 0
  ScalarFunction diffusion;  ///< empty means g = 0
  double clip_tol = 1e-12;
};

/// Assembled truncated 2D problem: generator, cached e^{L tau} and F^{1/2}.
class Rda2dSystem {
 public:
  explicit Rda2dSystem(Rda2dOptions options);

  const Grid2D& grid() const { return options_.grid; }
  const HamiltonianProfile& profile() const { return options_.profile; }
  double eps() const { return options_.eps; }
  double nu() const { return options_.nu; }
  const SpectralKernel& kernel() const { return options_.kernel; }
  const LinearSdeSystem& sde() const { return sde_; }
  const DenseMatrix& generator() const { return sde_.generator(); }
  const DenseMatrix& propagator() const { return sde_.propagator(); }
  const DenseMatrix& covariance() const { return covariance_; }

 private:
  Rda2dOptions options_;
  DenseMatrix covariance_;
  LinearSdeSystem sde_;
};

/// Grid samples of a function on the interior nodes.
Vector sample_on_grid(const Grid2D& grid, const std::function<double(Point)>& f);

Vector step_exponential_euler(const Rda2dSystem& system, const Vector& u, const Vector& dB);
Vector step_euler_maruyama(const Rda2dSystem& system, const Vector& u, const Vector& dB);
PathResult solve_path(const Rda2dSystem& system, const Vector& u0, const NoiseStream& stream, int level,
                      long n_steps, Scheme scheme = Scheme::ExponentialEuler, bool store_trajectory = false);

}  // namespace rdag
