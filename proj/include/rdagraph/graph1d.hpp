#pragma once

#include <vector>

#include "rdagraph/dense_ops.hpp"
#include "rdagraph/graph_ops.hpp"
#include "rdagraph/grids.hpp"
#include "rdagraph/hamiltonian.hpp"
#include "rdagraph/noise.hpp"
#include "rdagraph/stepping.hpp"

namespace rdag {

/// Tridiagonal finite-difference generator of alpha d_zz + beta d_z on z_0..z_{M-1}.
/// Row 0 is the one-sided drift-only vertex row; row M-1 sees the Dirichlet zero at z_M = L.
DenseMatrix assemble_generator_graph(const GraphGrid& grid, const HamiltonianProfile& profile);

struct Graph1dOptions {
  GraphGrid grid;
  HamiltonianProfile profile{ZetaProfile::exp_decay(0.5)};
  double tau = 1.0 / 128.0;
  SpectralKernel kernel;
  AngularQuadrature quad;
  ScalarFunction reaction;   ///< empty means b = 0
  ScalarFunction diffusion;  ///< empty means g = 0
  double clip_tol = 1e-12;
};

/// Assembled truncated graph problem with cached e^{L tau} and Q^{1/2}.
class Graph1dSystem {
 public:
  explicit Graph1dSystem(Graph1dOptions options);

  const GraphGrid& grid() const { return options_.grid; }
  const HamiltonianProfile& profile() const { return options_.profile; }
  const LinearSdeSystem& sde() const { return sde_; }
  const DenseMatrix& generator() const { return sde_.generator(); }
  const DenseMatrix& propagator() const { return sde_.propagator(); }
  const DenseMatrix& covariance() const { return covariance_; }

 private:
  Graph1dOptions options_;
  DenseMatrix covariance_;
  LinearSdeSystem sde_;
};

/// f(z_i) at the graph nodes.
Vector sample_on_graph(const GraphGrid& grid, const std::function<double(double)>& f);

/// Piecewise-linear interpolation of graph node values at level z; zero at and beyond z_M = L.
double interpolate_graph(const GraphGrid& grid, const Vector& values, double z);

Vector step_exponential_euler_graph(const Graph1dSystem& system, const Vector& u, const Vector& dB);
Vector step_euler_maruyama_graph(const Graph1dSystem& system, const Vector& u, const Vector& dB);
PathResult solve_path_graph(const Graph1dSystem& system, const Vector& u0, const NoiseStream& stream, int level,
                            long n_steps, Scheme scheme = Scheme::ExponentialEuler,
                            bool store_trajectory = false);

}  // namespace rdag
