#include "rdagraph/graph1d.hpp"

#include <cmath>
#include <stdexcept>

namespace rdag {

DenseMatrix assemble_generator_graph(const GraphGrid& grid, const HamiltonianProfile& profile) {
  const int M = grid.M;
  if (M < 2) throw std::invalid_argument("assemble_generator_graph: M must be >= 2");
  const double h = grid.h();
  std::vector<LevelCoefficients> c(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) c[static_cast<std::size_t>(i)] = level_coefficients(profile, grid.node(i));

  DenseMatrix L = DenseMatrix::Zero(M, M);
  L(0, 0) = -c[0].beta / h;
  L(0, 1) = c[0].beta / h;
  for (int i = 1; i < M; ++i) {
    const double a = c[static_cast<std::size_t>(i)].alpha / (h * h);
    const double b = c[static_cast<std::size_t>(i)].beta / (2.0 * h);
    L(i, i - 1) = a - b;
    L(i, i) = -2.0 * a;
    if (i + 1 < M) L(i, i + 1) = a + b;
  }
  return L;
}

Graph1dSystem::Graph1dSystem(Graph1dOptions options)
    : options_(std::move(options)),
      covariance_(covariance_matrix_graph(options_.kernel, options_.profile, options_.grid, options_.quad)),
      sde_(assemble_generator_graph(options_.grid, options_.profile), options_.tau,
           psd_sqrt(covariance_, options_.clip_tol), options_.reaction, options_.diffusion) {}

Vector sample_on_graph(const GraphGrid& grid, const std::function<double(double)>& f) {
  Vector v(grid.M);
  for (int i = 0; i < grid.M; ++i) v(i) = f(grid.node(i));
  return v;
}

double interpolate_graph(const GraphGrid& grid, const Vector& values, double z) {
  if (values.size() != grid.M) throw std::invalid_argument("interpolate_graph: dimension mismatch");
  if (!(z >= 0.0)) throw std::invalid_argument("interpolate_graph: level must be >= 0");
  const double h = grid.h();
  const double s = z / h;
  const auto i = static_cast<int>(std::floor(s));
  if (i >= grid.M) return 0.0;
  const double w = s - i;
  const double right = (i + 1 < grid.M) ? values(i + 1) : 0.0;
  return (1.0 - w) * values(i) + w * right;
}

Vector step_exponential_euler_graph(const Graph1dSystem& system, const Vector& u, const Vector& dB) {
  return step_exponential_euler(system.sde(), u, dB);
}

Vector step_euler_maruyama_graph(const Graph1dSystem& system, const Vector& u, const Vector& dB) {
  return step_euler_maruyama(system.sde(), u, dB);
}

PathResult solve_path_graph(const Graph1dSystem& system, const Vector& u0, const NoiseStream& stream, int level,
                            long n_steps, Scheme scheme, bool store_trajectory) {
  return solve_path(system.sde(), u0, stream, level, n_steps, scheme, store_trajectory);
}

}  // namespace rdag
