#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rdagraph/dense_ops.hpp"
#include "rdagraph/graph_ops.hpp"
#include "rdagraph/hamiltonian.hpp"

namespace rdag {

/// How the drift of the level scheme is evaluated once a path dips below the vertex.
enum class NegativeLevelDrift {
  ClampToVertex,    ///< drift A'/T evaluated at max(Y, 0)
  ExtendedInverse,  ///< drift evaluated with F continued to negative levels by Newton
};

struct ParticleConfig {
  HamiltonianProfile profile{ZetaProfile::exp_decay(0.5)};
  double eps = 1.0;
  /// Field stepsize: the coefficient increments live on this grid.
  double tau = 1.0 / 128.0;
  /// Particle stepsize; 0 means equal to tau. Must divide tau.
  double tau_particle = 0.0;
  long N = 1;
  int P = 100;
  int Q_outer = 1;
  int M2 = 1;
  double h = 1.0;
  /// psi^wedge; empty means zero.
  LevelFunction psi_graph;
  /// Wedge modes (u_l mu)^wedge, one per KL term.
  std::vector<LevelFunction> modes_graph;
  /// Plane versions; empty means the vee of the graph version.
  PlaneFunction psi_plane;
  std::vector<PlaneFunction> modes_plane;
  WeightProfile weight{ConstOneWeight{}};
  std::uint64_t seed = 0;
  NegativeLevelDrift negative_drift = NegativeLevelDrift::ClampToVertex;
  /// Test hook multiplying the advection; 1 for the physical scheme.
  double drift_scale = 1.0;
  int threads = 1;

  /// Throws ConfigError on invalid fields.
  void validate() const;
  double particle_step() const { return tau_particle > 0.0 ? tau_particle : tau; }
  /// Particle steps per field step.
  long substeps() const;
  std::size_t modes() const;
  /// Evaluation points (ih, jh), |i|, |j| < M2, i running fastest.
  std::size_t n_points() const;
  Point point(std::size_t k) const;
};

/// One Euler-Maruyama step of the fast diffusion.
Point step_X(const ParticleConfig& config, Point x, double dB1, double dB2);
/// One step of the level scheme.
double step_Y(const ParticleConfig& config, double y, double dB);

/// Runs step_X over the columns of a 2 x n increment matrix. Throws NonFiniteState with
/// the 1-based step index.
Point em_particle_X(const ParticleConfig& config, Point x0, const DenseMatrix& increments);
/// Runs step_Y over the increments. Requires z0 >= 0.
double scheme_Y(const ParticleConfig& config, double z0, std::span<const double> increments);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// E[phi(X^x(t))] over P paths with indices path_offset + p. t must be a multiple of the
/// particle stepsize.
McEstimate mc_semigroup_2d(const ParticleConfig& config, const PlaneFunction& phi, Point x, double t,
                           std::uint64_t path_offset = 0);
/// E[f(Y^z(t))] over P paths.
McEstimate mc_semigroup_graph(const ParticleConfig& config, const LevelFunction& f, double z, double t,
                              std::uint64_t path_offset = 0);

/// KL coefficient increments for outer sample q: a modes() x N matrix with variance tau.
DenseMatrix outer_coefficients(const ParticleConfig& config, std::uint64_t q);

/// Plane estimator at every evaluation point. Inner paths for (q, point k, path p) use
/// index (q * n_points + k) * P + p, so outer samples and points never share paths.
std::vector<double> estimate_U_points(const ParticleConfig& config, const DenseMatrix& coefficients,
                                      std::uint64_t q = 0);
/// Graph estimator at H of every evaluation point, same path indexing.
std::vector<double> estimate_barU_points(const ParticleConfig& config, const DenseMatrix& coefficients,
                                         std::uint64_t q = 0);

/// sum_k |U_k - barU_k|^2 gamma(H(x_k)) h^2.
double weighted_point_error(const ParticleConfig& config, std::span<const double> U,
                            std::span<const double> barU);

struct OuterSample {
  DenseMatrix coefficients_U;
  DenseMatrix coefficients_barU;
  std::vector<double> U;
  std::vector<double> barU;
  double error = 0.0;
};

struct AsymptoticResult {
  McEstimate error;
  std::vector<OuterSample> samples;  // filled only when requested
};

/// Outer Monte Carlo over Q_outer coefficient draws at config.eps.
AsymptoticResult asymptotic_error(const ParticleConfig& config, bool keep_samples = false);

/// Same, reusing precomputed graph estimates (one vector per outer sample). The graph
/// estimator does not depend on eps, so a sweep only needs it once.
AsymptoticResult asymptotic_error(const ParticleConfig& config,
                                  const std::vector<std::vector<double>>& barU_per_outer,
                                  bool keep_samples = false);

/// Mean and standard error of a sample, summed in fixed order.
McEstimate mean_and_std_error(std::span<const double> values);

}  // namespace rdag
