#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "rdagraph/dense_ops.hpp"
#include "rdagraph/graph_ops.hpp"
#include "rdagraph/grids.hpp"
#include "rdagraph/hamiltonian.hpp"

namespace rdag {

// Radial covariance functions Lambda of the driving Wiener field.

/// Riesz kernel of order r in (0, 2); singular at the origin.
struct RieszKernel {
  double r = 1.0;
};
/// Bessel kernel of order r > 0; finite at the origin only for r > 2.
struct BesselKernel {
  double r = 3.0;
};
/// (2 pi r)^{-1} exp(-|x|^2 / (2r)).
struct HeatKernel {
  double r = 1.0;
};
/// pi^{-1} r (|x|^2 + r^2)^{-1}.
struct PoissonKernel {
  double r = 1.0;
};
/// pi^{-1} exp(-|x|^2); coincides with HeatKernel{0.5}.
struct GaussPiKernel {};

class SpectralKernel {
 public:
  using Family = std::variant<RieszKernel, BesselKernel, HeatKernel, PoissonKernel, GaussPiKernel>;

  SpectralKernel() : SpectralKernel(GaussPiKernel{}) {}
  explicit SpectralKernel(Family family);

  /// Lambda as a function of the distance |x|. Throws std::domain_error where singular.
  double radial(double rho) const;
  bool finite_at_origin() const;
  const Family& family() const { return family_; }
  std::string describe() const;

 private:
  Family family_;
};

double eval_kernel(const SpectralKernel& kernel, Point x);

/// F_{kl} = Lambda(X_k - X_l) over the interior nodes of the grid.
DenseMatrix covariance_matrix_2d(const SpectralKernel& kernel, const Grid2D& grid);

/// Covariance of the projected field between levels z and y: the average of
/// Lambda over pairs of points on the two level circles, reduced to a single
/// integral over the angle difference.
double graph_kernel_bar(const SpectralKernel& kernel, const HamiltonianProfile& profile, double z, double y,
                        AngularQuadrature quad = {});

/// Q_{kl} = graph_kernel_bar(z_k, z_l) over the graph nodes.
DenseMatrix covariance_matrix_graph(const SpectralKernel& kernel, const HamiltonianProfile& profile,
                                    const GraphGrid& grid, AngularQuadrature quad = {});

/// R = V diag(sqrt(max(lambda, 0) clipped below clip_tol * lambda_max)) V^T, so R R^T ~ S.
DenseMatrix psd_sqrt(const DenseMatrix& S, double clip_tol = 1e-12);

/// x -> sum_l mode_l(x) coefficient_l.
PlaneFunction kl_field_increment(std::vector<PlaneFunction> modes, std::vector<double> coefficients);

/// Philox4x32-10 counter-based generator.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  static Counter generate(Counter counter, Key key);
};

/// Independent families of streams sharing a master seed.
enum class StreamDomain : std::uint8_t {
  Field = 0,
  ParticleX = 1,
  ParticleY = 2,
  Coefficients = 3,
};

/// Brownian increments addressed by (seed, domain, path, fine step, component).
/// Increments at level m have stepsize 2^m tau_min and are exact pairwise sums of the
/// two level m-1 increments they cover.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, double tau_min, std::size_t dim, long horizon_fine_steps,
              std::uint64_t path_index, StreamDomain domain = StreamDomain::Field);

  double tau_min() const { return tau_min_; }
  std::size_t dim() const { return dim_; }
  long horizon() const { return horizon_; }
  std::uint64_t path_index() const { return path_; }
  std::uint64_t seed() const { return seed_; }

  /// Standard normal for (fine step, component).
  double standard_normal(long fine_step, std::size_t component) const;
  /// Components 2*pair and 2*pair+1 from one generator call.
  std::array<double, 2> normal_pair(long fine_step, std::size_t pair) const;

  /// Increment vector (variance 2^level tau_min per component) for step n at the given level.
  Vector sample_increments(int level, long n) const;

  /// All increments at the given level as a dim x (horizon / 2^level) matrix.
  DenseMatrix all_increments(int level) const;

 private:
  void check_level(int level) const;

  std::uint64_t seed_;
  double tau_min_;
  std::size_t dim_;
  long horizon_;
  std::uint64_t path_;
  StreamDomain domain_;
};

}  // namespace rdag
