#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "rdagraph/dense_ops.hpp"
#include "rdagraph/noise.hpp"

namespace rdag {

using ScalarFunction = std::function<double(double)>;

enum class Scheme { ExponentialEuler, EulerMaruyama };

/// du = (L u + b(u)) dt + G(u) S dB with G(u) = diag(g(u_k)), frozen stepsize tau.
/// Immutable after construction; e^{L tau} is computed once and cached.
class LinearSdeSystem {
 public:
  LinearSdeSystem(DenseMatrix generator, double tau, DenseMatrix noise_root, ScalarFunction reaction,
                  ScalarFunction diffusion);

  const DenseMatrix& generator() const { return generator_; }
  const DenseMatrix& propagator() const { return propagator_; }
  const DenseMatrix& noise_root() const { return noise_root_; }
  double tau() const { return tau_; }
  std::size_t size() const { return static_cast<std::size_t>(generator_.rows()); }
  /// Whether b is identically zero; skips the reaction evaluation.
  bool reaction_is_zero() const { return !reaction_; }
  bool diffusion_is_zero() const { return !diffusion_; }

  /// u + tau b(u) + G(u) S dB.
  Vector frozen_update(const Vector& u, const Vector& dB) const;

  /// Largest eigenvalue modulus of the generator (computed on first use).
  double spectral_radius() const;

 private:
  DenseMatrix generator_;
  double tau_;
  DenseMatrix propagator_;
  DenseMatrix noise_root_;
  ScalarFunction reaction_;
  ScalarFunction diffusion_;
  mutable std::shared_ptr<std::optional<double>> radius_cache_;
  mutable std::shared_ptr<std::atomic<bool>> warned_;

  friend Vector step_euler_maruyama(const LinearSdeSystem&, const Vector&, const Vector&);
};

/// u_{n+1} = e^{L tau} (u_n + b(u_n) tau + G(u_n) S dB).
Vector step_exponential_euler(const LinearSdeSystem& system, const Vector& u, const Vector& dB);

/// u_{n+1} = u_n + tau L u_n + G(u_n) S dB (the reaction is ignored, b = 0).
/// Prints a one-time warning to stderr when tau * rho(L) > 2.
Vector step_euler_maruyama(const LinearSdeSystem& system, const Vector& u, const Vector& dB);

struct PathResult {
  Vector final_state;
  std::vector<Vector> trajectory;  ///< u_0..u_N when requested, otherwise empty
};

/// N steps driven by the stream's increments at `level` (stepsize 2^level tau_min, which
/// must equal the system's tau). Throws NonFiniteState with the offending step index.
PathResult solve_path(const LinearSdeSystem& system, const Vector& u0, const NoiseStream& stream, int level,
                      long n_steps, Scheme scheme = Scheme::ExponentialEuler, bool store_trajectory = false);

}  // namespace rdag
