#include "rdagraph/stepping.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "rdagraph/errors.hpp"

namespace rdag {

namespace {

void check_dims(const LinearSdeSystem& system, const Vector& u, const Vector& dB) {
  if (static_cast<std::size_t>(u.size()) != system.size() || dB.size() != system.noise_root().cols()) {
    throw std::invalid_argument("step: dimension mismatch");
  }
}

}  // namespace

LinearSdeSystem::LinearSdeSystem(DenseMatrix generator, double tau, DenseMatrix noise_root,
                                 ScalarFunction reaction, ScalarFunction diffusion)
    : generator_(std::move(generator)),
      tau_(tau),
      noise_root_(std::move(noise_root)),
      reaction_(std::move(reaction)),
      diffusion_(std::move(diffusion)),
      radius_cache_(std::make_shared<std::optional<double>>()),
      warned_(std::make_shared<std::atomic<bool>>(false)) {
  if (!(tau_ > 0.0)) throw std::invalid_argument("LinearSdeSystem: tau must be > 0");
  if (generator_.rows() != generator_.cols()) throw std::invalid_argument("LinearSdeSystem: generator not square");
  if (noise_root_.rows() != generator_.rows()) {
    throw std::invalid_argument("LinearSdeSystem: noise root has the wrong number of rows");
  }
  propagator_ = matrix_exp(generator_, tau_);
}

Vector LinearSdeSystem::frozen_update(const Vector& u, const Vector& dB) const {
  Vector v = u;
  if (reaction_) {
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) += tau_ * reaction_(u(k));
  }
  if (diffusion_) {
    const Vector field = noise_root_ * dB;
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) += diffusion_(u(k)) * field(k);
  }
  return v;
}

double LinearSdeSystem::spectral_radius() const {
  if (!radius_cache_->has_value()) {
    Eigen::EigenSolver<DenseMatrix> solver(generator_, false);
    *radius_cache_ = solver.eigenvalues().cwiseAbs().maxCoeff();
  }
  return **radius_cache_;
}

Vector step_exponential_euler(const LinearSdeSystem& system, const Vector& u, const Vector& dB) {
  check_dims(system, u, dB);
  Vector next = system.propagator() * system.frozen_update(u, dB);
  if (!next.allFinite()) throw NonFiniteState("exponential Euler step produced a non-finite state", 1);
  return next;
}

Vector step_euler_maruyama(const LinearSdeSystem& system, const Vector& u, const Vector& dB) {
  check_dims(system, u, dB);
  if (!system.warned_->load(std::memory_order_relaxed) && system.tau() * system.spectral_radius() > 2.0) {
    if (!system.warned_->exchange(true)) {
      std::cerr << "warning: Euler-Maruyama step is outside its stability region (tau * rho(L) = "
                << system.tau() * system.spectral_radius() << " > 2)\n";
    }
  }
  Vector v = u + system.tau() * (system.generator() * u);
  if (system.diffusion_) {
    const Vector field = system.noise_root() * dB;
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) += system.diffusion_(u(k)) * field(k);
  }
  if (!v.allFinite()) throw NonFiniteState("Euler-Maruyama step produced a non-finite state", 1);
  return v;
}

PathResult solve_path(const LinearSdeSystem& system, const Vector& u0, const NoiseStream& stream, int level,
                      long n_steps, Scheme scheme, bool store_trajectory) {
  if (n_steps < 1) throw std::invalid_argument("solve_path: need at least one step");
  const double stream_tau = std::ldexp(stream.tau_min(), level);
  if (std::abs(stream_tau - system.tau()) > 1e-12 * system.tau()) {
    throw std::invalid_argument("solve_path: stream level stepsize does not match the system stepsize");
  }
  const DenseMatrix increments = stream.all_increments(level);
  if (increments.cols() < n_steps) throw std::out_of_range("solve_path: stream horizon shorter than the path");

  PathResult result;
  Vector u = u0;
  if (store_trajectory) {
    result.trajectory.reserve(static_cast<std::size_t>(n_steps) + 1);
    result.trajectory.push_back(u);
  }
  for (long n = 0; n < n_steps; ++n) {
    const Vector dB = increments.col(n);
    try {
      u = scheme == Scheme::ExponentialEuler ? step_exponential_euler(system, u, dB)
                                             : step_euler_maruyama(system, u, dB);
    } catch (const NonFiniteState&) {
      throw NonFiniteState("solve_path: state is not finite", n + 1);
    }
    if (store_trajectory) result.trajectory.push_back(u);
  }
  result.final_state = std::move(u);
  return result;
}

}  // namespace rdag
