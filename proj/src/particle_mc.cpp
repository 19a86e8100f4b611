#include "rdagraph/particle_mc.hpp"

#include <cmath>
#include <stdexcept>

#include "rdagraph/errors.hpp"
#include "rdagraph/noise.hpp"
#include "rdagraph/parallel.hpp"

namespace rdag {

namespace {

constexpr int kExtendedNewtonIterations = 100;

bool is_multiple(double t, double step, long* count) {
  const double ratio = t / step;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) return false;
  *count = static_cast<long>(rounded);
  return true;
}

/// beta = 2(1 + zeta'(F) + F zeta''(F)) with F solved by Newton below the vertex.
double extended_beta(const HamiltonianProfile& profile, double z) {
  const ZetaProfile& zeta = profile.zeta();
  double y = z;
  for (int it = 0; it < kExtendedNewtonIterations; ++it) {
    const double g = y + zeta.value(y) - z;
    const double dg = 1.0 + zeta.d1(y);
    const double next = y - g / dg;
    if (!std::isfinite(next)) break;
    if (std::abs(next - y) <= 1e-15 * std::max(1.0, std::abs(y))) {
      y = next;
      return 2.0 * (1.0 + zeta.d1(y) + y * zeta.d2(y));
    }
    y = next;
  }
  throw NumericalError("level scheme: no extended inverse at level " + std::to_string(z));
}

double plane_value(const ParticleConfig& c, const PlaneFunction& plane, const LevelFunction& graph, Point x) {
  if (plane) return plane(x);
  if (graph) return graph(eval_H(c.profile, x));
  return 0.0;
}

PlaneFunction plane_mode(const ParticleConfig& c, std::size_t l) {
  if (l < c.modes_plane.size() && c.modes_plane[l]) return c.modes_plane[l];
  const LevelFunction g = l < c.modes_graph.size() ? c.modes_graph[l] : LevelFunction{};
  const HamiltonianProfile profile = c.profile;
  return [g, profile](Point x) { return g ? g(eval_H(profile, x)) : 0.0; };
}

LevelFunction graph_mode(const ParticleConfig& c, std::size_t l) {
  if (l < c.modes_graph.size() && c.modes_graph[l]) return c.modes_graph[l];
  return [](double) { return 0.0; };
}

}  // namespace

void ParticleConfig::validate() const {
  if (!(eps > 0.0)) throw ConfigError("particle: eps must be > 0");
  if (!(tau > 0.0)) throw ConfigError("particle: tau must be > 0");
  if (tau_particle < 0.0) throw ConfigError("particle: tau_particle must be >= 0");
  if (!(h > 0.0)) throw ConfigError("particle: h must be > 0");
  if (N < 1 || P < 1 || Q_outer < 1 || M2 < 1) throw ConfigError("particle: N, P, Q_outer, M2 must be >= 1");
  if (!modes_plane.empty() && !modes_graph.empty() && modes_plane.size() != modes_graph.size()) {
    throw ConfigError("particle: plane and graph mode lists differ in length");
  }
  substeps();
}

long ParticleConfig::substeps() const {
  long r = 0;
  if (!is_multiple(tau, particle_step(), &r) || r < 1) {
    throw ConfigError("particle: tau must be an integer multiple of tau_particle");
  }
  return r;
}

std::size_t ParticleConfig::modes() const { return std::max(modes_graph.size(), modes_plane.size()); }

std::size_t ParticleConfig::n_points() const {
  const std::size_t side = 2 * static_cast<std::size_t>(M2) - 1;
  return side * side;
}

Point ParticleConfig::point(std::size_t k) const {
  const long side = 2L * M2 - 1;
  const long i = static_cast<long>(k) % side - (M2 - 1);
  const long j = static_cast<long>(k) / side - (M2 - 1);
  return {i * h, j * h};
}

Point step_X(const ParticleConfig& config, Point x, double dB1, double dB2) {
  const Point v = grad_perp_H(config.profile, x);
  const double s = config.drift_scale * config.particle_step() / config.eps;
  return {x[0] + s * v[0] + dB1, x[1] + s * v[1] + dB2};
}

double step_Y(const ParticleConfig& config, double y, double dB) {
  const double tau = config.particle_step();
  if (y >= 0.0) {
    const LevelCoefficients c = level_coefficients(config.profile, y);
    return y + c.beta * tau + std::sqrt(std::max(2.0 * c.alpha, 0.0)) * dB;
  }
  // Below the vertex F < 0, so A is set to 0 and the diffusion vanishes.
  const double drift = config.negative_drift == NegativeLevelDrift::ClampToVertex
                           ? beta(config.profile, 0.0)
                           : extended_beta(config.profile, y);
  return y + drift * tau;
}

Point em_particle_X(const ParticleConfig& config, Point x0, const DenseMatrix& increments) {
  if (increments.rows() != 2) throw std::invalid_argument("em_particle_X: increments must have 2 rows");
  Point x = x0;
  for (Eigen::Index n = 0; n < increments.cols(); ++n) {
    x = step_X(config, x, increments(0, n), increments(1, n));
    if (!std::isfinite(x[0]) || !std::isfinite(x[1])) {
      throw NonFiniteState("em_particle_X: non-finite state", static_cast<long>(n) + 1);
    }
  }
  return x;
}

double scheme_Y(const ParticleConfig& config, double z0, std::span<const double> increments) {
  if (!(z0 >= 0.0)) throw std::invalid_argument("scheme_Y: z0 must be >= 0");
  double y = z0;
  for (std::size_t n = 0; n < increments.size(); ++n) {
    y = step_Y(config, y, increments[n]);
    if (!std::isfinite(y)) throw NonFiniteState("scheme_Y: non-finite state", static_cast<long>(n) + 1);
  }
  return y;
}

McEstimate mean_and_std_error(std::span<const double> values) {
  McEstimate out;
  const std::size_t n = values.size();
  if (n == 0) return out;
  out.mean = pairwise_sum(values.data(), n) / static_cast<double>(n);
  if (n < 2) return out;
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (values[i] - out.mean) * (values[i] - out.mean);
  const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
  out.std_error = std::sqrt(var / static_cast<double>(n));
  return out;
}

McEstimate mc_semigroup_2d(const ParticleConfig& config, const PlaneFunction& phi, Point x, double t,
                           std::uint64_t path_offset) {
  config.validate();
  const double tau = config.particle_step();
  long steps = 0;
  if (!is_multiple(t, tau, &steps) || steps < 0) {
    throw std::invalid_argument("mc_semigroup_2d: t must be a multiple of the particle stepsize");
  }
  if (steps == 0) return {phi(x), 0.0};
  const double sq = std::sqrt(tau);
  std::vector<double> samples(static_cast<std::size_t>(config.P));
  parallel_for(samples.size(), config.threads, [&](std::size_t p) {
    const NoiseStream stream(config.seed, tau, 2, steps, path_offset + p, StreamDomain::ParticleX);
    Point y = x;
    for (long n = 0; n < steps; ++n) {
      const auto z = stream.normal_pair(n, 0);
      y = step_X(config, y, sq * z[0], sq * z[1]);
      if (!std::isfinite(y[0]) || !std::isfinite(y[1])) {
        throw NonFiniteState("mc_semigroup_2d: non-finite state", n + 1);
      }
    }
    samples[p] = phi(y);
  });
  return mean_and_std_error(samples);
}

McEstimate mc_semigroup_graph(const ParticleConfig& config, const LevelFunction& f, double z, double t,
                              std::uint64_t path_offset) {
  config.validate();
  if (!(z >= 0.0)) throw std::invalid_argument("mc_semigroup_graph: z must be >= 0");
  const double tau = config.particle_step();
  long steps = 0;
  if (!is_multiple(t, tau, &steps) || steps < 0) {
    throw std::invalid_argument("mc_semigroup_graph: t must be a multiple of the particle stepsize");
  }
  if (steps == 0) return {f(z), 0.0};
  const double sq = std::sqrt(tau);
  std::vector<double> samples(static_cast<std::size_t>(config.P));
  parallel_for(samples.size(), config.threads, [&](std::size_t p) {
    const NoiseStream stream(config.seed, tau, 1, steps, path_offset + p, StreamDomain::ParticleY);
    double y = z;
    for (long n = 0; n < steps; ++n) {
      y = step_Y(config, y, sq * stream.standard_normal(n, 0));
      if (!std::isfinite(y)) throw NonFiniteState("mc_semigroup_graph: non-finite state", n + 1);
    }
    samples[p] = f(y);
  });
  return mean_and_std_error(samples);
}

DenseMatrix outer_coefficients(const ParticleConfig& config, std::uint64_t q) {
  const std::size_t m = config.modes();
  if (m == 0) return DenseMatrix::Zero(0, config.N);
  const NoiseStream stream(config.seed, config.tau, m, config.N, q, StreamDomain::Coefficients);
  return stream.all_increments(0);
}

namespace {

/// Snapshot sums: values[s][l] = sum_p mode_l(path_p at time s*tau), s = 1..N, and the
/// terminal psi average, combined with the coefficients in a fixed order.
double combine(const ParticleConfig& c, const std::vector<std::vector<double>>& snap_means, double psi_mean,
               const DenseMatrix& coefficients) {
  double u = psi_mean;
  const long N = c.N;
  for (long r = 0; r < N; ++r) {
    const auto& m = snap_means[static_cast<std::size_t>(N - r)];
    for (std::size_t l = 0; l < m.size(); ++l) u += m[l] * coefficients(static_cast<Eigen::Index>(l), r);
  }
  return u;
}

void check_coefficients(const ParticleConfig& c, const DenseMatrix& coefficients) {
  if (static_cast<std::size_t>(coefficients.rows()) != c.modes() || coefficients.cols() != c.N) {
    throw std::invalid_argument("estimator: coefficient matrix must be modes x N");
  }
}

}  // namespace

std::vector<double> estimate_U_points(const ParticleConfig& config, const DenseMatrix& coefficients,
                                      std::uint64_t q) {
  config.validate();
  check_coefficients(config, coefficients);
  const std::size_t n_pts = config.n_points();
  const std::size_t n_modes = config.modes();
  const long R = config.substeps();
  const long steps = config.N * R;
  const double tau_p = config.particle_step();
  const double sq = std::sqrt(tau_p);
  const auto P = static_cast<std::size_t>(config.P);

  std::vector<PlaneFunction> modes(n_modes);
  for (std::size_t l = 0; l < n_modes; ++l) modes[l] = plane_mode(config, l);

  std::vector<double> out(n_pts);
  parallel_for(n_pts, config.threads, [&](std::size_t k) {
    const Point x0 = config.point(k);
    // per-path samples kept so the reduction order is fixed
    std::vector<std::vector<std::vector<double>>> snap(
        static_cast<std::size_t>(config.N) + 1, std::vector<std::vector<double>>(n_modes, std::vector<double>(P)));
    std::vector<double> psi_vals(P);
    for (std::size_t p = 0; p < P; ++p) {
      const std::uint64_t path = (q * n_pts + k) * P + p;
      const NoiseStream stream(config.seed, tau_p, 2, steps, path, StreamDomain::ParticleX);
      Point x = x0;
      for (long n = 0; n < steps; ++n) {
        const auto z = stream.normal_pair(n, 0);
        x = step_X(config, x, sq * z[0], sq * z[1]);
        if (!std::isfinite(x[0]) || !std::isfinite(x[1])) {
          throw NonFiniteState("estimate_U_points: non-finite state", n + 1);
        }
        if ((n + 1) % R == 0) {
          const auto s = static_cast<std::size_t>((n + 1) / R);
          for (std::size_t l = 0; l < n_modes; ++l) snap[s][l][p] = modes[l](x);
        }
      }
      psi_vals[p] = plane_value(config, config.psi_plane, config.psi_graph, x);
    }
    std::vector<std::vector<double>> means(snap.size(), std::vector<double>(n_modes, 0.0));
    for (std::size_t s = 1; s < snap.size(); ++s) {
      for (std::size_t l = 0; l < n_modes; ++l) means[s][l] = pairwise_sum(snap[s][l]) / static_cast<double>(P);
    }
    out[k] = combine(config, means, pairwise_sum(psi_vals) / static_cast<double>(P), coefficients);
  });
  return out;
}

std::vector<double> estimate_barU_points(const ParticleConfig& config, const DenseMatrix& coefficients,
                                         std::uint64_t q) {
  config.validate();
  check_coefficients(config, coefficients);
  const std::size_t n_pts = config.n_points();
  const std::size_t n_modes = config.modes();
  const long R = config.substeps();
  const long steps = config.N * R;
  const double tau_p = config.particle_step();
  const double sq = std::sqrt(tau_p);
  const auto P = static_cast<std::size_t>(config.P);

  std::vector<LevelFunction> modes(n_modes);
  for (std::size_t l = 0; l < n_modes; ++l) modes[l] = graph_mode(config, l);

  std::vector<double> out(n_pts);
  parallel_for(n_pts, config.threads, [&](std::size_t k) {
    const double z0 = eval_H(config.profile, config.point(k));
    std::vector<std::vector<std::vector<double>>> snap(
        static_cast<std::size_t>(config.N) + 1, std::vector<std::vector<double>>(n_modes, std::vector<double>(P)));
    std::vector<double> psi_vals(P);
    for (std::size_t p = 0; p < P; ++p) {
      const std::uint64_t path = (q * n_pts + k) * P + p;
      const NoiseStream stream(config.seed, tau_p, 1, steps, path, StreamDomain::ParticleY);
      double y = z0;
      for (long n = 0; n < steps; ++n) {
        y = step_Y(config, y, sq * stream.standard_normal(n, 0));
        if (!std::isfinite(y)) throw NonFiniteState("estimate_barU_points: non-finite state", n + 1);
        if ((n + 1) % R == 0) {
          const auto s = static_cast<std::size_t>((n + 1) / R);
          for (std::size_t l = 0; l < n_modes; ++l) snap[s][l][p] = modes[l](y);
        }
      }
      psi_vals[p] = config.psi_graph ? config.psi_graph(y) : 0.0;
    }
    std::vector<std::vector<double>> means(snap.size(), std::vector<double>(n_modes, 0.0));
    for (std::size_t s = 1; s < snap.size(); ++s) {
      for (std::size_t l = 0; l < n_modes; ++l) means[s][l] = pairwise_sum(snap[s][l]) / static_cast<double>(P);
    }
    out[k] = combine(config, means, pairwise_sum(psi_vals) / static_cast<double>(P), coefficients);
  });
  return out;
}

double weighted_point_error(const ParticleConfig& config, std::span<const double> U,
                            std::span<const double> barU) {
  const std::size_t n = config.n_points();
  if (U.size() != n || barU.size() != n) throw std::invalid_argument("weighted_point_error: size mismatch");
  std::vector<double> terms(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double d = U[k] - barU[k];
    terms[k] = d * d * config.weight(eval_H(config.profile, config.point(k))) * config.h * config.h;
  }
  return pairwise_sum(terms);
}

AsymptoticResult asymptotic_error(const ParticleConfig& config, bool keep_samples) {
  config.validate();
  std::vector<std::vector<double>> barU(static_cast<std::size_t>(config.Q_outer));
  for (std::size_t q = 0; q < barU.size(); ++q) {
    barU[q] = estimate_barU_points(config, outer_coefficients(config, q), q);
  }
  return asymptotic_error(config, barU, keep_samples);
}

AsymptoticResult asymptotic_error(const ParticleConfig& config,
                                  const std::vector<std::vector<double>>& barU_per_outer, bool keep_samples) {
  config.validate();
  const auto Q = static_cast<std::size_t>(config.Q_outer);
  if (barU_per_outer.size() != Q) throw std::invalid_argument("asymptotic_error: need one graph estimate per outer sample");
  AsymptoticResult result;
  std::vector<double> errors(Q);
  for (std::size_t q = 0; q < Q; ++q) {
    const DenseMatrix coeff = outer_coefficients(config, q);
    std::vector<double> U = estimate_U_points(config, coeff, q);
    errors[q] = weighted_point_error(config, U, barU_per_outer[q]);
    if (keep_samples) {
      // barU was produced from outer_coefficients(config, q); regenerate it to record the coupling
      result.samples.push_back({coeff, outer_coefficients(config, q), std::move(U), barU_per_outer[q], errors[q]});
    }
  }
  result.error = mean_and_std_error(errors);
  return result;
}

}  // namespace rdag
