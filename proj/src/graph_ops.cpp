#include "rdagraph/graph_ops.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace rdag {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Hermite smoothstep, 0 at a, 1 at b, zero slope at both ends.
double smoothstep(double a, double b, double z) {
  if (z <= a) return 0.0;
  if (z >= b) return 1.0;
  const double s = (z - a) / (b - a);
  return s * s * (3.0 - 2.0 * s);
}

double blended_tail(double z, double z0, const std::function<double(double)>& tail) {
  if (z >= z0) return tail(z);
  const double floor_value = tail(z0);
  const double a = 0.5 * z0;
  if (z <= a) return floor_value;
  const double s = smoothstep(a, z0, z);
  return s * tail(z) + (1.0 - s) * floor_value;
}

void check_size(std::size_t got, std::size_t want, const char* who) {
  if (got != want) {
    throw std::invalid_argument(std::string(who) + ": expected " + std::to_string(want) +
                                " values, got " + std::to_string(got));
  }
}

}  // namespace

WeightProfile::WeightProfile(Family family) : family_(std::move(family)) {
  std::visit(Overloaded{
                 [](const PowerTailWeight& w) {
                   if (!(w.c0 > 0.0 && w.lambda > 0.0 && w.z0 > 0.0)) {
                     throw std::invalid_argument("PowerTailWeight: c0, lambda, z0 must be > 0");
                   }
                 },
                 [](const ExpTailWeight& w) {
                   if (!(w.c0 > 0.0 && w.lambda > 0.0 && w.z0 > 0.0)) {
                     throw std::invalid_argument("ExpTailWeight: c0, lambda, z0 must be > 0");
                   }
                 },
                 [](const auto&) {},
             },
             family_);
}

WeightProfile WeightProfile::sqrt_of(const WeightProfile& base) {
  if (base.sqrt_) throw std::invalid_argument("sqrt_of: weight is already a square root");
  WeightProfile w = base;
  w.sqrt_ = true;
  return w;
}

double WeightProfile::base_value(double z) const {
  return std::visit(Overloaded{
                        [z](const ExpSqrtWeight&) { return std::exp(-std::sqrt(z)); },
                        [z](const PowerTailWeight& w) {
                          return blended_tail(z, w.z0,
                                              [&w](double y) { return w.c0 * std::pow(y, -w.lambda); });
                        },
                        [z](const ExpTailWeight& w) {
                          return blended_tail(z, w.z0, [&w](double y) {
                            return w.c0 * std::exp(-w.lambda * (std::sqrt(y) - std::sqrt(2.0 * w.z0)));
                          });
                        },
                        [](const ConstOneWeight&) { return 1.0; },
                    },
                    family_);
}

double WeightProfile::operator()(double z) const {
  const double v = base_value(z);
  return sqrt_ ? std::sqrt(v) : v;
}

std::string WeightProfile::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (sqrt_) os << "sqrt(";
  std::visit(Overloaded{
                 [&os](const ExpSqrtWeight&) { os << "exp_sqrt"; },
                 [&os](const PowerTailWeight& w) {
                   os << "power_tail(c0=" << w.c0 << ", lambda=" << w.lambda << ", z0=" << w.z0 << ")";
                 },
                 [&os](const ExpTailWeight& w) {
                   os << "exp_tail(c0=" << w.c0 << ", lambda=" << w.lambda << ", z0=" << w.z0 << ")";
                 },
                 [&os](const ConstOneWeight&) { os << "one"; },
             },
             family_);
  if (sqrt_) os << ")";
  return os.str();
}

AngularQuadrature::AngularQuadrature(int n) : n_theta(n) {
  if (n < 4) throw std::invalid_argument("AngularQuadrature: n_theta must be >= 4");
}

double wedge(const HamiltonianProfile& profile, const PlaneFunction& phi, double z, AngularQuadrature quad) {
  if (quad.n_theta < 4) throw std::invalid_argument("wedge: n_theta must be >= 4");
  const double radius = std::sqrt(invert_F(profile, z));
  const double dtheta = 2.0 * std::numbers::pi / quad.n_theta;
  double sum = 0.0;
  for (int m = 0; m < quad.n_theta; ++m) {
    const double t = m * dtheta;
    sum += phi({radius * std::cos(t), radius * std::sin(t)});
  }
  return sum / quad.n_theta;
}

double vee(const HamiltonianProfile& profile, const LevelFunction& f, Point x) { return f(eval_H(profile, x)); }

double norm_sq_Hgamma_2d(std::span<const double> values, const Grid2D& grid, const WeightProfile& weight,
                         const HamiltonianProfile& profile) {
  check_size(values.size(), grid.n_interior(), "norm_sq_Hgamma_2d");
  const double h2 = grid.h() * grid.h();
  double sum = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    sum += values[k] * values[k] * weight(eval_H(profile, grid.node(k))) * h2;
  }
  return sum;
}

double norm_sq_L2Agamma_1d(std::span<const double> values, const GraphGrid& grid,
                           const WeightProfile& weight, const HamiltonianProfile& profile) {
  check_size(values.size(), grid.size(), "norm_sq_L2Agamma_1d");
  const double h = grid.h();
  double sum = 0.0;
  for (int i = 0; i < grid.M; ++i) {
    const double z = grid.node(i);
    sum += values[i] * values[i] * area_A(profile, z) * weight(z) * h;
  }
  return sum;
}

double norm_sq_L2Tgamma_1d(std::span<const double> values, const GraphGrid& grid,
                           const WeightProfile& weight, const HamiltonianProfile& profile) {
  check_size(values.size(), grid.size(), "norm_sq_L2Tgamma_1d");
  const double h = grid.h();
  double sum = 0.0;
  for (int i = 0; i < grid.M; ++i) {
    const double z = grid.node(i);
    sum += values[i] * values[i] * period_T(profile, z) * weight(z) * h;
  }
  return sum;
}

double weighted_period_integral(const WeightProfile& weight, const HamiltonianProfile& profile, double z_max,
                                int n_intervals) {
  if (!(z_max > 0.0) || n_intervals < 1) {
    throw std::invalid_argument("weighted_period_integral: need z_max > 0 and n_intervals >= 1");
  }
  const double dz = z_max / n_intervals;
  double sum = 0.0;
  for (int i = 0; i <= n_intervals; ++i) {
    const double z = i * dz;
    const double w = (i == 0 || i == n_intervals) ? 0.5 : 1.0;
    sum += w * weight(z) * period_T(profile, z);
  }
  return sum * dz;
}

}  // namespace rdag
