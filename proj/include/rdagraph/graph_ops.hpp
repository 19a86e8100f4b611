#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>

#include "rdagraph/grids.hpp"
#include "rdagraph/hamiltonian.hpp"

namespace rdag {

/// gamma(z) = exp(-sqrt(z)).
struct ExpSqrtWeight {};
/// gamma(z) = c0 z^{-lambda} for z >= z0.
struct PowerTailWeight {
  double c0 = 1.0;
  double lambda = 2.0;
  double z0 = 1.0;
};
/// gamma(z) = c0 exp(-lambda (sqrt(z) - sqrt(2 z0))) for z >= z0.
struct ExpTailWeight {
  double c0 = 1.0;
  double lambda = 1.0;
  double z0 = 1.0;
};
struct ConstOneWeight {};

/// Graph weight gamma. Tail families are continued below z0 by the constant gamma(z0),
/// joined with a C^1 cubic blend over [z0/2, z0].
class WeightProfile {
 public:
  using Family = std::variant<ExpSqrtWeight, PowerTailWeight, ExpTailWeight, ConstOneWeight>;

  WeightProfile() : WeightProfile(ConstOneWeight{}) {}
  explicit WeightProfile(Family family);

  /// The weight sqrt(gamma) of the companion space.
  static WeightProfile sqrt_of(const WeightProfile& base);

  double operator()(double z) const;
  const Family& family() const { return family_; }
  bool is_sqrt() const { return sqrt_; }
  std::string describe() const;

 private:
  double base_value(double z) const;

  Family family_;
  bool sqrt_ = false;
};

/// Number of uniform angles realizing the circle averages.
struct AngularQuadrature {
  int n_theta = 256;

  AngularQuadrature() = default;
  explicit AngularQuadrature(int n);
};

using PlaneFunction = std::function<double(Point)>;
using LevelFunction = std::function<double(double)>;

/// Average of phi over the level set {H = z}: (1/2pi) int phi(sqrt(F) cos t, sqrt(F) sin t) dt,
/// periodic trapezoid rule.
double wedge(const HamiltonianProfile& profile, const PlaneFunction& phi, double z,
             AngularQuadrature quad = {});

/// f(H(x)).
double vee(const HamiltonianProfile& profile, const LevelFunction& f, Point x);

/// sum_k |v_k|^2 gamma(H(X_k)) h^2 over the interior nodes.
double norm_sq_Hgamma_2d(std::span<const double> values, const Grid2D& grid, const WeightProfile& weight,
                         const HamiltonianProfile& profile);

/// sum_i |v_i|^2 A(ih) gamma(ih) h over the graph nodes.
double norm_sq_L2Agamma_1d(std::span<const double> values, const GraphGrid& grid,
                           const WeightProfile& weight, const HamiltonianProfile& profile);

/// sum_i |v_i|^2 T(ih) gamma(ih) h, the Riemann sum of the nu_gamma norm.
double norm_sq_L2Tgamma_1d(std::span<const double> values, const GraphGrid& grid,
                           const WeightProfile& weight, const HamiltonianProfile& profile);

/// Trapezoid approximation of int_0^{z_max} gamma(z) T(z) dz.
double weighted_period_integral(const WeightProfile& weight, const HamiltonianProfile& profile,
                                double z_max, int n_intervals);

}  // namespace rdag
