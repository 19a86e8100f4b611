#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>

#include "rdagraph/grids.hpp"

namespace rdag {

/// zeta(z) = 1 - exp(-alpha0 z), alpha0 > 0.
struct ExpDecay {
  double alpha0 = 0.5;
};

/// zeta(z) = beta0 (1+z)^alpha0 - beta0, alpha0 in (0,1), beta0 > 0.
struct PowerTail {
  double alpha0 = 0.5;
  double beta0 = 1.0;
};

/// Caller-supplied zeta with its first two derivatives and the bounds
/// -r0 <= zeta' <= r0_tilde. Nothing is checked beyond zeta(0) = 0; this is the
/// hook for probing profiles that break the standing assumptions.
struct CustomZeta {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  double r0 = 0.0;
  double r0_tilde = 1.0;
};

class ZetaProfile {
 public:
  using Family = std::variant<ExpDecay, PowerTail, CustomZeta>;

  explicit ZetaProfile(Family family);

  static ZetaProfile exp_decay(double alpha0) { return ZetaProfile(ExpDecay{alpha0}); }
  static ZetaProfile power_tail(double alpha0, double beta0) {
    return ZetaProfile(PowerTail{alpha0, beta0});
  }

  double value(double z) const;
  double d1(double z) const;
  double d2(double z) const;

  /// Lower/upper bounds of zeta': -r0 <= zeta'(z) <= r0_tilde.
  double r0() const { return r0_; }
  double r0_tilde() const { return r0_tilde_; }

  const Family& family() const { return family_; }
  std::string describe() const;

 private:
  Family family_;
  double r0_ = 0.0;
  double r0_tilde_ = 0.0;
};

/// H(x) = |x|^2 + zeta(|x|^2) together with the inverse level map F = (Id + zeta)^{-1}.
class HamiltonianProfile {
 public:
  explicit HamiltonianProfile(ZetaProfile zeta, double inversion_tol = 1e-14);

  const ZetaProfile& zeta() const { return zeta_; }
  double inversion_tol() const { return inversion_tol_; }
  /// Both built-in presets admit closed-form inverses (used only as test oracles).
  bool has_closed_form_F() const { return !std::holds_alternative<CustomZeta>(zeta_.family()); }

 private:
  ZetaProfile zeta_;
  double inversion_tol_;
};

double eval_H(const HamiltonianProfile& profile, Point x);
Point grad_H(const HamiltonianProfile& profile, Point x);
/// (-d2 H, d1 H).
Point grad_perp_H(const HamiltonianProfile& profile, Point x);
/// Laplacian of H, 4(1 + zeta'(|x|^2) + |x|^2 zeta''(|x|^2)).
double laplacian_H(const HamiltonianProfile& profile, Point x);

/// Unique y >= 0 with y + zeta(y) = z. Newton from z/(1+zeta'(0)); bisection on the
/// bracket [z/(1+r0_tilde), z/(1-r0)] after 50 Newton iterations.
/// Throws NumericalError if neither converges.
double invert_F(const HamiltonianProfile& profile, double z);

/// Period of the rotation on the level set {H = z}: pi / (1 + zeta'(F(z))).
double period_T(const HamiltonianProfile& profile, double z);
/// -pi zeta''(F) / (1 + zeta'(F))^3.
double period_T_prime(const HamiltonianProfile& profile, double z);
/// A(z) = 2 pi F(z) (1 + zeta'(F(z))).
double area_A(const HamiltonianProfile& profile, double z);
/// A'(z) = 2 pi + 2 pi F zeta''(F) F', with F' = 1 / (1 + zeta'(F)).
double area_A_prime(const HamiltonianProfile& profile, double z);
/// Diffusion coefficient A/T of the limiting generator.
double alpha(const HamiltonianProfile& profile, double z);
/// Drift coefficient A'/T of the limiting generator.
double beta(const HamiltonianProfile& profile, double z);

/// Everything derived from a single F inversion at level z.
struct LevelCoefficients {
  double F = 0.0;
  double T = 0.0;
  double A = 0.0;
  double A_prime = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};
LevelCoefficients level_coefficients(const HamiltonianProfile& profile, double z);

struct ProfileReport {
  bool pass = true;
  std::optional<double> first_violation;
  std::string reason;
};

/// Samples z on [0, z_max] and checks the zeta' bounds (with r0 < 1), that zeta'' keeps
/// one strict sign, and that T'(z) != 0. Violations are reported, never thrown.
ProfileReport validate_profile(const HamiltonianProfile& profile, double z_max, int n_samples);

}  // namespace rdag
