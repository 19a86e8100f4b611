#include "rdagraph/hamiltonian.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "rdagraph/errors.hpp"

namespace rdag {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr int kNewtonIterations = 50;
constexpr int kBisectionIterations = 200;

}  // namespace

ZetaProfile::ZetaProfile(Family family) : family_(std::move(family)) {
  std::visit(Overloaded{
                 [this](const ExpDecay& f) {
                   if (!(f.alpha0 > 0.0)) throw std::invalid_argument("ExpDecay: alpha0 must be > 0");
                   r0_ = 0.0;
                   r0_tilde_ = f.alpha0;
                 },
                 [this](const PowerTail& f) {
                   if (!(f.alpha0 > 0.0 && f.alpha0 < 1.0)) {
                     throw std::invalid_argument("PowerTail: alpha0 must lie in (0, 1)");
                   }
                   if (!(f.beta0 > 0.0)) throw std::invalid_argument("PowerTail: beta0 must be > 0");
                   r0_ = 0.0;
                   r0_tilde_ = f.alpha0 * f.beta0;
                 },
                 [this](const CustomZeta& f) {
                   if (!f.value || !f.d1 || !f.d2) {
                     throw std::invalid_argument("CustomZeta: value, d1 and d2 are required");
                   }
                   r0_ = f.r0;
                   r0_tilde_ = f.r0_tilde;
                 },
             },
             family_);
}

double ZetaProfile::value(double z) const {
  return std::visit(
      Overloaded{
          [z](const ExpDecay& f) { return -std::expm1(-f.alpha0 * z); },
          [z](const PowerTail& f) { return f.beta0 * std::expm1(f.alpha0 * std::log1p(z)); },
          [z](const CustomZeta& f) { return f.value(z); },
      },
      family_);
}

double ZetaProfile::d1(double z) const {
  return std::visit(
      Overloaded{
          [z](const ExpDecay& f) { return f.alpha0 * std::exp(-f.alpha0 * z); },
          [z](const PowerTail& f) { return f.beta0 * f.alpha0 * std::pow(1.0 + z, f.alpha0 - 1.0); },
          [z](const CustomZeta& f) { return f.d1(z); },
      },
      family_);
}

double ZetaProfile::d2(double z) const {
  return std::visit(Overloaded{
                        [z](const ExpDecay& f) { return -f.alpha0 * f.alpha0 * std::exp(-f.alpha0 * z); },
                        [z](const PowerTail& f) {
                          return f.beta0 * f.alpha0 * (f.alpha0 - 1.0) * std::pow(1.0 + z, f.alpha0 - 2.0);
                        },
                        [z](const CustomZeta& f) { return f.d2(z); },
                    },
                    family_);
}

std::string ZetaProfile::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{
                 [&os](const ExpDecay& f) { os << "exp_decay(alpha0=" << f.alpha0 << ")"; },
                 [&os](const PowerTail& f) {
                   os << "power_tail(alpha0=" << f.alpha0 << ", beta0=" << f.beta0 << ")";
                 },
                 [&os](const CustomZeta&) { os << "custom"; },
             },
             family_);
  return os.str();
}

HamiltonianProfile::HamiltonianProfile(ZetaProfile zeta, double inversion_tol)
    : zeta_(std::move(zeta)), inversion_tol_(inversion_tol) {
  if (!(inversion_tol_ > 0.0)) throw std::invalid_argument("inversion tolerance must be > 0");
}

double eval_H(const HamiltonianProfile& profile, Point x) {
  const double s = x[0] * x[0] + x[1] * x[1];
  return s + profile.zeta().value(s);
}

Point grad_H(const HamiltonianProfile& profile, Point x) {
  const double s = x[0] * x[0] + x[1] * x[1];
  const double c = 2.0 * (1.0 + profile.zeta().d1(s));
  return {c * x[0], c * x[1]};
}

Point grad_perp_H(const HamiltonianProfile& profile, Point x) {
  const Point g = grad_H(profile, x);
  return {-g[1], g[0]};
}

double laplacian_H(const HamiltonianProfile& profile, Point x) {
  const double s = x[0] * x[0] + x[1] * x[1];
  return 4.0 * (1.0 + profile.zeta().d1(s) + s * profile.zeta().d2(s));
}

double invert_F(const HamiltonianProfile& profile, double z) {
  if (!(z >= 0.0)) throw std::invalid_argument("invert_F: level must be >= 0");
  if (z == 0.0) return 0.0;
  const ZetaProfile& zeta = profile.zeta();
  const double tol = profile.inversion_tol();
  auto residual = [&](double y) { return y + zeta.value(y) - z; };

  double y = z / (1.0 + zeta.d1(0.0));
  for (int it = 0; it < kNewtonIterations; ++it) {
    const double slope = 1.0 + zeta.d1(y);
    if (!(slope > 0.0) || !std::isfinite(slope)) break;
    const double step = residual(y) / slope;
    y -= step;
    if (!std::isfinite(y)) break;
    if (std::abs(step) <= tol * std::abs(y)) return y;
  }

  if (!(zeta.r0() < 1.0)) {
    throw NumericalError("invert_F: Newton failed and no bracket exists (r0 >= 1)");
  }
  double lo = z / (1.0 + zeta.r0_tilde());
  double hi = z / (1.0 - zeta.r0());
  double f_lo = residual(lo);
  double f_hi = residual(hi);
  if (!(f_lo <= 0.0 && f_hi >= 0.0)) {
    throw NumericalError("invert_F: bisection bracket does not enclose a root at z = " +
                         std::to_string(z));
  }
  for (int it = 0; it < kBisectionIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= tol * mid) return mid;
    if (residual(mid) <= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw NumericalError("invert_F: bisection did not converge at z = " + std::to_string(z));
}

LevelCoefficients level_coefficients(const HamiltonianProfile& profile, double z) {
  const ZetaProfile& zeta = profile.zeta();
  LevelCoefficients c;
  c.F = invert_F(profile, z);
  const double one_plus = 1.0 + zeta.d1(c.F);
  const double F_prime = 1.0 / one_plus;
  c.T = std::numbers::pi / one_plus;
  c.A = 2.0 * std::numbers::pi * c.F * one_plus;
  c.A_prime = 2.0 * std::numbers::pi + 2.0 * std::numbers::pi * c.F * zeta.d2(c.F) * F_prime;
  c.alpha = c.A / c.T;
  c.beta = c.A_prime / c.T;
  return c;
}

double period_T(const HamiltonianProfile& profile, double z) {
  return std::numbers::pi / (1.0 + profile.zeta().d1(invert_F(profile, z)));
}

double period_T_prime(const HamiltonianProfile& profile, double z) {
  const double F = invert_F(profile, z);
  const double one_plus = 1.0 + profile.zeta().d1(F);
  return -std::numbers::pi * profile.zeta().d2(F) / (one_plus * one_plus * one_plus);
}

double area_A(const HamiltonianProfile& profile, double z) { return level_coefficients(profile, z).A; }

double area_A_prime(const HamiltonianProfile& profile, double z) {
  return level_coefficients(profile, z).A_prime;
}

double alpha(const HamiltonianProfile& profile, double z) { return level_coefficients(profile, z).alpha; }

double beta(const HamiltonianProfile& profile, double z) { return level_coefficients(profile, z).beta; }

ProfileReport validate_profile(const HamiltonianProfile& profile, double z_max, int n_samples) {
  if (!(z_max > 0.0) || n_samples < 2) {
    throw std::invalid_argument("validate_profile: need z_max > 0 and n_samples >= 2");
  }
  const ZetaProfile& zeta = profile.zeta();
  ProfileReport report;
  auto fail = [&report](double z, std::string why) {
    report.pass = false;
    report.first_violation = z;
    report.reason = std::move(why);
    return report;
  };
  if (!(zeta.r0() >= 0.0 && zeta.r0() < 1.0)) return fail(0.0, "r0 must lie in [0, 1)");
  if (std::abs(zeta.value(0.0)) > 1e-15) return fail(0.0, "zeta(0) != 0");

  int sign = 0;
  for (int i = 0; i < n_samples; ++i) {
    const double z = z_max * i / (n_samples - 1);
    const double d1 = zeta.d1(z);
    if (d1 < -zeta.r0() || d1 > zeta.r0_tilde() || d1 <= -1.0) {
      return fail(z, "zeta' outside [-r0, r0_tilde]");
    }
    const double d2 = zeta.d2(z);
    const int s = (d2 > 0.0) - (d2 < 0.0);
    if (s == 0) return fail(z, "zeta'' vanishes");
    if (sign == 0) sign = s;
    if (s != sign) return fail(z, "zeta'' changes sign");
    double t_prime = 0.0;
    try {
      t_prime = period_T_prime(profile, z);
    } catch (const NumericalError& e) {
      return fail(z, std::string("F inversion failed: ") + e.what());
    }
    if (t_prime == 0.0 || !std::isfinite(t_prime)) return fail(z, "T'(z) vanishes");
  }
  return report;
}

}  // namespace rdag
