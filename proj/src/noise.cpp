#include "rdagraph/noise.hpp"

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

// Lambda as a function of the squared distance.
double kernel_radial_sq(const SpectralKernel::Family& family, double rho2) {
  using std::numbers::pi;
  return std::visit(
      Overloaded{
          [rho2](const RieszKernel& k) {
            if (rho2 <= 0.0) throw std::domain_error("Riesz kernel is singular at the origin");
            const double c = std::tgamma((2.0 - k.r) / 2.0) / (std::pow(2.0, k.r) * std::tgamma(k.r / 2.0) * pi);
            return c * std::pow(rho2, (k.r - 2.0) / 2.0);
          },
          [rho2](const BesselKernel& k) {
            // (4pi)^{r/2} Gamma(r/2) int_0^inf y^{nu-1} e^{-y} e^{-rho^2/(4y)} dy with nu = r/2 - 1;
            // the integral is Gamma(nu) at rho = 0 and 2 (rho/2)^nu K_nu(rho) otherwise.
            const double nu = k.r / 2.0 - 1.0;
            const double prefactor = std::pow(4.0 * pi, k.r / 2.0) * std::tgamma(k.r / 2.0);
            if (rho2 <= 0.0) {
              if (!(nu > 0.0)) throw std::domain_error("Bessel kernel with r <= 2 is singular at the origin");
              return prefactor * std::tgamma(nu);
            }
            const double rho = std::sqrt(rho2);
            return prefactor * 2.0 * std::pow(rho / 2.0, nu) * std::cyl_bessel_k(std::abs(nu), rho);
          },
          [rho2](const HeatKernel& k) { return std::exp(-rho2 / (2.0 * k.r)) / (2.0 * pi * k.r); },
          [rho2](const PoissonKernel& k) { return k.r / (pi * (rho2 + k.r * k.r)); },
          [rho2](const GaussPiKernel&) { return std::exp(-rho2 / 1.0) / pi; },
      },
      family);
}

void require_finite_kernel(const SpectralKernel& kernel, const char* who) {
  if (!kernel.finite_at_origin()) {
    throw std::domain_error(std::string(who) + ": kernel " + kernel.describe() + " is singular at the origin");
  }
}

}  // namespace

SpectralKernel::SpectralKernel(Family family) : family_(std::move(family)) {
  std::visit(Overloaded{
                 [](const RieszKernel& k) {
                   if (!(k.r > 0.0 && k.r < 2.0)) throw std::invalid_argument("Riesz kernel: r must lie in (0, 2)");
                 },
                 [](const GaussPiKernel&) {},
                 [](const auto& k) {
                   if (!(k.r > 0.0)) throw std::invalid_argument("kernel order r must be > 0");
                 },
             },
             family_);
}

double SpectralKernel::radial(double rho) const { return kernel_radial_sq(family_, rho * rho); }

bool SpectralKernel::finite_at_origin() const {
  return std::visit(Overloaded{
                        [](const RieszKernel&) { return false; },
                        [](const BesselKernel& k) { return k.r > 2.0; },
                        [](const auto&) { return true; },
                    },
                    family_);
}

std::string SpectralKernel::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{
                 [&os](const RieszKernel& k) { os << "riesz(r=" << k.r << ")"; },
                 [&os](const BesselKernel& k) { os << "bessel(r=" << k.r << ")"; },
                 [&os](const HeatKernel& k) { os << "heat(r=" << k.r << ")"; },
                 [&os](const PoissonKernel& k) { os << "poisson(r=" << k.r << ")"; },
                 [&os](const GaussPiKernel&) { os << "gauss_pi"; },
             },
             family_);
  return os.str();
}

double eval_kernel(const SpectralKernel& kernel, Point x) {
  return kernel_radial_sq(kernel.family(), x[0] * x[0] + x[1] * x[1]);
}

DenseMatrix covariance_matrix_2d(const SpectralKernel& kernel, const Grid2D& grid) {
  require_finite_kernel(kernel, "covariance_matrix_2d");
  const auto n = static_cast<Eigen::Index>(grid.n_interior());
  const int s = grid.side();
  const double h = grid.h();
  // Entries depend only on the index offsets; tabulate them once.
  DenseMatrix table(s, s);
  for (int di = 0; di < s; ++di) {
    for (int dj = 0; dj < s; ++dj) {
      const double dx = di * h;
      const double dy = dj * h;
      table(di, dj) = kernel_radial_sq(kernel.family(), dx * dx + dy * dy);
    }
  }
  DenseMatrix F(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const int ik = static_cast<int>(k % s);
    const int jk = static_cast<int>(k / s);
    for (Eigen::Index l = 0; l < n; ++l) {
      const int il = static_cast<int>(l % s);
      const int jl = static_cast<int>(l / s);
      F(k, l) = table(std::abs(ik - il), std::abs(jk - jl));
    }
  }
  return F;
}

double graph_kernel_bar(const SpectralKernel& kernel, const HamiltonianProfile& profile, double z, double y,
                        AngularQuadrature quad) {
  if (!(z >= 0.0 && y >= 0.0)) throw std::invalid_argument("graph_kernel_bar: levels must be >= 0");
  if (quad.n_theta < 4) throw std::invalid_argument("graph_kernel_bar: n_theta must be >= 4");
  const double Fz = invert_F(profile, z);
  const double Fy = invert_F(profile, y);
  const double cross = 2.0 * std::sqrt(Fz * Fy);
  const double dpsi = 2.0 * std::numbers::pi / quad.n_theta;
  double sum = 0.0;
  for (int m = 0; m < quad.n_theta; ++m) {
    const double rho2 = std::max(0.0, Fz + Fy - cross * std::cos(m * dpsi));
    sum += kernel_radial_sq(kernel.family(), rho2);
  }
  return sum / quad.n_theta;
}

DenseMatrix covariance_matrix_graph(const SpectralKernel& kernel, const HamiltonianProfile& profile,
                                    const GraphGrid& grid, AngularQuadrature quad) {
  require_finite_kernel(kernel, "covariance_matrix_graph");
  const int M = grid.M;
  DenseMatrix Q(M, M);
  for (int k = 0; k < M; ++k) {
    for (int l = k; l < M; ++l) {
      Q(k, l) = graph_kernel_bar(kernel, profile, grid.node(k), grid.node(l), quad);
      Q(l, k) = Q(k, l);
    }
  }
  return Q;
}

DenseMatrix psd_sqrt(const DenseMatrix& S, double clip_tol) {
  if (!(clip_tol >= 0.0)) throw std::invalid_argument("psd_sqrt: clip_tol must be >= 0");
  const SymEig eig = sym_eig(S);
  const Eigen::Index n = S.rows();
  if (n == 0) return DenseMatrix(0, 0);
  const double lambda_max = eig.values.maxCoeff();
  Vector roots(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lam = eig.values(i);
    roots(i) = (lambda_max > 0.0 && lam > clip_tol * lambda_max) ? std::sqrt(lam) : 0.0;
  }
  return eig.vectors * roots.asDiagonal() * eig.vectors.transpose();
}

PlaneFunction kl_field_increment(std::vector<PlaneFunction> modes, std::vector<double> coefficients) {
  if (modes.size() != coefficients.size()) {
    throw std::invalid_argument("kl_field_increment: modes and coefficients differ in length");
  }
  return [modes = std::move(modes), coefficients = std::move(coefficients)](Point x) {
    double sum = 0.0;
    for (std::size_t l = 0; l < modes.size(); ++l) {
      if (coefficients[l] != 0.0) sum += modes[l](x) * coefficients[l];
    }
    return sum;
  };
}

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

NoiseStream::NoiseStream(std::uint64_t seed, double tau_min, std::size_t dim, long horizon_fine_steps,
                         std::uint64_t path_index, StreamDomain domain)
    : seed_(seed), tau_min_(tau_min), dim_(dim), horizon_(horizon_fine_steps), path_(path_index), domain_(domain) {
  if (!(tau_min > 0.0)) throw std::invalid_argument("NoiseStream: tau_min must be > 0");
  if (horizon_fine_steps < 1 || horizon_fine_steps > 0xFFFFFFFFL) {
    throw std::invalid_argument("NoiseStream: horizon must be in [1, 2^32)");
  }
  if (path_index >= (std::uint64_t{1} << 56)) throw std::invalid_argument("NoiseStream: path index too large");
}

double NoiseStream::standard_normal(long fine_step, std::size_t component) const {
  if (component >= dim_) throw std::out_of_range("NoiseStream: component outside the stream dimension");
  return normal_pair(fine_step, component / 2)[component % 2];
}

std::array<double, 2> NoiseStream::normal_pair(long fine_step, std::size_t pair) const {
  if (fine_step < 0 || fine_step >= horizon_ || 2 * pair >= dim_) {
    throw std::out_of_range("NoiseStream: address outside the stream horizon");
  }
  const Philox4x32::Counter ctr = {
      static_cast<std::uint32_t>(pair), static_cast<std::uint32_t>(fine_step),
      static_cast<std::uint32_t>(path_),
      static_cast<std::uint32_t>((path_ >> 32) & 0xFFFFFFu) | (static_cast<std::uint32_t>(domain_) << 24)};
  const Philox4x32::Key key = {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
  const Philox4x32::Counter bits = Philox4x32::generate(ctr, key);
  constexpr double kTwoPow53 = 9007199254740992.0;
  const std::uint64_t a = (static_cast<std::uint64_t>(bits[0]) << 32 | bits[1]) >> 11;
  const std::uint64_t b = (static_cast<std::uint64_t>(bits[2]) << 32 | bits[3]) >> 11;
  const double u1 = (static_cast<double>(a) + 0.5) / kTwoPow53;
  const double u2 = (static_cast<double>(b) + 0.5) / kTwoPow53;
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

void NoiseStream::check_level(int level) const {
  if (level < 0 || level > 31 || (horizon_ % (1L << level)) != 0) {
    throw std::out_of_range("NoiseStream: level " + std::to_string(level) + " does not divide the horizon");
  }
}

Vector NoiseStream::sample_increments(int level, long n) const {
  check_level(level);
  if (n < 0 || (n + 1) * (1L << level) > horizon_) {
    throw std::out_of_range("NoiseStream: step index outside the stream horizon");
  }
  if (level == 0) {
    Vector v(static_cast<Eigen::Index>(dim_));
    const double scale = std::sqrt(tau_min_);
    for (std::size_t c = 0; c < dim_; ++c) v(static_cast<Eigen::Index>(c)) = scale * standard_normal(n, c);
    return v;
  }
  return sample_increments(level - 1, 2 * n) + sample_increments(level - 1, 2 * n + 1);
}

DenseMatrix NoiseStream::all_increments(int level) const {
  check_level(level);
  const auto d = static_cast<Eigen::Index>(dim_);
  DenseMatrix current(d, horizon_);
  const double scale = std::sqrt(tau_min_);
  for (long n = 0; n < horizon_; ++n) {
    for (Eigen::Index c = 0; c < d; ++c) current(c, n) = scale * standard_normal(n, static_cast<std::size_t>(c));
  }
  for (int m = 1; m <= level; ++m) {
    const Eigen::Index cols = current.cols() / 2;
    DenseMatrix next(d, cols);
    for (Eigen::Index n = 0; n < cols; ++n) next.col(n) = current.col(2 * n) + current.col(2 * n + 1);
    current = std::move(next);
  }
  return current;
}

}  // namespace rdag
