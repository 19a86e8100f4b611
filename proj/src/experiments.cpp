#include "rdagraph/experiments.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "rdagraph/errors.hpp"
#include "rdagraph/graph1d.hpp"
#include "rdagraph/parallel.hpp"
#include "rdagraph/rda2d.hpp"

namespace rdag {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Accepts plain decimals, a/b fractions and 2^k powers.
double parse_real(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  try {
    if (auto caret = v.find('^'); caret != std::string::npos) {
      const double base = std::stod(v.substr(0, caret));
      const double exponent = std::stod(v.substr(caret + 1));
      return std::pow(base, exponent);
    }
    if (auto slash = v.find('/'); slash != std::string::npos) {
      return std::stod(v.substr(0, slash)) / std::stod(v.substr(slash + 1));
    }
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a number, got '" + raw + "'");
  }
}

long parse_integer(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  try {
    std::size_t used = 0;
    const long x = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects an integer, got '" + raw + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: " + key + " expects true or false, got '" + raw + "'");
}

std::string parse_choice(const std::string& key, const std::string& raw, std::initializer_list<const char*> allowed) {
  const std::string v = trim(raw);
  for (const char* a : allowed) {
    if (v == a) return v;
  }
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : "|") + a;
  throw ConfigError("config: " + key + " must be one of " + list + ", got '" + raw + "'");
}

/// "a,b,c" or "start:step:stop".
std::vector<double> parse_list(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  std::vector<double> out;
  if (v.empty()) return out;
  if (v.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(parse_real(key, item));
    if (parts.size() != 3 || !(parts[1] > 0.0)) throw ConfigError("config: " + key + " range must be start:step:stop");
    const long n = std::lround(std::floor((parts[2] - parts[0]) / parts[1] + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(parts[0] + static_cast<double>(i) * parts[1]);
    return out;
  }
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(key, item));
  return out;
}

std::string join_list(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + format_double(xs[i]);
  return s;
}

std::string scheme_name(Scheme s) { return s == Scheme::ExponentialEuler ? "exp-euler" : "euler-maruyama"; }

struct KeySpec {
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define RDAG_REAL(KEY, FIELD)                                                                  \
  KeySpec {                                                                                    \
    KEY, [](ExperimentConfig& c, const std::string& v) { c.FIELD = parse_real(KEY, v); },     \
        [](const ExperimentConfig& c) { return format_double(c.FIELD); }                       \
  }
#define RDAG_INT(KEY, FIELD)                                                                                   \
  KeySpec {                                                                                                    \
    KEY, [](ExperimentConfig& c, const std::string& v) { c.FIELD = static_cast<int>(parse_integer(KEY, v)); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.FIELD); }                                      \
  }
#define RDAG_CHOICE(KEY, FIELD, ...)                                                                     \
  KeySpec {                                                                                              \
    KEY, [](ExperimentConfig& c, const std::string& v) { c.FIELD = parse_choice(KEY, v, {__VA_ARGS__}); }, \
        [](const ExperimentConfig& c) { return c.FIELD; }                                                \
  }

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      RDAG_CHOICE("hamiltonian.family", zeta_family, "exp_decay", "power_tail"),
      RDAG_REAL("hamiltonian.alpha0", zeta_alpha0),
      RDAG_REAL("hamiltonian.beta0", zeta_beta0),
      RDAG_CHOICE("noise.kernel", kernel, "gauss_pi", "heat", "poisson", "riesz", "bessel"),
      RDAG_REAL("noise.r", kernel_r),
      RDAG_CHOICE("weight.family", weight, "exp_sqrt", "one", "power_tail", "exp_tail"),
      RDAG_REAL("weight.c0", weight_c0),
      RDAG_REAL("weight.lambda", weight_lambda),
      RDAG_REAL("weight.z0", weight_z0),
      RDAG_REAL("model.eps", eps),
      RDAG_REAL("model.nu", nu),
      RDAG_CHOICE("model.diffusion", diffusion, "sin", "one", "zero"),
      RDAG_CHOICE("model.reaction", reaction, "zero", "sin"),
      RDAG_CHOICE("model.initial", initial, "exp_neg_H", "zero"),
      RDAG_REAL("grid.L", L),
      RDAG_INT("grid.M", M),
      RDAG_INT("grid.n_theta", n_theta),
      RDAG_REAL("time.T", T),
      RDAG_REAL("time.tau_base", tau_base),
      RDAG_INT("time.level_min", level_min),
      RDAG_INT("time.level_max", level_max),
      RDAG_INT("mc.P", P),
      RDAG_INT("mc.Q", Q),
      KeySpec{"mc.seed",
              [](ExperimentConfig& c, const std::string& v) {
                const std::string t = trim(v);
                try {
                  std::size_t used = 0;
                  c.seed = std::stoull(t, &used);
                  if (used != t.size() || t.front() == '-') throw std::invalid_argument("bad");
                } catch (const std::exception&) {
                  throw ConfigError("config: mc.seed expects an unsigned integer, got '" + v + "'");
                }
              },
              [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
      RDAG_INT("mc.threads", threads),
      RDAG_INT("particle.M1", M1),
      RDAG_INT("particle.M2", M2),
      RDAG_REAL("particle.h", point_h),
      RDAG_REAL("particle.tau", tau_particle),
      KeySpec{"sweep.eps", [](ExperimentConfig& c, const std::string& v) { c.eps_list = parse_list("sweep.eps", v); },
              [](const ExperimentConfig& c) { return join_list(c.eps_list); }},
      RDAG_CHOICE("sweep.mode", mode, "sin_linear", "zero", "nonradial", "radial"),
      RDAG_REAL("graph.L", graph_L),
      RDAG_INT("graph.M", graph_M),
      RDAG_REAL("validate.z_max", z_max),
      RDAG_INT("validate.samples", n_samples),
      KeySpec{"scheme",
              [](ExperimentConfig& c, const std::string& v) {
                c.scheme = parse_choice("scheme", v, {"exp-euler", "euler-maruyama"}) == "exp-euler"
                               ? Scheme::ExponentialEuler
                               : Scheme::EulerMaruyama;
              },
              [](const ExperimentConfig& c) { return scheme_name(c.scheme); }},
      KeySpec{"output.dir", [](ExperimentConfig& c, const std::string& v) { c.out_dir = trim(v); },
              [](const ExperimentConfig& c) { return c.out_dir; }},
      KeySpec{"output.plot", [](ExperimentConfig& c, const std::string& v) { c.plot = parse_bool("output.plot", v); },
              [](const ExperimentConfig& c) { return std::string(c.plot ? "true" : "false"); }},
      KeySpec{"run.desk", [](ExperimentConfig& c, const std::string& v) { c.desk = parse_bool("run.desk", v); },
              [](const ExperimentConfig& c) { return std::string(c.desk ? "true" : "false"); }},
  };
  return table;
}

#undef RDAG_REAL
#undef RDAG_INT
#undef RDAG_CHOICE

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Convergence2d: return "convergence-2d";
    case ExperimentKind::ConvergenceGraph: return "convergence-graph";
    case ExperimentKind::Asymptotics: return "asymptotics";
    case ExperimentKind::ApCompare: return "ap-compare";
    case ExperimentKind::KernelTable: return "kernel-table";
    case ExperimentKind::ProfileValidate: return "validate-profile";
  }
  return "unknown";
}

ExperimentKind parse_kind(const std::string& name) {
  for (auto k : {ExperimentKind::Convergence2d, ExperimentKind::ConvergenceGraph, ExperimentKind::Asymptotics,
                 ExperimentKind::ApCompare, ExperimentKind::KernelTable, ExperimentKind::ProfileValidate}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown experiment kind '" + name + "'");
}

ExperimentConfig ExperimentConfig::defaults_for(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::Convergence2d:
      c.L = 1.0;
      c.M = 5;
      c.P = 500;
      break;
    case ExperimentKind::ConvergenceGraph:
      c.L = 10.0;
      c.M = 100;
      c.P = 1000;
      break;
    case ExperimentKind::Asymptotics:
      c.T = std::ldexp(1.0, -13);
      c.tau_base = std::ldexp(1.0, -18);
      c.P = 5000;
      c.Q = 100;
      c.M1 = 1;
      c.M2 = 5;
      c.point_h = 2.0;
      c.eps_list = parse_list("sweep.eps", "0.02:0.02:0.2");
      c.weight = "one";
      c.initial = "zero";
      c.mode = "sin_linear";
      break;
    case ExperimentKind::ApCompare:
      c.L = 3.0;
      c.M = 12;
      // a unit step gives diffusion time to damp the sheared non-radial part
      c.tau_base = 1.0;
      c.eps_list = {0.01, 0.03, 0.1, 0.3, 1.0};
      c.weight = "one";
      c.initial = "zero";
      c.mode = "nonradial";
      c.graph_L = 20.0;
      c.graph_M = 400;
      break;
    case ExperimentKind::KernelTable:
    case ExperimentKind::ProfileValidate:
      break;
  }
  return c;
}

const std::vector<std::string>& ExperimentConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& k : key_table()) v.push_back(k.key);
    return v;
  }();
  return names;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const std::string k = trim(key);
  for (const auto& spec : key_table()) {
    if (spec.key == k) {
      spec.set(*this, value);
      explicit_keys.insert(k);
      return;
    }
  }
  throw ConfigError("config: unknown key '" + k + "'");
}

void ExperimentConfig::load_text(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    set(line.substr(0, eq), line.substr(eq + 1));
  }
}

void ExperimentConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  load_text(buf.str());
}

void ExperimentConfig::apply_desk() {
  desk = true;
  const auto unset = [this](const char* key) { return explicit_keys.count(key) == 0; };
  switch (kind) {
    case ExperimentKind::Convergence2d:
      if (unset("mc.P")) P = 100;
      break;
    case ExperimentKind::ConvergenceGraph:
      if (unset("mc.P")) P = 200;
      break;
    case ExperimentKind::Asymptotics:
      if (unset("mc.P")) P = 500;
      if (unset("mc.Q")) Q = 20;
      break;
    default:
      break;
  }
}

double ExperimentConfig::tau_at(int level) const { return std::ldexp(tau_base, -level); }

void ExperimentConfig::validate() const {
  const auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("config: " + msg);
  };
  require(zeta_alpha0 > 0.0 && zeta_beta0 > 0.0, "hamiltonian parameters must be positive");
  require(zeta_family != "power_tail" || zeta_alpha0 < 1.0, "power_tail needs alpha0 < 1");
  require(kernel_r > 0.0, "noise.r must be positive");
  require(eps > 0.0 && nu > 0.0, "model.eps and model.nu must be positive");
  require(L > 0.0 && M >= 1, "grid.L > 0 and grid.M >= 1 required");
  require(n_theta >= 4, "grid.n_theta must be >= 4");
  require(P >= 1 && Q >= 1 && threads >= 1, "mc.P, mc.Q, mc.threads must be >= 1");
  require(T > 0.0 && tau_base > 0.0, "time.T and time.tau_base must be positive");
  switch (kind) {
    case ExperimentKind::Convergence2d:
    case ExperimentKind::ConvergenceGraph: {
      require(level_min >= 0 && level_max >= level_min, "need 0 <= time.level_min <= time.level_max");
      require(kind != ExperimentKind::ConvergenceGraph || M >= 2, "graph grid needs grid.M >= 2");
      const double fine = tau_at(level_max + 1);
      const double ratio = T / tau_at(level_min);
      require(std::abs(ratio - std::round(ratio)) < 1e-9 * ratio && std::round(ratio) >= 1.0,
              "time.T must be an integer multiple of every stepsize");
      require(T / fine < 1e9, "too many fine steps");
      break;
    }
    case ExperimentKind::Asymptotics: {
      const double ratio = T / tau_base;
      require(std::abs(ratio - std::round(ratio)) < 1e-9 * ratio && std::round(ratio) >= 1.0,
              "time.T must be an integer multiple of time.tau_base");
      require(mode == "sin_linear" || mode == "zero", "asymptotics needs sweep.mode sin_linear or zero");
      require(M1 >= 1 && M2 >= 1 && point_h > 0.0, "particle.M1, particle.M2 >= 1 and particle.h > 0 required");
      require(mode != "sin_linear" || M1 == 1, "the sin_linear mode defines a single KL term (particle.M1 = 1)");
      require(tau_particle >= 0.0, "particle.tau must be >= 0");
      break;
    }
    case ExperimentKind::ApCompare:
      require(mode == "nonradial" || mode == "radial", "ap-compare needs sweep.mode nonradial or radial");
      require(graph_L > 0.0 && graph_M >= 2, "graph.L > 0 and graph.M >= 2 required");
      break;
    case ExperimentKind::KernelTable:
      break;
    case ExperimentKind::ProfileValidate:
      require(z_max > 0.0 && n_samples >= 2, "validate.z_max > 0 and validate.samples >= 2 required");
      break;
  }
  if (kind == ExperimentKind::Convergence2d || kind == ExperimentKind::ConvergenceGraph ||
      kind == ExperimentKind::ApCompare) {
    bool finite = false;
    try {
      finite = make_kernel(*this).finite_at_origin();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    require(finite, "noise.kernel must be finite at the origin to build a covariance matrix");
  }
  if (kind == ExperimentKind::Asymptotics || kind == ExperimentKind::ApCompare) {
    require(!eps_list.empty(), "sweep.eps must not be empty");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
      require(eps_list[i] > 0.0, "sweep.eps entries must be positive");
      require(i == 0 || eps_list[i] > eps_list[i - 1], "sweep.eps must be strictly increasing");
    }
  }
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& spec : key_table()) out.emplace_back(spec.key, spec.get(*this));
  return out;
}

HamiltonianProfile make_profile(const ExperimentConfig& c) {
  try {
    if (c.zeta_family == "power_tail") return HamiltonianProfile(ZetaProfile::power_tail(c.zeta_alpha0, c.zeta_beta0));
    return HamiltonianProfile(ZetaProfile::exp_decay(c.zeta_alpha0));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

SpectralKernel make_kernel(const ExperimentConfig& c) {
  try {
    if (c.kernel == "heat") return SpectralKernel(HeatKernel{c.kernel_r});
    if (c.kernel == "poisson") return SpectralKernel(PoissonKernel{c.kernel_r});
    if (c.kernel == "riesz") return SpectralKernel(RieszKernel{c.kernel_r});
    if (c.kernel == "bessel") return SpectralKernel(BesselKernel{c.kernel_r});
    return SpectralKernel(GaussPiKernel{});
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

WeightProfile make_weight(const ExperimentConfig& c) {
  if (c.weight == "one") return WeightProfile(ConstOneWeight{});
  if (c.weight == "power_tail") return WeightProfile(PowerTailWeight{c.weight_c0, c.weight_lambda, c.weight_z0});
  if (c.weight == "exp_tail") return WeightProfile(ExpTailWeight{c.weight_c0, c.weight_lambda, c.weight_z0});
  return WeightProfile(ExpSqrtWeight{});
}

ScalarFunction make_diffusion(const ExperimentConfig& c) {
  if (c.diffusion == "sin") return [](double u) { return std::sin(u); };
  if (c.diffusion == "one") return [](double) { return 1.0; };
  return {};
}

ScalarFunction make_reaction(const ExperimentConfig& c) {
  if (c.reaction == "sin") return [](double u) { return std::sin(u); };
  return {};
}

namespace {

/// Shared driver for both solvers: paired runs at consecutive dyadic levels on one
/// coupled Brownian path per sample.
ErrorTable run_convergence(const ExperimentConfig& c, std::size_t dim,
                           const std::function<LinearSdeSystem(double tau)>& build, const Vector& u0,
                           const std::function<double(const Vector&)>& norm_sq, const std::string& name) {
  const int top = c.level_max + 1;
  const double tau_min = c.tau_at(top);
  const long horizon = std::lround(c.T / tau_min);

  std::vector<LinearSdeSystem> systems;
  std::vector<long> steps;
  for (int l = c.level_min; l <= top; ++l) {
    systems.push_back(build(c.tau_at(l)));
    steps.push_back(std::lround(c.T / c.tau_at(l)));
  }
  const std::size_t n_rows = systems.size() - 1;
  const auto P = static_cast<std::size_t>(c.P);

  std::vector<std::vector<double>> sq(n_rows, std::vector<double>(P));
  parallel_for(P, c.threads, [&](std::size_t p) {
    const NoiseStream stream(c.seed, tau_min, dim, horizon, p, StreamDomain::Field);
    // coarse increments must be exact sums of the fine ones they cover
    for (int level = 1; level <= top - c.level_min; ++level) {
      const DenseMatrix fine = stream.all_increments(level - 1);
      const DenseMatrix coarse = stream.all_increments(level);
      for (Eigen::Index n = 0; n < coarse.cols(); ++n) {
        const Vector sum = fine.col(2 * n) + fine.col(2 * n + 1);
        if (!(coarse.col(n).array() == sum.array()).all()) {
          throw NumericalError("dyadic coupling violated at level " + std::to_string(level) + ", sample " +
                               std::to_string(p));
        }
      }
    }
    std::vector<Vector> finals(systems.size());
    for (std::size_t j = 0; j < systems.size(); ++j) {
      const int level = top - (c.level_min + static_cast<int>(j));
      try {
        finals[j] = solve_path(systems[j], u0, stream, level, steps[j], c.scheme).final_state;
      } catch (const NonFiniteState& e) {
        throw NonFiniteState("non-finite state at level " + std::to_string(c.level_min + static_cast<int>(j)) +
                                 ", sample " + std::to_string(p),
                             e.step());
      }
    }
    for (std::size_t r = 0; r < n_rows; ++r) {
      const double e = norm_sq(finals[r + 1] - finals[r]);
      if (!std::isfinite(e)) {
        throw NonFiniteState("non-finite error at level " + std::to_string(c.level_min + static_cast<int>(r)) +
                                 ", sample " + std::to_string(p),
                             steps[r]);
      }
      sq[r][p] = e;
    }
  });

  ErrorTable table;
  table.name = name;
  for (std::size_t r = 0; r < n_rows; ++r) {
    const McEstimate ms = mean_and_std_error(sq[r]);
    ErrorRow row;
    row.label = c.tau_at(c.level_min + static_cast<int>(r));
    row.error = std::sqrt(ms.mean);
    row.std_error = ms.mean > 0.0 ? ms.std_error / (2.0 * row.error) : 0.0;
    table.rows.push_back(row);
    table.notes.emplace_back("row." + std::to_string(r) + ".steps",
                             std::to_string(steps[r]) + "/" + std::to_string(steps[r + 1]));
  }
  table.notes.emplace_back("fine_stepsize", format_double(tau_min));
  return table;
}

}  // namespace

ErrorTable run_convergence_2d(const ExperimentConfig& c) {
  c.validate();
  const Grid2D grid(c.L, c.M);
  const HamiltonianProfile profile = make_profile(c);
  const WeightProfile weight = make_weight(c);
  const Vector u0 = c.initial == "zero" ? Vector(Vector::Zero(static_cast<Eigen::Index>(grid.n_interior())))
                                        : sample_on_grid(grid, [&](Point x) { return std::exp(-eval_H(profile, x)); });
  auto build = [&](double tau) {
    Rda2dOptions o;
    o.grid = grid;
    o.profile = profile;
    o.eps = c.eps;
    o.tau = tau;
    o.nu = c.nu;
    o.kernel = make_kernel(c);
    o.reaction = make_reaction(c);
    o.diffusion = make_diffusion(c);
    return Rda2dSystem(o).sde();
  };
  auto norm = [&](const Vector& v) {
    return norm_sq_Hgamma_2d(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())), grid, weight,
                             profile);
  };
  return run_convergence(c, grid.n_interior(), build, u0, norm, "convergence-2d");
}

ErrorTable run_convergence_graph(const ExperimentConfig& c) {
  c.validate();
  const GraphGrid grid(c.L, c.M);
  const HamiltonianProfile profile = make_profile(c);
  const WeightProfile weight = make_weight(c);
  const Vector u0 = c.initial == "zero" ? Vector(Vector::Zero(c.M))
                                        : sample_on_graph(grid, [](double z) { return std::exp(-z); });
  const AngularQuadrature quad(c.n_theta);
  // the covariance does not depend on tau; assemble it once
  Graph1dOptions base;
  base.grid = grid;
  base.profile = profile;
  base.kernel = make_kernel(c);
  base.quad = quad;
  base.reaction = make_reaction(c);
  base.diffusion = make_diffusion(c);
  const Graph1dSystem reference(base);
  const DenseMatrix root = reference.sde().noise_root();
  const DenseMatrix generator = reference.generator();
  auto build = [&](double tau) {
    return LinearSdeSystem(generator, tau, root, base.reaction, base.diffusion);
  };
  auto norm = [&](const Vector& v) {
    return norm_sq_L2Agamma_1d(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())), grid, weight,
                               profile);
  };
  return run_convergence(c, grid.size(), build, u0, norm, "convergence-graph");
}

namespace {

ParticleConfig particle_config(const ExperimentConfig& c) {
  ParticleConfig pc;
  pc.profile = make_profile(c);
  pc.tau = c.tau_base;
  pc.tau_particle = c.tau_particle;
  pc.N = std::lround(c.T / c.tau_base);
  pc.P = c.P;
  pc.Q_outer = c.Q;
  pc.M2 = c.M2;
  pc.h = c.point_h;
  pc.weight = make_weight(c);
  pc.seed = c.seed;
  pc.threads = c.threads;
  if (c.initial == "exp_neg_H") pc.psi_graph = [](double z) { return std::exp(-z); };
  for (int l = 0; l < c.M1; ++l) {
    if (c.mode == "sin_linear") {
      pc.modes_graph.push_back([](double z) { return 10.0 * std::sin(z) + 6.0 * z; });
    } else {
      pc.modes_graph.push_back([](double) { return 0.0; });
    }
  }
  return pc;
}

}  // namespace

ErrorTable run_asymptotics(const ExperimentConfig& c) {
  c.validate();
  ParticleConfig pc = particle_config(c);
  pc.eps = c.eps_list.front();
  pc.validate();
  // the graph estimator is independent of eps; one evaluation per outer sample
  std::vector<std::vector<double>> barU(static_cast<std::size_t>(pc.Q_outer));
  for (std::size_t q = 0; q < barU.size(); ++q) barU[q] = estimate_barU_points(pc, outer_coefficients(pc, q), q);

  ErrorTable table;
  table.name = "asymptotics";
  for (double eps : c.eps_list) {
    pc.eps = eps;
    const AsymptoticResult r = asymptotic_error(pc, barU);
    table.rows.push_back({eps, r.error.mean, r.error.std_error});
  }
  table.notes.emplace_back("field_steps", std::to_string(pc.N));
  table.notes.emplace_back("particle_stepsize", format_double(pc.particle_step()));
  table.notes.emplace_back("particle_steps", std::to_string(pc.N * pc.substeps()));
  return table;
}

ApCompareResult run_ap_compare(const ExperimentConfig& c) {
  c.validate();
  const Grid2D grid(c.L, c.M);
  const GraphGrid ggrid(c.graph_L, c.graph_M);
  const HamiltonianProfile profile = make_profile(c);
  const WeightProfile weight = make_weight(c);
  const AngularQuadrature quad(c.n_theta);
  const double tau = c.tau_base;

  PlaneFunction mode;
  if (c.mode == "nonradial") {
    mode = [](Point x) { return (1.0 + x[0]) * std::exp(-(x[0] * x[0] + x[1] * x[1])); };
  } else {
    mode = [profile](Point x) { return std::exp(-eval_H(profile, x)); };
  }
  PlaneFunction psi;
  if (c.initial == "exp_neg_H") psi = [profile](Point x) { return std::exp(-eval_H(profile, x)); };

  const Vector m = sample_on_grid(grid, mode);
  const Vector u0 = psi ? sample_on_grid(grid, psi) : Vector(Vector::Zero(m.size()));
  const Vector m_bar = sample_on_graph(ggrid, [&](double z) { return wedge(profile, mode, z, quad); });
  const Vector u0_bar = psi ? sample_on_graph(ggrid, [&](double z) { return wedge(profile, psi, z, quad); })
                            : Vector(Vector::Zero(ggrid.M));

  const DenseMatrix Lbar = assemble_generator_graph(ggrid, profile);
  const DenseMatrix Ebar = matrix_exp(Lbar, tau);
  const Vector ee_graph0 = Ebar * u0_bar;
  const Vector ee_graph1 = Ebar * m_bar;
  const Vector em_graph0 = u0_bar + tau * (Lbar * u0_bar);
  const Vector& em_graph1 = m_bar;

  const std::size_t n = grid.n_interior();
  std::vector<double> levels(n);
  for (std::size_t k = 0; k < n; ++k) levels[k] = eval_H(profile, grid.node(k));
  auto lift = [&](const Vector& g) {
    Vector out(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) out[static_cast<Eigen::Index>(k)] = interpolate_graph(ggrid, g, levels[k]);
    return out;
  };
  auto norm = [&](const Vector& v) {
    return norm_sq_Hgamma_2d(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())), grid, weight,
                             profile);
  };
  const Vector lift_ee0 = lift(ee_graph0), lift_ee1 = lift(ee_graph1);
  const Vector lift_em0 = lift(em_graph0), lift_em1 = lift(em_graph1);

  ApCompareResult out;
  out.exponential_euler.name = "ap-compare-exp-euler";
  out.euler_maruyama.name = "ap-compare-euler-maruyama";
  for (double eps : c.eps_list) {
    const DenseMatrix Lgen = assemble_generator(grid, profile, eps, c.nu);
    const DenseMatrix E = matrix_exp(Lgen, tau);
    // E||D||^2 = ||d0||^2 + tau ||d1||^2 for the one-mode additive increment
    const double ee = norm(E * u0 - lift_ee0) + tau * norm(E * m - lift_ee1);
    const double em = norm(u0 + tau * (Lgen * u0) - lift_em0) + tau * norm(m - lift_em1);
    if (!std::isfinite(ee) || !std::isfinite(em)) throw NonFiniteState("ap-compare: non-finite discrepancy", 1);
    out.exponential_euler.rows.push_back({eps, ee, 0.0});
    out.euler_maruyama.rows.push_back({eps, em, 0.0});
  }
  for (auto* t : {&out.exponential_euler, &out.euler_maruyama}) {
    t->notes.emplace_back("stepsize", format_double(tau));
    t->notes.emplace_back("graph_nodes", std::to_string(ggrid.M));
  }
  return out;
}

KernelTable run_kernel_table(const ExperimentConfig& c) {
  KernelTable t;
  const double r = c.kernel_r;
  std::vector<std::pair<std::string, SpectralKernel::Family>> families = {
      {"gauss_pi", GaussPiKernel{}}, {"heat", HeatKernel{r}}, {"poisson", PoissonKernel{r}},
      {"riesz", RieszKernel{r}},     {"bessel", BesselKernel{r}}};
  for (int i = 0; i <= 12; ++i) t.rho.push_back(0.25 * i);
  for (const auto& [name, family] : families) {
    t.columns.push_back(name);
    std::vector<double> col(t.rho.size(), std::numeric_limits<double>::quiet_NaN());
    try {
      const SpectralKernel k(family);
      for (std::size_t i = 0; i < t.rho.size(); ++i) {
        try {
          col[i] = k.radial(t.rho[i]);
        } catch (const std::domain_error&) {
        }
      }
    } catch (const std::invalid_argument&) {
      // parameter outside the family's range: the whole column stays NaN
    }
    t.values.push_back(std::move(col));
  }
  return t;
}

SlopeFit fit_loglog_slope(const ErrorTable& table) {
  const std::size_t n = table.rows.size();
  if (n < 2) throw std::invalid_argument("fit_loglog_slope: need at least two rows");
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ErrorRow& r = table.rows[i];
    if (!(r.error > 0.0) || !std::isfinite(r.error) || !(r.label > 0.0) || !std::isfinite(r.label)) {
      throw std::invalid_argument("fit_loglog_slope: errors and labels must be positive and finite");
    }
    x[i] = std::log2(r.label);
    y[i] = std::log2(r.error);
  }
  const double xm = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_loglog_slope: labels must not all coincide");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.rows_used = static_cast<int>(n);
  if (n == 2) {
    fit.half_width = std::numeric_limits<double>::infinity();
    return fit;
  }
  double sse = 0.0;
  const double intercept = ym - fit.slope * xm;
  for (std::size_t i = 0; i < n; ++i) {
    const double res = y[i] - (intercept + fit.slope * x[i]);
    sse += res * res;
  }
  const double se = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  const boost::math::students_t dist(static_cast<double>(n - 2));
  fit.half_width = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
  return fit;
}

bool all_exact(const ErrorTable& table) {
  return std::all_of(table.rows.begin(), table.rows.end(), [](const ErrorRow& r) { return r.error < kExactFloor; });
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("spearman: need two equal-length samples");
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_csv(const ErrorTable& table) {
  std::string s = "label,error,std_error\n";
  for (const auto& r : table.rows) {
    s += format_double(r.label) + "," + format_double(r.error) + "," + format_double(r.std_error) + "\n";
  }
  return s;
}

ErrorTable parse_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line) || trim(line) != "label,error,std_error") {
    throw std::runtime_error("parse_csv: missing header label,error,std_error");
  }
  ErrorTable t;
  while (std::getline(ss, line)) {
    if (trim(line).empty()) continue;
    std::stringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c)) {
      throw std::runtime_error("parse_csv: malformed row '" + line + "'");
    }
    t.rows.push_back({std::strtod(a.c_str(), nullptr), std::strtod(b.c_str(), nullptr),
                      std::strtod(c.c_str(), nullptr)});
  }
  return t;
}

ErrorTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string plot_script(const std::string& csv_name, const std::string& title, bool loglog) {
  std::string s;
  s += "import csv\nimport os\nimport matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n";
  s += "here = os.path.dirname(os.path.abspath(__file__))\n";
  s += "with open(os.path.join(here, \"" + csv_name + "\")) as f:\n";
  s += "    rows = list(csv.DictReader(f))\n";
  s += "x = [float(r[\"label\"]) for r in rows]\n";
  s += "y = [float(r[\"error\"]) for r in rows]\n";
  s += "e = [float(r[\"std_error\"]) for r in rows]\n";
  s += "fig, ax = plt.subplots()\n";
  s += "ax.errorbar(x, y, yerr=e, marker=\"o\")\n";
  if (loglog) {
    s += "ax.set_xscale(\"log\", base=2)\nax.set_yscale(\"log\", base=2)\n";
    s += "if x:\n    ax.plot(x, [y[0] * (t / x[0]) ** 0.5 for t in x], \"--\", label=\"slope 1/2\")\n    ax.legend()\n";
  }
  s += "ax.set_title(\"" + title + "\")\n";
  s += "fig.savefig(os.path.join(here, \"" + csv_name.substr(0, csv_name.size() - 4) + ".png\"), dpi=120)\n";
  return s;
}

}  // namespace

EmittedFiles emit_outputs(const ErrorTable& table, const ExperimentConfig& config, const std::string& stem) {
  const std::filesystem::path dir(config.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());

  EmittedFiles files;
  files.csv = dir / (stem + ".csv");
  files.meta = dir / (stem + ".meta");
  write_file(files.csv, format_csv(table));

  std::string meta = "# experiment " + to_string(config.kind) + "\n# table " + table.name + "\n";
  for (const auto& [k, v] : config.echo()) meta += k + "=" + v + "\n";
  for (const auto& [k, v] : table.notes) meta += "# " + k + " " + v + "\n";
  write_file(files.meta, meta);

  if (config.plot) {
    files.plot = dir / (stem + "_plot.py");
    const bool loglog = config.kind == ExperimentKind::Convergence2d || config.kind == ExperimentKind::ConvergenceGraph;
    write_file(files.plot, plot_script(stem + ".csv", table.name, loglog));
  }
  return files;
}

}  // namespace rdag
