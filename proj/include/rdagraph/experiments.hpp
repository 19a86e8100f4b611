#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rdagraph/graph_ops.hpp"
#include "rdagraph/hamiltonian.hpp"
#include "rdagraph/noise.hpp"
#include "rdagraph/particle_mc.hpp"
#include "rdagraph/stepping.hpp"

namespace rdag {

enum class ExperimentKind { Convergence2d, ConvergenceGraph, Asymptotics, ApCompare, KernelTable, ProfileValidate };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);

/// Resolved experiment parameters. Every field has a dotted key (see keys()); defaults
/// depend on the experiment kind.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Convergence2d;

  std::string zeta_family = "exp_decay";  // exp_decay | power_tail
  double zeta_alpha0 = 0.5;
  double zeta_beta0 = 1.0;

  std::string kernel = "gauss_pi";  // gauss_pi | heat | poisson | riesz | bessel
  double kernel_r = 1.0;

  std::string weight = "exp_sqrt";  // exp_sqrt | one | power_tail | exp_tail
  double weight_c0 = 1.0;
  double weight_lambda = 2.0;
  double weight_z0 = 1.0;

  double eps = 1.0;
  double nu = 0.5;
  std::string diffusion = "sin";      // sin | one | zero
  std::string reaction = "zero";      // zero | sin
  std::string initial = "exp_neg_H";  // exp_neg_H | zero

  double L = 1.0;
  int M = 5;
  int n_theta = 256;

  double T = 0.125;
  double tau_base = 1.0 / 64.0;  // tau_l = tau_base 2^{-l}
  int level_min = 1;
  int level_max = 5;

  int P = 500;
  int Q = 100;
  std::uint64_t seed = 20240611;
  int threads = 1;

  int M1 = 1;
  int M2 = 5;
  double point_h = 2.0;
  std::vector<double> eps_list;
  double tau_particle = 0.0;
  std::string mode = "sin_linear";  // sin_linear | zero (asymptotics); nonradial | radial (ap-compare)
  double graph_L = 20.0;
  int graph_M = 200;

  double z_max = 20.0;
  int n_samples = 200;

  Scheme scheme = Scheme::ExponentialEuler;
  std::string out_dir = "out";
  bool plot = true;
  bool desk = false;

  /// Keys explicitly assigned by a config file or flag.
  std::set<std::string> explicit_keys;

  static ExperimentConfig defaults_for(ExperimentKind kind);

  /// Assigns one key. Throws ConfigError for unknown keys or malformed values.
  void set(const std::string& key, const std::string& value);
  /// Reads key=value lines; '#' starts a comment.
  void load_file(const std::filesystem::path& path);
  void load_text(const std::string& text);
  /// Applies the reduced desk-scale Monte Carlo counts to keys not set explicitly.
  void apply_desk();
  /// Throws ConfigError if the parameters are inconsistent.
  void validate() const;

  /// All (key, value) pairs in a fixed order.
  std::vector<std::pair<std::string, std::string>> echo() const;
  static const std::vector<std::string>& keys();

  /// tau_l = tau_base 2^{-l}.
  double tau_at(int level) const;
};

HamiltonianProfile make_profile(const ExperimentConfig& config);
SpectralKernel make_kernel(const ExperimentConfig& config);
WeightProfile make_weight(const ExperimentConfig& config);
ScalarFunction make_diffusion(const ExperimentConfig& config);
ScalarFunction make_reaction(const ExperimentConfig& config);

struct ErrorRow {
  double label = 0.0;
  double error = 0.0;
  double std_error = 0.0;
};

struct ErrorTable {
  std::string name;
  std::vector<ErrorRow> rows;
  /// Extra per-run facts (steps per row, stepsizes) echoed into the sidecar.
  std::vector<std::pair<std::string, std::string>> notes;
};

/// Errors below this are treated as exact and never enter a regression.
inline constexpr double kExactFloor = 1e-8;

ErrorTable run_convergence_2d(const ExperimentConfig& config);
ErrorTable run_convergence_graph(const ExperimentConfig& config);
ErrorTable run_asymptotics(const ExperimentConfig& config);

struct ApCompareResult {
  ErrorTable exponential_euler;
  ErrorTable euler_maruyama;
};
ApCompareResult run_ap_compare(const ExperimentConfig& config);

/// Kernel values on a radius grid; one column per preset.
struct KernelTable {
  std::vector<std::string> columns;
  std::vector<double> rho;
  std::vector<std::vector<double>> values;  // values[column][row]; NaN where singular
};
KernelTable run_kernel_table(const ExperimentConfig& config);

struct SlopeFit {
  double slope = 0.0;
  double half_width = 0.0;  ///< 95% confidence half-width; infinite with two rows
  int rows_used = 0;
};

/// Least-squares slope of log2(error) against log2(label). Throws std::invalid_argument
/// on fewer than two rows or any nonpositive or non-finite error or label.
SlopeFit fit_loglog_slope(const ErrorTable& table);

/// True when every row is below kExactFloor; such tables are reported, not fitted.
bool all_exact(const ErrorTable& table);

/// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

struct EmittedFiles {
  std::filesystem::path csv;
  std::filesystem::path meta;
  std::filesystem::path plot;  ///< empty when not written
};

/// Writes <stem>.csv, <stem>.meta and optionally <stem>_plot.py into config.out_dir.
EmittedFiles emit_outputs(const ErrorTable& table, const ExperimentConfig& config, const std::string& stem);

std::string format_csv(const ErrorTable& table);
ErrorTable parse_csv(const std::string& text);
ErrorTable read_csv(const std::filesystem::path& path);

/// %.17g
std::string format_double(double x);

}  // namespace rdag
