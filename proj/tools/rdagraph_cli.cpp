// Command-line entry point for the experiment harnesses.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "rdagraph/errors.hpp"
#include "rdagraph/experiments.hpp"

namespace {

using namespace rdag;

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool desk = false;
  std::optional<int> threads;
  std::string scheme;
};

void add_common_flags(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config_path, "key=value configuration file")->check(CLI::ExistingFile);
  sub->add_option("--seed", f.seed, "master seed");
  sub->add_option("--out", f.out_dir, "output directory");
  sub->add_flag("--desk", f.desk, "reduced Monte Carlo counts");
  sub->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--scheme", f.scheme, "time stepping scheme")->check(CLI::IsMember({"exp-euler", "euler-maruyama"}));
}

ExperimentConfig resolve(ExperimentKind kind, const CommonFlags& f) {
  ExperimentConfig c = ExperimentConfig::defaults_for(kind);
  if (!f.config_path.empty()) c.load_file(f.config_path);
  if (f.seed) c.set("mc.seed", std::to_string(*f.seed));
  if (f.threads) c.set("mc.threads", std::to_string(*f.threads));
  if (!f.scheme.empty()) c.set("scheme", f.scheme);
  if (!f.out_dir.empty()) c.set("output.dir", f.out_dir);
  if (f.desk) c.apply_desk();
  c.validate();
  return c;
}

void print_table(const ErrorTable& t) {
  std::printf("%s\n%-14s %-14s %-14s\n", t.name.c_str(), "label", "error", "std_error");
  for (const auto& r : t.rows) std::printf("%-14.6g %-14.6g %-14.6g\n", r.label, r.error, r.std_error);
}

void report_slope(const ErrorTable& t) {
  if (all_exact(t)) {
    std::printf("all errors below %.0e: exact, no slope fitted\n", kExactFloor);
    return;
  }
  ErrorTable usable = t;
  std::erase_if(usable.rows, [](const ErrorRow& r) { return r.error < kExactFloor; });
  if (usable.rows.size() < 2) {
    std::printf("fewer than two rows above %.0e: no slope fitted\n", kExactFloor);
    return;
  }
  const SlopeFit fit = fit_loglog_slope(usable);
  std::printf("log-log slope %.4f +- %.4f (95%%, %d rows)\n", fit.slope, fit.half_width, fit.rows_used);
}

void emit(const ErrorTable& t, const ExperimentConfig& c, const std::string& stem) {
  const EmittedFiles files = emit_outputs(t, c, stem);
  std::printf("wrote %s\n", files.csv.string().c_str());
}

int run(ExperimentKind kind, const CommonFlags& flags) {
  const ExperimentConfig c = resolve(kind, flags);
  switch (kind) {
    case ExperimentKind::Convergence2d:
    case ExperimentKind::ConvergenceGraph: {
      const ErrorTable t = kind == ExperimentKind::Convergence2d ? run_convergence_2d(c) : run_convergence_graph(c);
      print_table(t);
      report_slope(t);
      emit(t, c, kind == ExperimentKind::Convergence2d ? "convergence_2d" : "convergence_graph");
      return 0;
    }
    case ExperimentKind::Asymptotics: {
      const ErrorTable t = run_asymptotics(c);
      print_table(t);
      if (t.rows.size() >= 2) {
        std::vector<double> x, y;
        for (const auto& r : t.rows) {
          x.push_back(r.label);
          y.push_back(r.error);
        }
        std::printf("spearman(eps, error) %.4f\n", spearman(x, y));
      }
      emit(t, c, "asymptotics");
      return 0;
    }
    case ExperimentKind::ApCompare: {
      const ApCompareResult r = run_ap_compare(c);
      print_table(r.exponential_euler);
      print_table(r.euler_maruyama);
      emit(r.exponential_euler, c, "ap_compare_exp_euler");
      emit(r.euler_maruyama, c, "ap_compare_euler_maruyama");
      return 0;
    }
    case ExperimentKind::KernelTable: {
      const KernelTable t = run_kernel_table(c);
      std::filesystem::create_directories(c.out_dir);
      const auto path = std::filesystem::path(c.out_dir) / "kernel_table.csv";
      std::ofstream out(path, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + path.string());
      out << "rho";
      for (const auto& name : t.columns) out << "," << name;
      out << "\n";
      for (std::size_t i = 0; i < t.rho.size(); ++i) {
        out << format_double(t.rho[i]);
        for (const auto& col : t.values) out << "," << format_double(col[i]);
        out << "\n";
      }
      std::printf("wrote %s\n", path.string().c_str());
      return 0;
    }
    case ExperimentKind::ProfileValidate: {
      const HamiltonianProfile profile = make_profile(c);
      const ProfileReport report = validate_profile(profile, c.z_max, c.n_samples);
      std::printf("%s on [0, %g]: %s\n", profile.zeta().describe().c_str(), c.z_max, report.pass ? "pass" : "FAIL");
      if (!report.pass) {
        std::printf("  %s", report.reason.c_str());
        if (report.first_violation) std::printf(" at z = %.6g", *report.first_violation);
        std::printf("\n");
        return kExitNumerical;
      }
      return 0;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale stochastic RDA experiments"};
  app.require_subcommand(1);
  CommonFlags flags;
  std::optional<ExperimentKind> chosen;
  for (auto kind : {ExperimentKind::Convergence2d, ExperimentKind::ConvergenceGraph, ExperimentKind::Asymptotics,
                    ExperimentKind::ApCompare, ExperimentKind::KernelTable, ExperimentKind::ProfileValidate}) {
    CLI::App* sub = app.add_subcommand(to_string(kind));
    add_common_flags(sub, flags);
    sub->callback([&chosen, kind] { chosen = kind; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  try {
    return run(*chosen, flags);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
