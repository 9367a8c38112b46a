#pragma once

#include <cstdint>
#include <string>

#include "degctrl/io.hpp"
#include "degctrl/strategy.hpp"

namespace degctrl {

/// Exit codes shared by the pipelines and the CLI (documented in --help).
enum ExitCode : int {
  exit_ok = 0,
  exit_monitor_failed = 1, // a configured acceptance monitor failed
  exit_config = 2,
  exit_weights = 3,
  exit_kernel = 4,
  exit_convergence = 5,
  exit_geometry = 6,
  exit_io = 7,
};

int exit_code_for(const Error& e);

/// Everything a pipeline needs, resolved from a flat config ("auto" entries
/// filled from the module defaults).
struct ResolvedRun {
  Config echo;
  DiffusionCoefficient a;
  Grid grid;
  BoundaryCondition bc;
  CarlemanWeights weights;
  GammaMode mode = GammaMode::fixed_point;
  PenaltyConfig penalty;
  FixedPointConfig fixed_point;
  Real omega_left = 0.3, omega_right = 0.6;
  KernelSpec kernel;
  bool kernel_configured = false;
  std::vector<Real> epsilons;
  std::uint64_t seed = 42;
  bool override_kernel_check = false;
  Real L = 2.0;
  int p = 4;
  std::vector<Real> y0;
};

ResolvedRun resolve_run(const Config& cfg, const std::string& base_dir = ".");

int run_check_weights(const Config& cfg, const std::string& out_dir);
int run_control(const Config& cfg, const std::string& out_dir);
int run_memory(const Config& cfg, const std::string& out_dir);
int run_two_phase(const Config& cfg, const std::string& out_dir);
int run_glue(const Config& cfg, const std::string& out_dir);
int run_monitor(const Config& cfg, const std::string& out_dir);
int run_sweep(const Config& cfg, const std::string& out_dir);

/// Dispatch by subcommand name; maps Error kinds to exit codes and reports
/// the diagnostic on stderr.
int run_pipeline(const std::string& name, const Config& cfg, const std::string& out_dir);

} // namespace degctrl
