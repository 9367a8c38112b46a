// Command-line driver for the degenerate-parabolic control pipelines.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "degctrl/pipelines.hpp"

namespace {

const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success, all configured monitors passed\n"
    "  1  a monitor or inequality check failed\n"
    "  2  config parse/validation error\n"
    "  3  weight admissibility violated (gamma/d window)\n"
    "  4  memory kernel inadmissible\n"
    "  5  CG or Picard non-convergence\n"
    "  6  gluing geometry error\n"
    "  7  file I/O error\n";

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"degctrl: null-control synthesis lab for 1-D degenerate heat equations with memory"};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  bool override_kernel = false;

  const std::vector<std::string> names = {"check-weights", "control", "memory",
                                          "two-phase",     "glue",    "monitor", "sweep"};
  const std::vector<std::string> blurbs = {
      "verify every weight inequality on a tensor grid",
      "penalized control synthesis over an epsilon schedule",
      "fixed-point solve of the memory system",
      "two-phase control for L^2 initial data",
      "cutoff gluing for doubly degenerate coefficients",
      "empirical Carleman constants from random adjoint samples",
      "one-parameter sweep of the control synthesis"};

  for (std::size_t i = 0; i < names.size(); ++i) {
    CLI::App* sub = app.add_subcommand(names[i], blurbs[i]);
    sub->add_option("--config", config_path, "flat key = value config file")->required();
    sub->add_option("--out", out_dir, "output directory (default runs/<subcommand>)");
    sub->add_option("--seed", seed, "override run.seed");
    sub->add_flag("--override-kernel-check", override_kernel,
                  "run the memory pipeline even when the kernel fails the decay hypothesis");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string name = app.get_subcommands().front()->get_name();

  degctrl::Config cfg;
  try {
    cfg = degctrl::Config::from_file(config_path);
  } catch (const degctrl::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return degctrl::exit_code_for(e);
  }
  if (seed >= 0) cfg.set("run.seed", std::to_string(seed));
  if (override_kernel) cfg.set("run.override_kernel_check", "true");
  if (out_dir.empty()) out_dir = cfg.get("run.out", "runs/" + name);

  return degctrl::run_pipeline(name, cfg, out_dir);
}
