#include "degctrl/pipelines.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

namespace degctrl {

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::weight_admissibility:
    case ErrorKind::empty_window:
      return exit_weights;
    case ErrorKind::kernel_inadmissible:
      return exit_kernel;
    case ErrorKind::convergence:
    case ErrorKind::radius:
      return exit_convergence;
    case ErrorKind::geometry:
      return exit_geometry;
    case ErrorKind::io:
      return exit_io;
    default:
      return exit_config;
  }
}

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

std::vector<Real> initial_data(const Config& cfg, const Grid& g, std::uint64_t seed) {
  const std::string kind = cfg.get("initial.kind", "bump");
  const Real amp = cfg.get_real("initial.amplitude", 1.0);
  std::vector<Real> y0(static_cast<std::size_t>(g.N) + 2, 0.0);
  if (kind == "bump") {
    const Real len = g.x_hi - g.x_lo;
    for (int i = 1; i <= g.N; ++i) {
      const Real xi = (g.x[static_cast<std::size_t>(i)] - g.x_lo) / len;
      y0[static_cast<std::size_t>(i)] = amp * xi * (1.0 - xi);
    }
  } else if (kind == "sine") {
    const int mode = cfg.get_int("initial.mode", 1);
    const Real len = g.x_hi - g.x_lo;
    for (int i = 1; i <= g.N; ++i) {
      const Real xi = (g.x[static_cast<std::size_t>(i)] - g.x_lo) / len;
      y0[static_cast<std::size_t>(i)] = amp * std::sin(mode * M_PI * xi);
    }
  } else if (kind == "random") {
    SmoothFieldGen gen(seed);
    RealFn f = gen.sample(g.x_lo, g.x_hi);
    for (int i = 1; i <= g.N; ++i) y0[static_cast<std::size_t>(i)] = amp * f(g.x[static_cast<std::size_t>(i)]);
  } else {
    fail(ErrorKind::configuration, "initial.kind must be bump|sine|random, got '" + kind + "'");
  }
  return y0;
}

void write_control_table(const std::string& path, const std::vector<std::vector<Real>>& u,
                         const Grid& g) {
  TableWriter t(path, {"t", "x", "u"}, {"control field"});
  for (int n = 0; n <= g.M; ++n)
    for (int i = 0; i <= g.N + 1; ++i)
      t.row({g.t[static_cast<std::size_t>(n)], g.x[static_cast<std::size_t>(i)],
             u[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)]});
}

RunManifest start_manifest(const std::string& pipeline, const Config& cfg) {
  RunManifest m;
  m.pipeline = pipeline;
  m.config_echo = cfg.entries();
  return m;
}

} // namespace

ResolvedRun resolve_run(const Config& cfg, const std::string& base_dir) {
  ResolvedRun r;
  r.echo = cfg;
  r.a = coefficient_from_record(cfg.section("coefficient"), base_dir);

  const int N = cfg.get_int("grid.N", 100);
  const int M = cfg.get_int("grid.M", 200);
  const Real T = cfg.get_real("time.T", 1.0);
  r.grid = make_grid(r.a, N, M, T);
  r.bc = default_bc(r.a);

  r.omega_left = cfg.get_real("omega.left", 0.3);
  r.omega_right = cfg.get_real("omega.right", 0.6);
  if (!(r.omega_left < r.omega_right))
    fail(ErrorKind::configuration, "omega.left must be < omega.right");

  r.p = cfg.get_int("weights.p", 4);
  r.L = cfg.get_real("weights.L", 2.0);
  const std::string mode_s = cfg.get("weights.mode", "fixed_point");
  if (mode_s == "fixed_point") r.mode = GammaMode::fixed_point;
  else if (mode_s == "carleman_only") r.mode = GammaMode::carleman_only;
  else fail(ErrorKind::configuration, "weights.mode must be fixed_point|carleman_only");

  r.seed = static_cast<std::uint64_t>(cfg.get_int("run.seed", 42));

  // Double degeneracy has no single global weight; the glue pipeline builds
  // per-side weights itself.
  if (r.a.degeneracy_side != Side::both) {
    const Real dstar = d_star(r.a, r.grid.x_lo, r.grid.x_hi);
    auto [gamma_auto, d_auto] = choose_gamma_d(dstar, r.L, r.mode);
    const Real gamma = cfg.get_auto("weights.gamma").value_or(gamma_auto);
    const Real d = cfg.get_auto("weights.d").value_or(d_auto);
    const Real omega_center = 0.5 * (r.omega_left + r.omega_right);
    r.weights = build_weights(T, r.a, gamma, d, r.L, r.p, r.grid.x, omega_center);
  }

  r.penalty.k = cfg.get_real("penalty.k", 1.0);
  r.penalty.s = cfg.get_auto("penalty.s").value_or(0.0); // 0 -> default_s at use site
  if (r.penalty.s <= 0.0 && r.a.degeneracy_side != Side::both)
    r.penalty.s = default_s(r.weights);
  r.penalty.epsilon = cfg.get_real("penalty.epsilon", 1e-6);
  r.penalty.cg_tol = cfg.get_real("penalty.cg_tol", 1e-10);
  r.penalty.cg_max_iters = cfg.get_int("penalty.cg_max_iters", 2000);
  r.penalty.clamp = cfg.get_real("penalty.clamp", 12.0);
  r.penalty.include_state_term = cfg.get_bool("penalty.include_state_term", true);
  r.epsilons = cfg.get_list("penalty.epsilons", {1e-2, 1e-4, 1e-6, 1e-8});

  r.fixed_point.R = cfg.get_auto("fixedpoint.R").value_or(0.0);
  r.fixed_point.max_iters = cfg.get_int("fixedpoint.max_iters", 20);
  r.fixed_point.picard_tol = cfg.get_real("fixedpoint.picard_tol", 1e-6);
  r.fixed_point.theta_relax = cfg.get_real("fixedpoint.theta_relax", 1.0);

  const std::string kind = cfg.get("kernel.kind", "none");
  r.kernel_configured = kind != "none";
  if (kind == "none") {
    r.kernel = zero_kernel();
  } else if (kind == "constant") {
    r.kernel = constant_kernel(cfg.get_real("kernel.c", 1.0));
  } else if (kind == "decaying" || kind == "scaled_decaying") {
    const Real c = cfg.get_real("kernel.c", 1.0);
    Real Mdec;
    if (auto v = cfg.get_auto("kernel.M"); v.has_value()) {
      Mdec = *v;
    } else {
      // the decay that meets the admissibility hypothesis with margin
      if (r.a.degeneracy_side == Side::both)
        fail(ErrorKind::configuration, "kernel.M = auto needs a one-sided coefficient");
      Mdec = 2.0 * std::pow(4.0 / T, r.p) * r.penalty.s * r.weights.gamma * r.weights.d;
    }
    r.kernel = kind == "decaying" ? decaying_kernel(c, Mdec, r.p, T)
                                  : scaled_decaying_kernel(c, Mdec, r.p, T);
  } else {
    fail(ErrorKind::configuration,
         "kernel.kind must be none|constant|decaying|scaled_decaying, got '" + kind + "'");
  }

  r.override_kernel_check = cfg.get_bool("run.override_kernel_check", false);
  r.y0 = initial_data(cfg, r.grid, r.seed);
  return r;
}

int run_check_weights(const Config& cfg, const std::string& out_dir) {
  Timer timer;
  ResolvedRun r = resolve_run(cfg);
  RunManifest m = start_manifest("check-weights", cfg);

  auto reports = verify_weight_inequalities(r.weights, r.grid.x, r.grid.t);
  {
    TableWriter t(out_dir + "/weight_report.txt",
                  {"inequality", "max_violation", "passed", "witness_t", "witness_x"},
                  {"weight inequality report",
                   "gamma " + format_real(r.weights.gamma) + " d " + format_real(r.weights.d) +
                       " L " + format_real(r.L) + " p " + std::to_string(r.p)});
    for (const auto& rep : reports)
      t.row_mixed({rep.inequality_id, format_real(rep.max_violation), rep.passed ? "1" : "0",
                   format_real(rep.witness_t), format_real(rep.witness_x)});
  }
  write_weight_dump(out_dir + "/weights_dump.txt", r.weights, r.grid.x, r.grid.t);
  m.outputs = {"weight_report.txt", "weights_dump.txt"};

  bool all_passed = true;
  for (const auto& rep : reports) all_passed = all_passed && rep.passed;
  m.stages.emplace_back("verify", all_passed ? "passed" : "failed");
  m.wall_seconds = timer.seconds();
  m.write(out_dir + "/manifest.txt");
  return all_passed ? exit_ok : exit_monitor_failed;
}

int run_control(const Config& cfg, const std::string& out_dir) {
  Timer timer;
  ResolvedRun r = resolve_run(cfg);
  RunManifest m = start_manifest("control", cfg);

  if (r.kernel_configured)
    std::fprintf(stderr, "warning: control subcommand ignores the configured kernel\n");

  SourceSpec f_src; // no distributed source in this pipeline
  TableWriter sweep(out_dir + "/sweep.txt", {"epsilon", "terminal_norm", "J", "cg_iters", "status"},
                    {"penalty sweep", "seed " + std::to_string(r.seed)});
  m.outputs.push_back("sweep.txt");

  bool all_ok = true;
  bool monotone = true;
  Real prev_terminal = -1.0;
  std::vector<std::vector<Real>> warm;
  ControlResult last;
  bool have_last = false;
  for (std::size_t i = 0; i < r.epsilons.size(); ++i) {
    PenaltyConfig pen = r.penalty;
    pen.epsilon = r.epsilons[i];
    try {
      ControlResult res =
          synthesize_control(r.y0, f_src, r.grid, r.bc, r.weights, pen, r.omega_left,
                             r.omega_right, warm.empty() ? nullptr : &warm);
      sweep.row_mixed({format_real(pen.epsilon), format_real(res.terminal_norm),
                       format_real(res.weighted_cost), std::to_string(res.cg_iterations), "ok"});
      write_cg_history(out_dir + "/convergence_" + std::to_string(i) + ".txt", res.history);
      m.outputs.push_back("convergence_" + std::to_string(i) + ".txt");
      if (prev_terminal >= 0.0 && res.terminal_norm > prev_terminal * (1.0 + 1e-9))
        monotone = false;
      prev_terminal = res.terminal_norm;
      warm = res.u;
      last = std::move(res);
      have_last = true;
    } catch (const ConvergenceError& e) {
      sweep.row_mixed({format_real(pen.epsilon), "nan", "nan",
                       std::to_string(e.history().size()), "cg-failed"});
      all_ok = false;
    }
  }

  if (have_last) {
    write_trajectory(out_dir + "/trajectory_final.txt", last.y);
    write_control_table(out_dir + "/control_final.txt", last.u, r.grid);
    write_kv_report(out_dir + "/estimate.txt",
                    {{"estimate_ratio", format_real(last.estimate_ratio)},
                     {"s", format_real(last.s_used)},
                     {"k", format_real(r.penalty.k)}},
                    "empirical control estimate constant");
    m.outputs.push_back("trajectory_final.txt");
    m.outputs.push_back("control_final.txt");
    m.outputs.push_back("estimate.txt");
  }

  m.stages.emplace_back("sweep", all_ok ? "ok" : "cg-failures");
  m.stages.emplace_back("terminal-monotone", monotone ? "passed" : "failed");
  m.wall_seconds = timer.seconds();
  m.write(out_dir + "/manifest.txt");
  return (all_ok && monotone) ? exit_ok : exit_monitor_failed;
}

int run_memory(const Config& cfg, const std::string& out_dir) {
  Timer timer;
  ResolvedRun r = resolve_run(cfg);
  RunManifest m = start_manifest("memory", cfg);

  AdmissibilityReport adm = kernel_admissible(r.kernel, r.weights, r.penalty.s, r.penalty.k, r.grid);
  write_kv_report(out_dir + "/admissibility.txt",
                  {{"passed", adm.passed ? "1" : "0"},
                   {"margin", format_real(adm.margin)},
                   {"sup_log_G", format_real(adm.sup_log_G)},
                   {"refinement_ok", adm.refinement_ok ? "1" : "0"},
                   {"kernel", r.kernel.description.empty() ? "zero" : r.kernel.description}},
                  "kernel admissibility report");
  m.outputs.push_back("admissibility.txt");

  if (!adm.passed && !r.override_kernel_check) {
    m.stages.emplace_back("admissibility", "failed");
    m.wall_seconds = timer.seconds();
    m.write(out_dir + "/manifest.txt");
    std::fprintf(stderr, "kernel inadmissible (margin %g); no solve attempted "
                         "(use --override-kernel-check to explore)\n",
                 adm.margin);
    return exit_kernel;
  }
  m.stages.emplace_back("admissibility", adm.passed ? "passed" : "overridden");

  FixedPointResult res;
  try {
    res = fixed_point_solve(r.y0, r.kernel, r.grid, r.bc, r.weights, r.penalty, r.fixed_point,
                            r.omega_left, r.omega_right);
  } catch (const PicardError& e) {
    write_picard_history(out_dir + "/iterations.txt", e.history());
    m.outputs.push_back("iterations.txt");
    m.stages.emplace_back("picard", "failed");
    m.wall_seconds = timer.seconds();
    m.write(out_dir + "/manifest.txt");
    std::fprintf(stderr, "%s\n", e.what());
    return exit_code_for(e);
  }

  write_picard_history(out_dir + "/iterations.txt", res.history);
  write_trajectory(out_dir + "/trajectory_final.txt", res.control.y);
  write_control_table(out_dir + "/control_final.txt", res.control.u, r.grid);

  SmallnessReport small = smallness_condition(res.control.s_used, r.penalty.k, r.weights.gamma,
                                              r.weights.d_star_value, r.grid.T, r.p,
                                              res.control.estimate_ratio);
  write_kv_report(out_dir + "/smallness.txt",
                  {{"holds", small.holds ? "1" : "0"},
                   {"lhs", format_real(small.lhs)},
                   {"C_emp", format_real(res.control.estimate_ratio)},
                   {"advisory", "1"}},
                  "fixed-point smallness condition (advisory)");
  m.outputs.insert(m.outputs.end(),
                   {"iterations.txt", "trajectory_final.txt", "control_final.txt", "smallness.txt"});
  m.stages.emplace_back("picard", "converged");
  m.wall_seconds = timer.seconds();
  m.write(out_dir + "/manifest.txt");
  return exit_ok;
}

int run_two_phase(const Config& cfg, const std::string& out_dir) {
  Timer timer;
  ResolvedRun r = resolve_run(cfg);
  RunManifest m = start_manifest("two-phase", cfg);

  StrategyConfig sc;
  sc.L = r.L;
  sc.p = r.p;
  sc.penalty = r.penalty;
  sc.fixed_point = r.fixed_point;
  sc.override_kernel_check = r.override_kernel_check;

  TwoPhasePlan plan = two_phase_control(r.y0, r.kernel, r.a, r.grid, r.omega_left, r.omega_right, sc);

  write_kv_report(out_dir + "/plan.txt",
                  {{"t_star", format_real(plan.t_star)},
                   {"t_star_index", std::to_string(plan.t_star_index)},
                   {"picard_iterations", std::to_string(plan.phase2.iterations)},
                   {"picard_residual", format_real(plan.phase2.final_residual)},
                   {"terminal_norm", format_real(plan.terminal_norm)}},
                  "two-phase plan");
  write_picard_history(out_dir + "/iterations.txt", plan.phase2.history);
  write_trajectory(out_dir + "/trajectory_composite.txt", plan.composite);
  write_control_table(out_dir + "/control_composite.txt", plan.composite_u, r.grid);
  m.outputs = {"plan.txt", "iterations.txt", "trajectory_composite.txt", "control_composite.txt"};
  m.stages.emplace_back("two-phase", "ok");
  m.wall_seconds = timer.seconds();
  m.write(out_dir + "/manifest.txt");
  return exit_ok;
}

int run_glue(const Config& cfg, const std::string& out_dir) {
  Timer timer;
  ResolvedRun r = resolve_run(cfg);
  RunManifest m = start_manifest("glue", cfg);

  StrategyConfig sc;
  sc.L = r.L;
  sc.p = r.p;
  sc.penalty = r.penalty;
  sc.fixed_point = r.fixed_point;
  sc.override_kernel_check = r.override_kernel_check;

  GluePlan plan = glue_double_degenerate(r.y0, r.a, r.grid, r.omega_left, r.omega_right, sc,
                                         r.kernel);

  write_kv_report(out_dir + "/plan.txt",
                  {{"lambda_p", format_real(plan.lambda_p)},
                   {"beta_p", format_real(plan.beta_p)},
                   {"lambda_pp", format_real(plan.lambda_pp)},
                   {"beta_pp", format_real(plan.beta_pp)},
                   {"left_t_star", format_real(plan.left.t_star)},
                   {"right_t_star", format_real(plan.right.t_star)},
                   {"composite_residual", format_real(plan.composite_residual)},
                   {"direct_residual", format_real(plan.direct_residual)},
                   {"terminal_norm", format_real(plan.terminal_norm)}},
                  "gluing plan");
  write_trajectory(out_dir + "/trajectory_composite.txt", plan.composite);
  write_control_table(out_dir + "/control_composite.txt", plan.composite_u, r.grid);
  m.outputs = {"plan.txt", "trajectory_composite.txt", "control_composite.txt"};
  m.stages.emplace_back("glue", "ok");
  m.wall_seconds = timer.seconds();
  m.write(out_dir + "/manifest.txt");
  return exit_ok;
}

int run_monitor(const Config& cfg, const std::string& out_dir) {
  Timer timer;
  ResolvedRun r = resolve_run(cfg);
  RunManifest m = start_manifest("monitor", cfg);

  const int samples = cfg.get_int("monitor.samples", 50);
  std::vector<Real> ks = cfg.get_list("monitor.k_values", {0.0, 1.0});
  const Real s0 = cfg.get_auto("monitor.s").value_or(0.25 * default_s(r.weights));

  auto rows_lo = carleman_ratio_monitor(r.weights, r.a, r.grid, r.bc, r.omega_left, r.omega_right,
                                        s0, ks, samples, r.seed);
  auto rows_hi = carleman_ratio_monitor(r.weights, r.a, r.grid, r.bc, r.omega_left, r.omega_right,
                                        2.0 * s0, ks, samples, r.seed);

  bool ok = true;
  {
    TableWriter t(out_dir + "/ratios.txt", {"inequality", "k", "s", "max_ratio", "samples"},
                  {"empirical carleman constants", "seed " + std::to_string(r.seed)});
    for (std::size_t i = 0; i < rows_lo.size(); ++i) {
      const auto& lo = rows_lo[i];
      const auto& hi = rows_hi[i];
      t.row_mixed({lo.inequality_id, format_real(lo.k), format_real(lo.s),
                   format_real(lo.max_ratio), std::to_string(lo.samples)});
      t.row_mixed({hi.inequality_id, format_real(hi.k), format_real(hi.s),
                   format_real(hi.max_ratio), std::to_string(hi.samples)});
      if (!std::isfinite(lo.max_ratio) || !std::isfinite(hi.max_ratio)) ok = false;
      if (hi.max_ratio > lo.max_ratio * (1.0 + 1e-9)) ok = false;
    }
  }
  m.outputs = {"ratios.txt"};
  m.stages.emplace_back("monitor", ok ? "passed" : "failed");
  m.wall_seconds = timer.seconds();
  m.write(out_dir + "/manifest.txt");
  return ok ? exit_ok : exit_monitor_failed;
}

int run_sweep(const Config& cfg, const std::string& out_dir) {
  Timer timer;
  ResolvedRun r = resolve_run(cfg);
  RunManifest m = start_manifest("sweep", cfg);

  const std::string param = cfg.get("sweep.parameter", "epsilon");
  std::vector<Real> values = cfg.get_list("sweep.values", r.epsilons);

  SourceSpec f_src;
  TableWriter t(out_dir + "/sweep.txt",
                {"value", "terminal_norm", "J", "cg_iters", "status"},
                {"parameter sweep over " + param, "seed " + std::to_string(r.seed)});
  bool all_ok = true;
  std::vector<std::vector<Real>> warm;
  for (Real v : values) {
    PenaltyConfig pen = r.penalty;
    if (param == "epsilon") pen.epsilon = v;
    else if (param == "s") pen.s = v;
    else fail(ErrorKind::configuration, "sweep.parameter must be epsilon|s");
    try {
      ControlResult res = synthesize_control(r.y0, f_src, r.grid, r.bc, r.weights, pen,
                                             r.omega_left, r.omega_right,
                                             warm.empty() ? nullptr : &warm);
      t.row_mixed({format_real(v), format_real(res.terminal_norm), format_real(res.weighted_cost),
                   std::to_string(res.cg_iterations), "ok"});
      if (param == "epsilon") warm = res.u; // warm starts only make sense along epsilon
    } catch (const ConvergenceError&) {
      t.row_mixed({format_real(v), "nan", "nan", "0", "cg-failed"});
      all_ok = false;
    }
  }
  m.outputs = {"sweep.txt"};
  m.stages.emplace_back("sweep", all_ok ? "ok" : "cg-failures");
  m.wall_seconds = timer.seconds();
  m.write(out_dir + "/manifest.txt");
  return all_ok ? exit_ok : exit_monitor_failed;
}

int run_pipeline(const std::string& name, const Config& cfg, const std::string& out_dir) {
  if (!ensure_directory(out_dir)) {
    std::fprintf(stderr, "cannot create output directory '%s'\n", out_dir.c_str());
    return exit_io;
  }
  try {
    if (name == "check-weights") return run_check_weights(cfg, out_dir);
    if (name == "control") return run_control(cfg, out_dir);
    if (name == "memory") return run_memory(cfg, out_dir);
    if (name == "two-phase") return run_two_phase(cfg, out_dir);
    if (name == "glue") return run_glue(cfg, out_dir);
    if (name == "monitor") return run_monitor(cfg, out_dir);
    if (name == "sweep") return run_sweep(cfg, out_dir);
    std::fprintf(stderr, "unknown pipeline '%s'\n", name.c_str());
    return exit_config;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_config;
  }
}

} // namespace degctrl
