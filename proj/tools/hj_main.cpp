// Command-line driver: solve one trajectory, print CFL data, run
// convergence studies, certify the vertex test function, and check the
// scheme invariants on a given problem.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "hjnet/config.hpp"
#include "hjnet/io.hpp"
#include "hjnet/problem.hpp"
#include "hjnet/vertex.hpp"

using json = nlohmann::ordered_json;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  bool strict = false;
  int threads = 1;
  std::uint64_t seed = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "problem configuration file")
      ->required();
  cmd->add_option("--out", opts.out_path, "output file (stdout when omitted)");
  cmd->add_flag("--strict", opts.strict, "exit nonzero on invariant violations");
  cmd->add_option("--threads", opts.threads, "parallel rows in studies");
  cmd->add_option("--seed", opts.seed, "seed for sampling-based validators");
}

void emit(const CommonOpts& opts, const std::string& text) {
  if (opts.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(opts.out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + opts.out_path);
  out << text;
}

json bounds_to_json(const hjnet::GradientBounds& bounds) {
  json j;
  j["m0"] = bounds.m0;
  j["M0"] = bounds.M0;
  j["lower"] = bounds.lower;
  j["upper"] = bounds.upper;
  j["lower_origin"] = bounds.lower_origin;
  return j;
}

int run_solve(const CommonOpts& opts) {
  hjnet::Config config = hjnet::parse_config_file(opts.config_path);
  const auto hams = hjnet::make_hamiltonians(config.problem);
  const auto f = hjnet::make_junction_function(config.problem, hams);
  const double length =
      hjnet::choose_truncation(config.problem, hams, *f, config.problem.dx);
  hjnet::PreparedRun prep =
      hjnet::prepare_run(config.problem, hams, *f, config.problem.dx, length);
  hjnet::Trajectory traj = hjnet::run_scheme(prep.u0, hams, *f, prep.config,
                                             prep.cfl.bounds);
  std::ostringstream csv;
  hjnet::write_trajectory_csv(csv, traj, hams, *f);
  emit(opts, csv.str());
  if (traj.monitors.total_violations() > 0) {
    std::cerr << "monitor violations: " << traj.monitors.total_violations()
              << "\n";
    if (opts.strict) return 1;
  }
  return 0;
}

int run_cfl(const CommonOpts& opts) {
  hjnet::Config config = hjnet::parse_config_file(opts.config_path);
  const auto hams = hjnet::make_hamiltonians(config.problem);
  const auto f = hjnet::make_junction_function(config.problem, hams);
  hjnet::Grid grid = hjnet::Grid::with_length(
      hjnet::Junction(config.problem.branches), config.problem.dx,
      hjnet::choose_truncation(config.problem, hams, *f, config.problem.dx));
  double lipschitz = 0.0;
  auto u0 = hjnet::make_initial(config.problem, &lipschitz);
  hjnet::GridField field = hjnet::sample_initial(grid, u0);
  hjnet::CflData cfl = hjnet::compute_cfl(field, hams, *f);
  json j;
  j["dx"] = config.problem.dx;
  j["dt_max"] = cfl.dt_max;
  j["dt"] = config.problem.cfl_safety * cfl.dt_max;
  j["cfl_safety"] = config.problem.cfl_safety;
  j["sup_hamiltonian_speed"] = cfl.sup_hamiltonian_speed;
  j["sup_junction_divergence"] = cfl.sup_junction_divergence;
  j["bounds"] = bounds_to_json(cfl.bounds);
  emit(opts, j.dump(2) + "\n");
  return 0;
}

int run_converge(const CommonOpts& opts) {
  hjnet::Config config = hjnet::parse_config_file(opts.config_path);
  if (config.experiment.dx_list.size() < 3)
    throw hjnet::ConfigError("experiment.dx_list needs at least 3 entries");
  hjnet::OracleChoice oracle = hjnet::OracleChoice::kAuto;
  if (config.experiment.oracle == "hopf_lax")
    oracle = hjnet::OracleChoice::kHopfLax;
  else if (config.experiment.oracle == "self")
    oracle = hjnet::OracleChoice::kSelf;
  else if (config.experiment.oracle != "auto")
    throw hjnet::ConfigError("unknown oracle: " + config.experiment.oracle);
  hjnet::ConvergenceResult result =
      hjnet::convergence_study(config.problem, config.experiment.dx_list,
                               oracle, opts.threads,
                               config.experiment.fine_ratio);
  std::ostringstream csv;
  hjnet::write_convergence_csv(csv, result);
  emit(opts, csv.str());
  json j;
  j["oracle"] = result.oracle_used;
  if (result.exact) {
    j["fitted_order"] = "exact";
  } else {
    j["fitted_order"] = result.fitted_order;
    j["ratio_spread_vs_cbrt"] = result.ratio_spread;
  }
  std::cerr << j.dump() << "\n";
  return 0;
}

int run_certify(const CommonOpts& opts) {
  hjnet::Config config = hjnet::parse_config_file(opts.config_path);
  const auto hams = hjnet::make_hamiltonians(config.problem);
  hjnet::VertexTestFunction g(hams, config.vertex.limiter, config.vertex.gamma,
                              config.vertex.radius);
  hjnet::VertexCertification rep = g.certify(config.vertex.samples, opts.seed);
  json j;
  j["gamma"] = rep.gamma;
  j["limiter"] = rep.limiter;
  j["radius"] = rep.radius;
  j["sample_count"] = rep.sample_count;
  j["seed"] = opts.seed;
  j["max_diagonal"] = rep.max_diagonal;
  j["max_compatibility"] = rep.max_compatibility;
  j["max_gradient_sum"] = rep.max_gradient_sum;
  j["hessian_sup"] = rep.hessian_sup;
  j["hessian_fd_max_rel_err"] = rep.hessian_fd_max_rel_err;
  j["envelope_identity_defect"] = rep.envelope_identity_defect;
  j["lambda_interface_defect"] = rep.lambda_interface_defect;
  j["superlinearity_violations"] = rep.superlinearity_violations;
  j["superlinearity_min_growth"] = rep.superlinearity_min_growth;
  j["diagonal_ok"] = rep.diagonal_ok();
  j["compatibility_ok"] = rep.compatibility_ok();
  emit(opts, j.dump(2) + "\n");
  if (opts.strict && !(rep.diagonal_ok() && rep.compatibility_ok())) return 1;
  return 0;
}

int run_check_invariants(const CommonOpts& opts) {
  hjnet::Config config = hjnet::parse_config_file(opts.config_path);
  const auto hams = hjnet::make_hamiltonians(config.problem);
  const auto f = hjnet::make_junction_function(config.problem, hams);
  std::mt19937_64 rng(opts.seed);
  long failures = 0;
  auto report = [&](const std::string& name, bool ok, const std::string& note) {
    std::cout << (ok ? "PASS " : "FAIL ") << name;
    if (!note.empty()) std::cout << " (" << note << ")";
    std::cout << "\n";
    if (!ok) ++failures;
  };

  // Theorem-3.1 monitors on the configured problem.
  {
    const double length =
        hjnet::choose_truncation(config.problem, hams, *f, config.problem.dx);
    hjnet::PreparedRun prep = hjnet::prepare_run(config.problem, hams, *f,
                                                 config.problem.dx, length);
    hjnet::Trajectory traj = hjnet::run_scheme(prep.u0, hams, *f, prep.config,
                                               prep.cfl.bounds);
    report("gradient-bounds", traj.monitors.grad_violations == 0,
           std::to_string(traj.monitors.grad_violations) + " violations");
    report("time-derivative-monotonicity",
           traj.monitors.monotone_violations == 0, "");
    report("cfl-margin", traj.monitors.dplus_violations == 0, "");
    report("stability", traj.monitors.stability_violations == 0, "");
    report("gradient-bounds-at-running-level",
           traj.monitors.prop33_violations == 0, "");
  }

  // Single-input monotonicity probes on random states under CFL.
  {
    const int i_max = 40;
    hjnet::Grid grid(hjnet::Junction(config.problem.branches),
                     config.problem.dx, i_max);
    auto u0 = hjnet::random_piecewise_linear(config.problem.branches, 1.0,
                                             4.0 * config.problem.dx,
                                             grid.length(), rng);
    hjnet::GridField state = hjnet::sample_initial(grid, u0);
    hjnet::CflData cfl = hjnet::compute_cfl(state, hams, *f);
    const double dt = 0.9 * cfl.dt_max;
    std::uniform_int_distribution<int> pick_branch(0,
                                                   config.problem.branches - 1);
    std::uniform_int_distribution<int> pick_node(1, i_max - 1);
    std::uniform_int_distribution<int> pick_input(-1, 1);
    long bad = 0;
    for (int probe = 0; probe < 1000; ++probe) {
      hjnet::GridField g = state;
      const int b = pick_branch(rng);
      const int i = pick_node(rng);
      const int input = i + pick_input(rng);
      const double before = hjnet::scheme_step(g, hams, *f, dt).next(b, i);
      g.set(b, input, g(b, input) + 1e-4 * grid.dx);
      const double after = hjnet::scheme_step(g, hams, *f, dt).next(b, i);
      if (after < before - 1e-13) ++bad;
    }
    report("single-input-monotonicity", bad == 0,
           std::to_string(bad) + " of 1000 probes");
  }

  // Discrete comparison on ordered random pairs.
  {
    const int steps = 60;
    const int i_max = steps + 20;
    hjnet::Grid grid(hjnet::Junction(config.problem.branches),
                     config.problem.dx, i_max);
    bool ok = true;
    for (int pair = 0; pair < 5 && ok; ++pair) {
      auto low = hjnet::random_piecewise_linear(config.problem.branches, 1.0,
                                                4.0 * config.problem.dx,
                                                grid.length(), rng);
      hjnet::GridField a = hjnet::sample_initial(grid, low);
      hjnet::GridField b = a;
      std::uniform_real_distribution<double> lift(0.0, 0.5);
      b.set_origin(a.origin() + lift(rng));
      for (int br = 0; br < config.problem.branches; ++br)
        for (int i = 1; i <= i_max; ++i) b.set(br, i, a(br, i) + lift(rng));
      const double dt =
          0.9 * std::min(hjnet::compute_cfl(a, hams, *f).dt_max,
                         hjnet::compute_cfl(b, hams, *f).dt_max);
      ok = hjnet::comparison_preserved(a, b, hams, *f, dt, steps);
    }
    report("discrete-comparison", ok, "");
  }

  // Staggered conservation identity along a short run.
  {
    const double length =
        hjnet::choose_truncation(config.problem, hams, *f, config.problem.dx);
    hjnet::PreparedRun prep = hjnet::prepare_run(config.problem, hams, *f,
                                                 config.problem.dx, length);
    hjnet::GridField u = prep.u0;
    double worst = 0.0;
    for (int s = 0; s < 25; ++s) {
      hjnet::GridField next =
          hjnet::scheme_step(u, hams, *f, prep.config.dt).next;
      worst = std::max(worst, hjnet::conservation_identity_defect(
                                  u, next, hams, *f, prep.config.dt));
      u = next;
    }
    report("conservation-identity", worst <= 1e-13,
           "max defect " + hjnet::format_g17(worst));
  }

  if (failures > 0 && opts.strict) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"monotone finite-difference schemes for Hamilton-Jacobi "
               "equations on a junction"};
  app.require_subcommand(1);

  CommonOpts solve_opts, cfl_opts, conv_opts, cert_opts, check_opts;
  CLI::App* solve = app.add_subcommand("solve", "run one trajectory, write CSV");
  add_common(solve, solve_opts);
  CLI::App* cfl = app.add_subcommand("cfl", "print gradient bounds and dt_max");
  add_common(cfl, cfl_opts);
  CLI::App* converge =
      app.add_subcommand("converge", "convergence study, CSV plus fitted order");
  add_common(converge, conv_opts);
  CLI::App* certify =
      app.add_subcommand("certify-vertex", "vertex test function report, JSON");
  add_common(certify, cert_opts);
  CLI::App* check =
      app.add_subcommand("check-invariants", "property suites, PASS/FAIL lines");
  add_common(check, check_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return run_solve(solve_opts);
    if (cfl->parsed()) return run_cfl(cfl_opts);
    if (converge->parsed()) return run_converge(conv_opts);
    if (certify->parsed()) return run_certify(cert_opts);
    if (check->parsed()) return run_check_invariants(check_opts);
  } catch (const hjnet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
