#include "hjnet/problem.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>

namespace hjnet {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Hamiltonian make_one(const HamiltonianSpec& spec) {
  if (spec.type == "quadratic")
    return Hamiltonian::quadratic(spec.center, spec.offset);
  if (spec.type == "absolute")
    return Hamiltonian::absolute_value(spec.center, spec.offset);
  if (spec.type == "asymmetric") return Hamiltonian::asymmetric_example();
  throw ConfigError("unknown hamiltonian type: " + spec.type);
}

double table_value(const std::vector<TableKnot>& knots, double x) {
  if (knots.empty()) return 0.0;
  if (x <= knots.front().x) return knots.front().value;
  if (x >= knots.back().x) return knots.back().value;
  for (std::size_t k = 1; k < knots.size(); ++k) {
    if (x <= knots[k].x) {
      const double t = (x - knots[k - 1].x) / (knots[k].x - knots[k - 1].x);
      return knots[k - 1].value + t * (knots[k].value - knots[k - 1].value);
    }
  }
  return knots.back().value;
}
}  // namespace

std::vector<Hamiltonian> make_hamiltonians(const ProblemSpec& problem) {
  if (problem.hamiltonians.empty())
    throw ConfigError("problem: no hamiltonian specified");
  std::vector<Hamiltonian> hams;
  for (int b = 0; b < problem.branches; ++b) {
    const auto& spec = problem.hamiltonians.size() == 1
                           ? problem.hamiltonians.front()
                           : problem.hamiltonians.at(b);
    hams.push_back(make_one(spec));
  }
  return hams;
}

std::unique_ptr<JunctionFunction> make_junction_function(
    const ProblemSpec& problem, const std::vector<Hamiltonian>& hams) {
  if (problem.flux.type == "flux_limited")
    return std::make_unique<FluxLimitedF>(hams, problem.flux.limiter);
  const std::string which =
      problem.flux.type == "custom" ? problem.flux.name : problem.flux.type;
  if (which == "exp_sum") {
    const double scale = problem.flux.scale;
    const int n = problem.branches;
    return std::make_unique<GeneralF>(
        n,
        [scale](std::span<const double> p) {
          double s = 0.0;
          for (double v : p) s += std::exp(-v);
          return scale * s;
        },
        [scale](int beta, std::span<const double> p) {
          return -scale * std::exp(-p[beta]);
        });
  }
  throw ConfigError("unknown junction function: " + problem.flux.type +
                    (problem.flux.type == "custom" ? "/" + problem.flux.name
                                                   : ""));
}

std::function<double(JunctionPoint)> make_initial(const ProblemSpec& problem,
                                                  double* lipschitz) {
  const InitialSpec& init = problem.initial;
  double l0 = 0.0;
  std::function<double(JunctionPoint)> fn;
  if (init.type == "zero") {
    fn = [](JunctionPoint) { return 0.0; };
    l0 = 0.0;
  } else if (init.type == "cone") {
    const double a = init.slope;
    fn = [a](JunctionPoint p) { return a * p.coordinate; };
    l0 = std::abs(a);
  } else if (init.type == "tent") {
    const double h = init.height, w = init.width;
    if (w <= 0.0) throw ConfigError("tent: width must be positive");
    fn = [h, w](JunctionPoint p) {
      return std::max(0.0, h * (1.0 - p.coordinate / w));
    };
    l0 = std::abs(h / w);
  } else if (init.type == "table") {
    if (static_cast<int>(init.tables.size()) != problem.branches)
      throw ConfigError("table initial datum: one knot list per branch required");
    if (!init.lipschitz)
      throw ConfigError("table initial datum: declared lipschitz required");
    auto tables = init.tables;
    fn = [tables](JunctionPoint p) {
      return table_value(tables[p.branch], p.coordinate);
    };
    l0 = *init.lipschitz;
  } else {
    throw ConfigError("unknown initial datum type: " + init.type);
  }
  if (init.lipschitz) l0 = *init.lipschitz;
  if (lipschitz) *lipschitz = l0;
  return fn;
}

std::function<double(JunctionPoint)> random_piecewise_linear(
    int branches, double lipschitz, double knot_spacing, double extent,
    std::mt19937_64& rng) {
  std::uniform_real_distribution<double> slope(-lipschitz, lipschitz);
  std::vector<std::vector<TableKnot>> tables(branches);
  for (int b = 0; b < branches; ++b) {
    double x = 0.0, v = 0.0;
    tables[b].push_back({x, v});
    while (x < extent) {
      const double s = slope(rng);
      x += knot_spacing;
      v += s * knot_spacing;
      tables[b].push_back({x, v});
    }
  }
  return [tables](JunctionPoint p) {
    return table_value(tables[p.branch], p.coordinate);
  };
}

double choose_truncation(const ProblemSpec& problem,
                         const std::vector<Hamiltonian>& hams,
                         const JunctionFunction& f, double dx_round) {
  double lipschitz = 0.0;
  auto u0 = make_initial(problem, &lipschitz);
  double length = std::max(problem.radius, 1.0) + 1.0;
  double chosen = length;
  for (int pass = 0; pass < 3; ++pass) {
    Grid grid = Grid::with_length(Junction(problem.branches), problem.dx, chosen);
    const GridField field = sample_initial(grid, u0);
    const CflData cfl = compute_cfl(field, hams, f);
    // The discrete influence cone advances one node per step, i.e. at speed
    // dx/dt = sup-speed / cfl_safety, slightly faster than the PDE cone.
    const double cone_speed =
        std::max(cfl.sup_hamiltonian_speed, cfl.sup_junction_divergence) /
        std::min(problem.cfl_safety, 1.0);
    const double needed =
        std::max(problem.radius / 0.9,
                 problem.radius + problem.horizon * cone_speed) +
        2.0 * dx_round;
    const double rounded = std::ceil(needed / dx_round - 1e-9) * dx_round;
    if (rounded <= chosen + 1e-12 && pass > 0) return chosen;
    chosen = std::max(chosen, rounded);
  }
  return chosen;
}

PreparedRun prepare_run(const ProblemSpec& problem,
                        std::span<const Hamiltonian> hams,
                        const JunctionFunction& f, double dx,
                        double truncation) {
  Grid grid = Grid::with_length(Junction(problem.branches), dx, truncation);
  double lipschitz = 0.0;
  auto u0 = make_initial(problem, &lipschitz);
  GridField field = sample_initial(grid, u0);
  CflData cfl = compute_cfl(field, hams, f);
  SchemeConfig config;
  config.dx = dx;
  config.cfl_safety = problem.cfl_safety;
  config.dt = problem.cfl_safety * cfl.dt_max;
  if (!std::isfinite(config.dt) || config.dt <= 0.0)
    config.dt = problem.horizon > 0.0 ? problem.horizon : 1.0;
  config.horizon = problem.horizon;
  return PreparedRun{grid, std::move(field), std::move(cfl), config};
}

double hopf_lax(const std::function<double(double)>& u0_line,
                const Hamiltonian& h, double t, double x, double lipschitz) {
  if (t <= 0.0) return u0_line(x);
  auto conjugate = [&](double q) -> double {
    double lo = h.argmin() - 1.0, hi = h.argmin() + 1.0;
    while (h.deriv(lo) > q) {
      lo = h.argmin() - 2.0 * (h.argmin() - lo);
      if (h.argmin() - lo > num::kBracketCap) return kInf;
    }
    while (h.deriv(hi) < q) {
      hi = h.argmin() + 2.0 * (hi - h.argmin());
      if (hi - h.argmin() > num::kBracketCap) return kInf;
    }
    const double p = num::golden_max([&](double p) { return p * q - h(p); }, lo, hi);
    return p * q - h(p);
  };
  auto objective = [&](double y) { return u0_line(y) + t * conjugate((x - y) / t); };

  const double reach =
      t * h.sup_abs_deriv(-(lipschitz + 1.0), lipschitz + 1.0) + 1.0;
  const int n = 257;
  double best = kInf;
  int best_k = 0;
  for (int k = 0; k < n; ++k) {
    const double y = x - reach + 2.0 * reach * k / (n - 1);
    const double v = objective(y);
    if (v < best) {
      best = v;
      best_k = k;
    }
  }
  const double y_lo = x - reach + 2.0 * reach * std::max(0, best_k - 1) / (n - 1);
  const double y_hi = x - reach + 2.0 * reach * std::min(n - 1, best_k + 1) / (n - 1);
  const double y_ref = num::golden_min(objective, y_lo, y_hi);
  return std::min(best, objective(y_ref));
}

bool glued_line_compatible(const ProblemSpec& problem,
                           const std::vector<Hamiltonian>& hams) {
  if (problem.branches != 2) return false;
  if (problem.hamiltonians.size() > 1 &&
      (problem.hamiltonians[0].type != problem.hamiltonians[1].type ||
       problem.hamiltonians[0].center != problem.hamiltonians[1].center ||
       problem.hamiltonians[0].offset != problem.hamiltonians[1].offset))
    return false;
  const auto& spec = problem.hamiltonians.front();
  const bool even = (spec.type == "quadratic" || spec.type == "absolute") &&
                    spec.center == 0.0;
  if (!even) return false;
  if (problem.flux.type != "flux_limited") return false;
  const double a0 = minimal_limiter(hams);
  return problem.flux.limiter <= a0 + 1e-12;
}

std::function<double(double)> line_initial(const ProblemSpec& problem) {
  double l0 = 0.0;
  auto u0 = make_initial(problem, &l0);
  return [u0](double s) {
    return s >= 0.0 ? u0({0, s}) : u0({1, -s});
  };
}

double ReferenceSolution::at(double t, int branch, int coarse_i) const {
  const int j = coarse_i * ratio;
  const auto& times = fine.times;
  if (t <= times.front()) return fine.states.front()(branch, j);
  if (t >= times.back()) return fine.states.back()(branch, j);
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t s = static_cast<std::size_t>(it - times.begin()) - 1;
  const double t0 = times[s], t1 = times[s + 1];
  const double w = (t - t0) / (t1 - t0);
  return (1.0 - w) * fine.states[s](branch, j) + w * fine.states[s + 1](branch, j);
}

ReferenceSolution reference_solution(const ProblemSpec& problem,
                                     std::span<const Hamiltonian> hams,
                                     const JunctionFunction& f, double dx_fine,
                                     double truncation, int ratio) {
  PreparedRun prep = prepare_run(problem, hams, f, dx_fine, truncation);
  // Cover the full horizon so time interpolation never extrapolates.
  prep.config.horizon = problem.horizon + 2.0 * prep.config.dt;
  RunOptions options;
  options.store_states = true;
  options.monitor_dplus = false;
  options.monitor_prop33 = false;
  Trajectory fine = run_scheme(prep.u0, hams, f, prep.config, prep.cfl.bounds,
                               options);
  return ReferenceSolution{std::move(fine), ratio};
}

double sup_error_vs(const Trajectory& traj, double window,
                    const std::function<double(double, int, int)>& oracle) {
  const Grid& grid = traj.initial.grid();
  const int n = grid.junction.num_branches;
  double sup = 0.0;
  for (std::size_t s = 0; s < traj.states.size(); ++s) {
    const double t = traj.times[s];
    if (t > traj.config.horizon + 1e-12) break;
    const GridField& state = traj.states[s];
    sup = std::max(sup, std::abs(state.origin() - oracle(t, 0, 0)));
    for (int b = 0; b < n; ++b) {
      for (int i = 1; i <= grid.i_max; ++i) {
        if (grid.coordinate(i) > window) break;
        sup = std::max(sup, std::abs(state(b, i) - oracle(t, b, i)));
      }
    }
  }
  return sup;
}

ConvergenceResult convergence_study(const ProblemSpec& problem,
                                    std::span<const double> dx_list,
                                    OracleChoice oracle, int threads,
                                    int fine_ratio) {
  if (dx_list.size() < 3)
    throw ConfigError("convergence study needs at least 3 grid sizes");
  for (std::size_t k = 1; k < dx_list.size(); ++k)
    if (!(dx_list[k] < dx_list[k - 1]))
      throw ConfigError("convergence study: dx list must strictly decrease");

  const std::vector<Hamiltonian> hams = make_hamiltonians(problem);
  const std::unique_ptr<JunctionFunction> f =
      make_junction_function(problem, hams);

  OracleChoice chosen = oracle;
  if (chosen == OracleChoice::kAuto)
    chosen = glued_line_compatible(problem, hams) ? OracleChoice::kHopfLax
                                                  : OracleChoice::kSelf;
  if (chosen == OracleChoice::kHopfLax && !glued_line_compatible(problem, hams))
    throw ConfigError(
        "hopf-lax oracle requires the glued-line problem "
        "(2 branches, equal even hamiltonians, A <= A0)");

  // One truncation for the whole study, rounded on the coarsest grid, so
  // every grid (including the fine references) nests exactly.
  ProblemSpec coarse = problem;
  coarse.dx = dx_list.front();
  const double truncation =
      choose_truncation(coarse, hams, *f, dx_list.front());

  double lipschitz = 0.0;
  (void)make_initial(problem, &lipschitz);

  auto run_row = [&](double dx) -> ConvergenceRow {
    const auto t_start = std::chrono::steady_clock::now();
    PreparedRun prep = prepare_run(problem, hams, *f, dx, truncation);
    RunOptions options;
    options.monitor_dplus = false;
    options.monitor_prop33 = false;
    Trajectory traj =
        run_scheme(prep.u0, hams, *f, prep.config, prep.cfl.bounds, options);
    const double window = std::min(problem.radius, 0.9 * prep.grid.length());

    double err = 0.0;
    if (chosen == OracleChoice::kHopfLax) {
      const auto u0_line = line_initial(problem);
      const Hamiltonian& h = hams.front();
      err = sup_error_vs(traj, window, [&](double t, int b, int i) {
        const double x = b == 0 ? prep.grid.coordinate(i) : -prep.grid.coordinate(i);
        return hopf_lax(u0_line, h, t, x, lipschitz);
      });
    } else {
      const ReferenceSolution ref = reference_solution(
          problem, hams, *f, dx / fine_ratio, truncation, fine_ratio);
      err = sup_error_vs(traj, window, [&](double t, int b, int i) {
        return ref.at(t, b, i);
      });
    }
    const auto t_end = std::chrono::steady_clock::now();
    const double secs =
        std::chrono::duration_cast<std::chrono::duration<double>>(t_end - t_start)
            .count();
    return ConvergenceRow{dx, prep.config.dt, err, secs};
  };

  ConvergenceResult result;
  result.oracle_used =
      chosen == OracleChoice::kHopfLax ? "hopf_lax" : "self";
  result.rows.resize(dx_list.size());
  if (threads > 1) {
    std::vector<std::future<ConvergenceRow>> futures;
    for (double dx : dx_list)
      futures.push_back(std::async(std::launch::async, run_row, dx));
    for (std::size_t k = 0; k < futures.size(); ++k)
      result.rows[k] = futures[k].get();
  } else {
    for (std::size_t k = 0; k < dx_list.size(); ++k)
      result.rows[k] = run_row(dx_list[k]);
  }

  result.exact = true;
  for (const auto& row : result.rows)
    if (row.sup_error >= 1e-10) result.exact = false;

  if (!result.exact) {
    std::vector<double> lx, le;
    double ratio_min = kInf, ratio_max = -kInf;
    for (const auto& row : result.rows) {
      lx.push_back(std::log(row.dx));
      le.push_back(std::log(std::max(row.sup_error, 1e-300)));
      const double ratio = row.sup_error / std::cbrt(row.dx);
      ratio_min = std::min(ratio_min, ratio);
      ratio_max = std::max(ratio_max, ratio);
    }
    result.fitted_order = num::lsq_slope(lx, le);
    result.ratio_spread = ratio_max / ratio_min;
  }
  return result;
}

}  // namespace hjnet
