// Acceptance suite: one binary, one pass/fail line per criterion.
//
//  1. glued-line convergence rate against the Hopf-Lax value
//  2. flux-limited junction convergence against a fine-grid self oracle
//  3. discrete gradient / time-derivative estimates on random data
//  4. monotonicity probes and the discrete comparison principle
//  5. stability |u - u0| <= C0 t across the runs of criteria 1-3
//  6. equivalence of the run under clamped Hamiltonians and extended F
//  7. vertex test function certification and Hessian growth in 1/gamma
//  8. properties of the clamped linear extension of F outside its box
//  9. staggered conservation-law identity along the criterion-1 runs

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "hjnet/io.hpp"
#include "hjnet/problem.hpp"
#include "hjnet/vertex.hpp"

using namespace hjnet;

namespace {

int g_failures = 0;
int g_index = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  ++g_index;
  std::printf("[%d/9] %s %s: %s\n", g_index, ok ? "PASS" : "FAIL", name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct StabilityLedger {
  long violations = 0;
  double max_excess = 0.0;
  void absorb(const Monitors& mon) {
    violations += mon.stability_violations;
    max_excess = std::max(max_excess, mon.max_stability_excess);
  }
};

// ---------------------------------------------------------------------------
// criterion 2 (and 6 uses the same configuration)
// ---------------------------------------------------------------------------
ProblemSpec junction_cone_problem() {
  ProblemSpec p;
  p.branches = 3;
  p.hamiltonians = {{"quadratic", 0.0, 0.0}};
  p.flux.type = "flux_limited";
  p.flux.limiter = 1.0;
  p.initial.type = "cone";
  p.initial.slope = -0.5;
  p.horizon = 1.5;
  p.radius = 2.0;
  return p;
}

void criterion_2(StabilityLedger& stability) {
  ProblemSpec p = junction_cone_problem();
  const std::vector<double> dx_list{0.1, 0.05, 0.025};
  auto hams = make_hamiltonians(p);
  auto f = make_junction_function(p, hams);
  ProblemSpec coarse = p;
  coarse.dx = dx_list.front();
  const double truncation = choose_truncation(coarse, hams, *f, dx_list.front());

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> errors;
  for (double dx : dx_list) {
    PreparedRun prep = prepare_run(p, hams, *f, dx, truncation);
    Trajectory traj =
        run_scheme(prep.u0, hams, *f, prep.config, prep.cfl.bounds);
    stability.absorb(traj.monitors);
    ReferenceSolution ref =
        reference_solution(p, hams, *f, dx / 8.0, truncation, 8);
    const double window = std::min(p.radius, 0.9 * prep.grid.length());
    errors.push_back(sup_error_vs(
        traj, window, [&](double t, int b, int i) { return ref.at(t, b, i); }));
  }
  const double seconds =
      std::chrono::duration_cast<std::chrono::duration<double>>(
          std::chrono::steady_clock::now() - t0)
          .count();

  // halves-or-better; the relative epsilon only absorbs last-bit rounding
  // (the configuration refines exactly self-similarly, so the true ratio
  // is 2)
  bool halves = true;
  for (std::size_t k = 1; k < errors.size(); ++k)
    if (!(errors[k] <= 0.5 * errors[k - 1] * (1.0 + 1e-9) + 1e-14))
      halves = false;
  report(halves, "flux-limited junction convergence",
         "errors " + fmt(errors[0]) + " " + fmt(errors[1]) + " " +
             fmt(errors[2]) + ", ratios " + fmt(errors[0] / errors[1]) + " " +
             fmt(errors[1] / errors[2]) + " (>= 2), " + fmt(seconds) + " s");
}

// ---------------------------------------------------------------------------
// criterion 3: random-data gradient and time-derivative estimates
// ---------------------------------------------------------------------------
void criterion_3(StabilityLedger& stability) {
  std::mt19937_64 rng(20240901);
  long grad_violations = 0, monotone_violations = 0;
  long runs = 0;
  const double dx = 0.05;
  for (int k = 0; k < 20; ++k) {
    const int branches = 1 + k % 3;
    std::vector<Hamiltonian> hams(branches, Hamiltonian::quadratic(0.0));
    std::unique_ptr<JunctionFunction> f;
    if (k % 5 == 4) {
      f = std::make_unique<GeneralF>(
          branches,
          [](std::span<const double> q) {
            double s = 0.0;
            for (double v : q) s += std::exp(-v);
            return s;
          },
          [](int beta, std::span<const double> q) {
            return -std::exp(-q[beta]);
          });
    } else {
      const double limiter = (k % 2 == 0) ? 1.0 : minimal_limiter(hams);
      f = std::make_unique<FluxLimitedF>(hams, limiter);
    }
    Grid grid(Junction(branches), dx, 220);
    auto u0 = random_piecewise_linear(branches, 1.0, 4.0 * dx, grid.length(), rng);
    GridField field = sample_initial(grid, u0);
    CflData cfl = compute_cfl(field, hams, *f);
    SchemeConfig config{dx, 0.9 * cfl.dt_max, 0.0, 0.9};
    config.horizon = 1000.0 * config.dt;
    RunOptions options;
    options.store_states = false;
    Trajectory traj = run_scheme(field, hams, *f, config, cfl.bounds, options);
    grad_violations += traj.monitors.grad_violations;
    monotone_violations += traj.monitors.monotone_violations;
    stability.absorb(traj.monitors);
    ++runs;
  }
  const bool ok = grad_violations == 0 && monotone_violations == 0;
  report(ok, "discrete gradient estimates",
         std::to_string(runs) + " random runs x 1000 steps, " +
             std::to_string(grad_violations) + " gradient and " +
             std::to_string(monotone_violations) + " monotonicity violations");
}

// ---------------------------------------------------------------------------
// criterion 4: monotone update and discrete comparison
// ---------------------------------------------------------------------------
void criterion_4() {
  std::mt19937_64 rng(424242);
  std::vector<Hamiltonian> hams(2, Hamiltonian::quadratic(0.0));
  FluxLimitedF f(hams, 1.0);
  const double dx = 0.05;

  // single-input increase probes
  long bad_probes = 0;
  {
    Grid grid(Junction(2), dx, 60);
    auto u0 = random_piecewise_linear(2, 1.0, 4.0 * dx, grid.length(), rng);
    GridField state = sample_initial(grid, u0);
    CflData cfl = compute_cfl(state, hams, f);
    const double dt = 0.9 * cfl.dt_max;
    std::uniform_int_distribution<int> pick_branch(0, 1);
    std::uniform_int_distribution<int> pick_node(1, 59);
    std::uniform_int_distribution<int> pick_offset(-1, 1);
    std::uniform_int_distribution<int> pick_size(0, 2);
    const double sizes[3] = {1e-6 * dx, 1e-4 * dx, 1e-3 * dx};
    for (int probe = 0; probe < 900; ++probe) {
      GridField g = state;
      const int b = pick_branch(rng);
      const int i = pick_node(rng);
      const int input = i + pick_offset(rng);
      const double before = scheme_step(g, hams, f, dt).next(b, i);
      g.set(b, input, g(b, input) + sizes[pick_size(rng)]);
      const double after = scheme_step(g, hams, f, dt).next(b, i);
      if (after < before - 1e-13) ++bad_probes;
    }
    for (int probe = 0; probe < 100; ++probe) {
      GridField g = state;
      const double before = scheme_step(g, hams, f, dt).next.origin();
      if (probe % 2 == 0)
        g.set_origin(g.origin() + sizes[pick_size(rng)]);
      else
        g.set(pick_branch(rng), 1, g(pick_branch(rng), 1) + sizes[pick_size(rng)]);
      const double after = scheme_step(g, hams, f, dt).next.origin();
      if (after < before - 1e-13) ++bad_probes;
    }
  }

  // ordered pairs stay ordered (checked inside the influence cone of the
  // truncation-free region)
  int ordered_pairs = 0;
  const int steps = 1000;
  {
    Grid grid(Junction(2), dx, steps + 40);
    for (int pair = 0; pair < 20; ++pair) {
      auto low = random_piecewise_linear(2, 1.0, 4.0 * dx, grid.length(), rng);
      GridField a = sample_initial(grid, low);
      GridField b = a;
      std::uniform_real_distribution<double> lift(0.0, 0.5);
      b.set_origin(a.origin() + lift(rng));
      for (int br = 0; br < 2; ++br)
        for (int i = 1; i <= grid.i_max; ++i) b.set(br, i, a(br, i) + lift(rng));
      const double dt = 0.9 * std::min(compute_cfl(a, hams, f).dt_max,
                                       compute_cfl(b, hams, f).dt_max);
      if (comparison_preserved(a, b, hams, f, dt, steps)) ++ordered_pairs;
    }
  }
  const bool ok = bad_probes == 0 && ordered_pairs == 20;
  report(ok, "monotonicity and comparison",
         std::to_string(bad_probes) + " of 1000 probes decreased; " +
             std::to_string(ordered_pairs) + "/20 pairs stayed ordered for " +
             std::to_string(steps) + " steps");
}

// ---------------------------------------------------------------------------
// criterion 6: clamped Hamiltonians plus extended F reproduce the run
// ---------------------------------------------------------------------------
void criterion_6() {
  ProblemSpec p = junction_cone_problem();
  auto hams = make_hamiltonians(p);
  auto f = make_junction_function(p, hams);
  ProblemSpec coarse = p;
  coarse.dx = 0.1;
  const double truncation = choose_truncation(coarse, hams, *f, 0.1);

  double worst = 0.0;
  for (double dx : {0.1, 0.05, 0.025}) {
    PreparedRun prep = prepare_run(p, hams, *f, dx, truncation);
    std::vector<Hamiltonian> clamped;
    for (int b = 0; b < p.branches; ++b)
      clamped.push_back(build_modified_hamiltonian(hams[b],
                                                   prep.cfl.bounds.lower[b],
                                                   prep.cfl.bounds.upper[b])
                            .clamped);
    ModifiedF extended = build_modified_f(*f, prep.cfl.bounds.origin_box());
    GridField u = prep.u0, v = prep.u0;
    const int n_steps = prep.config.n_steps();
    for (int s = 0; s < n_steps; ++s) {
      u = scheme_step(u, hams, *f, prep.config.dt).next;
      v = scheme_step(v, clamped, extended, prep.config.dt).next;
      for (int b = 0; b < p.branches; ++b)
        for (int i = 0; i <= prep.grid.i_max; ++i)
          worst = std::max(worst, std::abs(u(b, i) - v(b, i)));
    }
  }
  report(worst <= 1e-12, "modified-problem equivalence",
         "sup difference " + fmt(worst) + " (<= 1e-12)");
}

// ---------------------------------------------------------------------------
// criterion 7: vertex test function
// ---------------------------------------------------------------------------
void criterion_7() {
  const auto t0 = std::chrono::steady_clock::now();
  VertexTestFunction g({Hamiltonian::quadratic(0.0), Hamiltonian::quadratic(0.0)},
                       0.0, 0.1, 5.0);
  VertexCertification rep = g.certify(10000, 1);
  const bool pair_ok = rep.max_diagonal <= 0.1 && rep.max_compatibility <= 0.1 &&
                       rep.hessian_fd_max_rel_err <= 1e-5;

  // one minimum at the junction level: the Hessian grows like 1/gamma
  std::vector<double> lg, lh;
  for (double gamma : {0.1, 0.05, 0.025}) {
    VertexTestFunction gc(
        {Hamiltonian::quadratic(0.0), Hamiltonian::quadratic(0.0, 0.5)},
        -std::numeric_limits<double>::infinity(), gamma, 5.0);
    VertexCertification rc = gc.certify(4000, 2);
    lg.push_back(std::log(1.0 / gamma));
    lh.push_back(std::log(rc.hessian_sup));
  }
  const double exponent = num::lsq_slope(lg, lh);
  const double seconds =
      std::chrono::duration_cast<std::chrono::duration<double>>(
          std::chrono::steady_clock::now() - t0)
          .count();
  const bool ok = pair_ok && exponent <= 1.1;
  report(ok, "vertex certification",
         "diagonal " + fmt(rep.max_diagonal) + ", compatibility " +
             fmt(rep.max_compatibility) + " (<= 0.1), hessian-vs-fd " +
             fmt(rep.hessian_fd_max_rel_err) + " (<= 1e-5), growth exponent " +
             fmt(exponent) + " (<= 1.1), " + fmt(seconds) + " s");
}

// ---------------------------------------------------------------------------
// criterion 8: clamped linear extension of F
// ---------------------------------------------------------------------------
void criterion_8() {
  std::mt19937_64 rng(777);
  long exact_misses = 0, divergence_misses = 0, monotone_misses = 0;

  struct CaseDef {
    std::unique_ptr<JunctionFunction> f;
    Box q0;
  };
  std::vector<CaseDef> cases;
  {
    CaseDef strict;
    strict.f = std::make_unique<GeneralF>(
        2,
        [](std::span<const double> q) {
          return std::exp(-q[0]) + std::exp(-q[1]);
        },
        [](int beta, std::span<const double> q) {
          return -std::exp(-q[beta]);
        });
    strict.q0 = Box{{0.0, 0.0}, {1.0, 1.0}};
    cases.push_back(std::move(strict));

    CaseDef limited;
    std::vector<Hamiltonian> hams(2, Hamiltonian::quadratic(0.0));
    limited.f = std::make_unique<GeneralF>(GeneralF::wrap(FluxLimitedF(hams, 1.0)));
    limited.q0 = Box{{-1.0, -1.0}, {1.0, 1.0}};
    cases.push_back(std::move(limited));
  }

  for (const auto& c : cases) {
    ModifiedF ft = build_modified_f(*c.f, c.q0);
    const double bound = sup_neg_divergence(*c.f, c.q0);
    std::uniform_real_distribution<double> inside(0.0, 1.0);
    std::uniform_real_distribution<double> wide(-3.0, 4.0);
    for (int k = 0; k < 1000; ++k) {
      // exact agreement at an interior point
      std::vector<double> p(2);
      for (int a = 0; a < 2; ++a)
        p[a] = c.q0.lo[a] + inside(rng) * (c.q0.hi[a] - c.q0.lo[a]);
      if (ft.value(p) != c.f->value(p)) ++exact_misses;

      // divergence bound and coordinate-wise monotonicity at a wide point
      std::vector<double> q{wide(rng), wide(rng)};
      double neg_div = 0.0;
      for (int a = 0; a < 2; ++a) neg_div -= ft.partial(a, q);
      if (neg_div > bound + 1e-8) ++divergence_misses;
      for (int a = 0; a < 2; ++a) {
        std::vector<double> q2 = q;
        q2[a] += 0.125;
        if (ft.value(q2) > ft.value(q) + 1e-12) ++monotone_misses;
      }
    }
  }
  const bool ok =
      exact_misses == 0 && divergence_misses == 0 && monotone_misses == 0;
  report(ok, "extension of F outside the gradient box",
         std::to_string(exact_misses) + " exact misses, " +
             std::to_string(divergence_misses) + " divergence misses, " +
             std::to_string(monotone_misses) + " monotonicity misses");
}

}  // namespace

int main() {
  StabilityLedger stability;

  // criterion 1 (also records the data for criterion 9)
  double identity_worst = 0.0;
  {
    ProblemSpec p;
    p.branches = 2;
    p.hamiltonians = {{"quadratic", 0.0, 0.0}};
    p.flux.type = "flux_limited";
    p.flux.limiter = 0.0;
    p.initial.type = "tent";
    p.horizon = 0.5;
    p.radius = 2.0;

    const std::vector<double> dx_list{0.1, 0.05, 0.025, 0.0125};
    auto hams = make_hamiltonians(p);
    auto f = make_junction_function(p, hams);
    ProblemSpec coarse = p;
    coarse.dx = dx_list.front();
    const double truncation =
        choose_truncation(coarse, hams, *f, dx_list.front());
    auto u0_line = line_initial(p);
    double lipschitz = 0.0;
    (void)make_initial(p, &lipschitz);

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> errors;
    for (double dx : dx_list) {
      PreparedRun prep = prepare_run(p, hams, *f, dx, truncation);
      Trajectory traj =
          run_scheme(prep.u0, hams, *f, prep.config, prep.cfl.bounds);
      stability.absorb(traj.monitors);
      const double window = std::min(p.radius, 0.9 * prep.grid.length());
      errors.push_back(sup_error_vs(traj, window, [&](double t, int b, int i) {
        const double x =
            b == 0 ? prep.grid.coordinate(i) : -prep.grid.coordinate(i);
        return hopf_lax(u0_line, hams.front(), t, x, lipschitz);
      }));
      for (std::size_t s = 0; s + 1 < traj.states.size(); ++s)
        identity_worst = std::max(
            identity_worst,
            conservation_identity_defect(traj.states[s], traj.states[s + 1],
                                         hams, *f, prep.config.dt));
    }
    const double seconds =
        std::chrono::duration_cast<std::chrono::duration<double>>(
            std::chrono::steady_clock::now() - t0)
            .count();

    bool decreasing = true;
    for (std::size_t k = 1; k < errors.size(); ++k)
      if (!(errors[k] < errors[k - 1])) decreasing = false;
    std::vector<double> lx, le;
    double ratio_min = 1e300, ratio_max = -1e300;
    for (std::size_t k = 0; k < errors.size(); ++k) {
      lx.push_back(std::log(dx_list[k]));
      le.push_back(std::log(errors[k]));
      const double r = errors[k] / std::cbrt(dx_list[k]);
      ratio_min = std::min(ratio_min, r);
      ratio_max = std::max(ratio_max, r);
    }
    const double order = num::lsq_slope(lx, le);
    const double spread = ratio_max / ratio_min;
    const bool ok = decreasing && order >= 0.33 && spread <= 10.0;
    report(ok, "glued-line convergence rate",
           "errors " + fmt(errors[0]) + " " + fmt(errors[1]) + " " +
               fmt(errors[2]) + " " + fmt(errors[3]) + ", fitted order " +
               fmt(order) + " (>= 0.33), spread " + fmt(spread) + " (<= 10), " +
               fmt(seconds) + " s");
  }

  criterion_2(stability);
  criterion_3(stability);
  criterion_4();

  report(stability.violations == 0, "stability bound",
         std::to_string(stability.violations) +
             " violations of |u - u0| <= C0 t + 1e-12 across criteria 1-3" +
             (stability.violations > 0
                  ? ", max excess " + fmt(stability.max_excess)
                  : ""));

  criterion_6();
  criterion_7();
  criterion_8();

  report(identity_worst <= 1e-13, "conservation-law identity",
         "max staggered-update defect " + fmt(identity_worst) +
             " (<= 1e-13) over every cell and step of the criterion-1 runs");

  std::printf("%d/9 criteria passed\n", 9 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
