#include "hjnet/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hjnet {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_setup(const GridField& state, std::span<const Hamiltonian> hams,
                 const JunctionFunction& f) {
  const int n = state.grid().junction.num_branches;
  if (static_cast<int>(hams.size()) != n || f.arity() != n)
    throw DataError("scheme: branch count mismatch");
}

// Max |H'| over the interval spanned by two gradient values (endpoint and
// midpoint samples; the interval is short, one step of gradient drift).
double interval_sup_deriv(const Hamiltonian& h, double a, double b) {
  const double lo = std::min(a, b), hi = std::max(a, b);
  double best = 0.0;
  for (int k = 0; k < 5; ++k) {
    const double p = lo + (hi - lo) * k / 4.0;
    best = std::max(best, std::abs(h.deriv(p)));
  }
  return best;
}
}  // namespace

double numerical_hamiltonian(const EnvelopePair& env, double p_plus,
                             double p_minus) {
  return std::max(env.minus(p_plus), env.plus(p_minus));
}

double numerical_hamiltonian(const Hamiltonian& h, double p_plus,
                             double p_minus) {
  return std::max(h.envelope_minus(p_plus), h.envelope_plus(p_minus));
}

StepResult scheme_step(const GridField& state,
                       std::span<const Hamiltonian> hams,
                       const JunctionFunction& f, double dt) {
  check_setup(state, hams, f);
  const Grid& grid = state.grid();
  const int n_branches = grid.junction.num_branches;
  const double dx = grid.dx;

  StepResult out{GridField(grid), GridField(grid)};

  std::vector<double> origin_gradients(n_branches);
  for (int b = 0; b < n_branches; ++b)
    origin_gradients[b] = (state(b, 1) - state.origin()) / dx;

  for (int b = 0; b < n_branches; ++b) {
    const Hamiltonian& h = hams[b];
    for (int i = 1; i <= grid.i_max; ++i) {
      const double p_minus = (state(b, i) - state(b, i - 1)) / dx;
      // Truncated-end closure: pure upwind flux H^+(p_minus).  Applying the
      // H^- envelope to the backward gradient would invert the coupling to
      // the inner neighbor and lose monotonicity under inflow.
      const double w =
          i < grid.i_max
              ? -numerical_hamiltonian(h, (state(b, i + 1) - state(b, i)) / dx,
                                       p_minus)
              : -h.envelope_plus(p_minus);
      const double next = state(b, i) + dt * w;
      if (!std::isfinite(next))
        throw NumericalError("scheme blow-up at branch " + std::to_string(b + 1) +
                             " node " + std::to_string(i));
      out.w.set(b, i, w);
      out.next.set(b, i, next);
    }
  }

  const double w0 = -f.value(origin_gradients);
  const double next0 = state.origin() + dt * w0;
  if (!std::isfinite(next0)) throw NumericalError("scheme blow-up at the origin");
  out.w.set_origin(w0);
  out.next.set_origin(next0);
  return out;
}

GridField time_derivative_field(const GridField& state,
                                std::span<const Hamiltonian> hams,
                                const JunctionFunction& f) {
  return scheme_step(state, hams, f, 0.0).w;
}

CflData compute_cfl(const GridField& u0, std::span<const Hamiltonian> hams,
                    const JunctionFunction& f) {
  check_setup(u0, hams, f);
  const Grid& grid = u0.grid();
  const int n = grid.junction.num_branches;

  const GridField w = time_derivative_field(u0, hams, f);
  double m0 = w.origin(), big_m0 = w.origin();
  for (int b = 0; b < n; ++b)
    for (int i = 1; i <= grid.i_max; ++i) {
      m0 = std::min(m0, w(b, i));
      big_m0 = std::max(big_m0, w(b, i));
    }
  if (!std::isfinite(m0) || !std::isfinite(big_m0))
    throw DataError("compute_cfl: initial time derivative is not finite");

  CflData out;
  out.bounds.m0 = m0;
  out.bounds.M0 = big_m0;
  out.bounds.lower.resize(n);
  out.bounds.upper.resize(n);
  out.bounds.lower_origin.resize(n);

  for (int b = 0; b < n; ++b) {
    const Hamiltonian& h = hams[b];
    const double a_min = h.min_value();
    const double eq_tol = 1e-9 * std::max(1.0, std::abs(a_min));
    // Degenerate case -m0 = A_a: shift the level by one.
    const double level = (-m0 > a_min + eq_tol) ? -m0 : -m0 + 1.0;
    out.bounds.lower[b] = h.inverse_minus(level);
    out.bounds.upper[b] = h.inverse_plus(level);
  }

  LowerInverse li = lower_inverse(f, -m0);
  std::optional<LowerInverse> li_shift;
  for (int b = 0; b < n; ++b) {
    double p0b = li.feasible ? li.p[b] : kInf;
    const double eq_tol = 1e-9 * std::max(1.0, std::abs(out.bounds.upper[b]));
    if (!li.feasible || !(p0b < out.bounds.upper[b] - eq_tol)) {
      if (!li_shift) li_shift = lower_inverse(f, -m0 + 1.0);
      p0b = li_shift->feasible ? li_shift->p[b] : out.bounds.lower[b];
    }
    if (!std::isfinite(p0b)) p0b = out.bounds.lower[b];
    out.bounds.lower_origin[b] = p0b;
  }

  for (int b = 0; b < n; ++b)
    out.sup_hamiltonian_speed =
        std::max(out.sup_hamiltonian_speed,
                 hams[b].sup_abs_deriv(out.bounds.lower[b], out.bounds.upper[b]));
  out.sup_junction_divergence = sup_neg_divergence(f, out.bounds.origin_box());

  const double denom =
      std::max(out.sup_hamiltonian_speed, out.sup_junction_divergence);
  out.dt_max = denom > 0.0 ? grid.dx / denom : kInf;
  return out;
}

ModifiedHamiltonian build_modified_hamiltonian(const Hamiltonian& h,
                                               double lower, double upper) {
  if (!(std::isfinite(lower) && std::isfinite(upper) && lower <= upper))
    throw DataError("build_modified_hamiltonian: bounds must be finite");
  const double c = h.sup_abs_deriv(lower, upper);
  auto eval = [h, lower, upper, c](double p) {
    if (p < lower) return h(lower) - 0.5 * c * (p - lower);
    if (p > upper) return h(upper) + 0.5 * c * (p - upper);
    return h(p);
  };
  auto deriv = [h, lower, upper, c](double p) {
    if (p < lower) return -0.5 * c;
    if (p > upper) return 0.5 * c;
    return h.deriv(p);
  };
  Hamiltonian clamped = Hamiltonian::from_parts(
      eval, deriv, h.argmin(), h.min_value(), std::nullopt,
      h.convexity_modulus());
  return ModifiedHamiltonian{h, lower, upper, c, clamped};
}

Trajectory run_scheme(const GridField& u0, std::span<const Hamiltonian> hams,
                      const JunctionFunction& f, const SchemeConfig& config,
                      const GradientBounds& bounds, const RunOptions& options) {
  check_setup(u0, hams, f);
  if (config.dt <= 0.0) throw DataError("run_scheme: dt must be positive");
  const Grid& grid = u0.grid();
  const int n = grid.junction.num_branches;
  const double dx = grid.dx;
  const double dt = config.dt;
  const int n_steps = config.n_steps();

  Trajectory traj{{}, {}, u0, u0, {}, config};
  traj.times.reserve(n_steps + 1);
  traj.times.push_back(0.0);
  if (options.store_states) traj.states.push_back(u0);

  Monitors& mon = traj.monitors;
  if (options.stability_c0) {
    mon.stability_c0 = *options.stability_c0;
  } else {
    double l0 = 0.0;
    for (int b = 0; b < n; ++b)
      for (int i = 0; i < grid.i_max; ++i)
        l0 = std::max(l0, std::abs(u0.forward_gradient(b, i)));
    std::optional<double> limiter;
    if (auto* fa = dynamic_cast<const FluxLimitedF*>(&f);
        fa && std::isfinite(fa->limiter()))
      limiter = fa->limiter();
    mon.stability_c0 = stability_constant(l0, hams, f, limiter);
  }

  const double grad_slack = 1e-9;
  auto check_gradients = [&](const GridField& state) {
    for (int b = 0; b < n; ++b) {
      for (int i = 0; i < grid.i_max; ++i) {
        const double p = state.forward_gradient(b, i);
        const double lo = i == 0 ? bounds.lower_origin[b] : bounds.lower[b];
        const double excess =
            std::max(lo - p, p - bounds.upper[b]);
        if (excess > grad_slack) {
          ++mon.grad_violations;
          mon.max_grad_excess = std::max(mon.max_grad_excess, excess);
        }
      }
    }
  };

  GridField state = u0;
  check_gradients(state);
  for (int step = 0; step < n_steps; ++step) {
    StepResult res = scheme_step(state, hams, f, dt);

    // Extrema of the discrete time derivative.
    double mn = res.w.origin(), Mn = res.w.origin();
    for (int b = 0; b < n; ++b)
      for (int i = 1; i <= grid.i_max; ++i) {
        mn = std::min(mn, res.w(b, i));
        Mn = std::max(Mn, res.w(b, i));
      }
    if (!mon.m.empty()) {
      if (mn < mon.m.back() - 1e-12 || Mn > mon.M.back() + 1e-12)
        ++mon.monotone_violations;
    }
    mon.m.push_back(mn);
    mon.M.push_back(Mn);

    // Per-step CFL margin D_{i,+} <= dx/dt, measured on the gradient
    // intervals swept between consecutive states.
    if (options.monitor_dplus) {
      double dmax = 0.0;
      for (int b = 0; b < n; ++b)
        for (int i = 0; i < grid.i_max; ++i)
          dmax = std::max(dmax, interval_sup_deriv(
                                    hams[b], state.forward_gradient(b, i),
                                    res.next.forward_gradient(b, i)));
      // Origin contribution: -div F over the box swept by the origin
      // gradients.
      Box swept;
      swept.lo.resize(n);
      swept.hi.resize(n);
      for (int b = 0; b < n; ++b) {
        const double a = state.forward_gradient(b, 0);
        const double c = res.next.forward_gradient(b, 0);
        swept.lo[b] = std::min(a, c);
        swept.hi[b] = std::max(a, c);
      }
      dmax = std::max(dmax, sup_neg_divergence(f, swept, 3, 0));
      mon.d_margin.push_back(dmax * dt / dx);
      if (dmax > dx / dt * (1.0 + 1e-9)) ++mon.dplus_violations;
    }

    // Gradient bound at the current step's own level (-min W^n).
    if (options.monitor_prop33) {
      const double level = -mn;
      LowerInverse li = lower_inverse(f, level);
      for (int b = 0; b < n; ++b) {
        const double hi_b = hams[b].inverse_plus(level);
        const double lo_b = hams[b].inverse_minus(level);
        for (int i = 0; i < grid.i_max; ++i) {
          const double p = state.forward_gradient(b, i);
          const double lo = i == 0 ? (li.feasible ? li.p[b] : -kInf) : lo_b;
          if (p < lo - 1e-8 || p > hi_b + 1e-8) ++mon.prop33_violations;
        }
      }
    }

    mon.w = std::move(res.w);
    state = std::move(res.next);
    const double t = (step + 1) * dt;
    traj.times.push_back(t);

    // Stability |u - u0| <= C0 t.
    {
      const double budget = mon.stability_c0 * t + 1e-12;
      double worst = std::abs(state.origin() - u0.origin());
      for (int b = 0; b < n; ++b)
        for (int i = 1; i <= grid.i_max; ++i)
          worst = std::max(worst, std::abs(state(b, i) - u0(b, i)));
      if (worst > budget) {
        ++mon.stability_violations;
        mon.max_stability_excess =
            std::max(mon.max_stability_excess, worst - budget);
      }
    }

    check_gradients(state);
    if (options.store_states) traj.states.push_back(state);
  }
  traj.final_state = std::move(state);
  return traj;
}

double stability_constant(double u0_lipschitz,
                          std::span<const Hamiltonian> hams,
                          const JunctionFunction& f,
                          std::optional<double> limiter) {
  const double l0 = std::abs(u0_lipschitz);
  double c0 = 0.0;
  if (limiter && std::isfinite(*limiter)) c0 = std::abs(*limiter);
  for (const auto& h : hams) c0 = std::max(c0, h.sup_abs_value(-l0, l0));
  Box box{std::vector<double>(f.arity(), -l0), std::vector<double>(f.arity(), l0)};
  c0 = std::max(c0, sup_abs_value(f, box));
  return c0;
}

bool comparison_preserved(const GridField& u0, const GridField& v0,
                          std::span<const Hamiltonian> hams,
                          const JunctionFunction& f, double dt, int steps,
                          double* max_violation) {
  GridField u = u0, v = v0;
  const Grid& grid = u.grid();
  auto gap = [&](const GridField& a, const GridField& b) {
    double g = a.origin() - b.origin();
    for (int br = 0; br < grid.junction.num_branches; ++br)
      for (int i = 1; i <= grid.i_max; ++i) g = std::max(g, a(br, i) - b(br, i));
    return g;
  };
  double worst = gap(u, v);
  for (int s = 1; s <= steps; ++s) {
    u = scheme_step(u, hams, f, dt).next;
    v = scheme_step(v, hams, f, dt).next;
    worst = std::max(worst, gap(u, v));
  }
  if (max_violation) *max_violation = worst;
  return worst <= 1e-13;
}

StaggeredField extract_conservation_field(const GridField& u) {
  const Grid& grid = u.grid();
  StaggeredField out{grid, {}};
  out.v.assign(grid.junction.num_branches, std::vector<double>(grid.i_max));
  for (int b = 0; b < grid.junction.num_branches; ++b)
    for (int i = 0; i < grid.i_max; ++i)
      out.v[b][i] = u.forward_gradient(b, i);
  return out;
}

double conservation_identity_defect(const GridField& prev,
                                    const GridField& next,
                                    std::span<const Hamiltonian> hams,
                                    const JunctionFunction& f, double dt) {
  const Grid& grid = prev.grid();
  const int n = grid.junction.num_branches;
  const double dx = grid.dx;
  const StaggeredField vp = extract_conservation_field(prev);
  const StaggeredField vn = extract_conservation_field(next);

  std::vector<double> origin_gradients(n);
  for (int b = 0; b < n; ++b) origin_gradients[b] = vp.v[b][0];
  const double origin_flux = f.value(origin_gradients);

  double defect = 0.0;
  for (int b = 0; b < n; ++b) {
    for (int cell = 0; cell + 1 < grid.i_max; ++cell) {
      const double flux_hi =
          numerical_hamiltonian(hams[b], vp.v[b][cell + 1], vp.v[b][cell]);
      const double flux_lo =
          cell == 0 ? origin_flux
                    : numerical_hamiltonian(hams[b], vp.v[b][cell],
                                            vp.v[b][cell - 1]);
      const double expected = vp.v[b][cell] - dt / dx * (flux_hi - flux_lo);
      defect = std::max(defect, std::abs(vn.v[b][cell] - expected));
    }
  }
  return defect;
}

double bln_flux_limiter(const Hamiltonian& h, double v_b) {
  return h.envelope_plus(v_b);
}

}  // namespace hjnet
