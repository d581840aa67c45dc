#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hjnet/junction.hpp"
#include "hjnet/junction_function.hpp"

namespace hjnet {

/// Time discretization for one run.  dt must respect the CFL bound computed
/// from the initial data (compute_cfl); callers usually set
/// dt = cfl_safety * dt_max.
struct SchemeConfig {
  double dx = 0.0;
  double dt = 0.0;
  double horizon = 0.0;
  double cfl_safety = 0.9;
  int n_steps() const { return static_cast<int>(std::floor(horizon / dt + 1e-12)); }
};

/// Discrete gradient bounds derived from the initial data: interior
/// gradients live in [lower, upper] per branch, origin gradients in
/// [lower_origin, upper].
struct GradientBounds {
  std::vector<double> lower, upper, lower_origin;
  double m0 = 0.0;  // inf of the initial discrete time derivative
  double M0 = 0.0;
  Box origin_box() const { return Box{lower_origin, upper}; }
};

struct CflData {
  GradientBounds bounds;
  double dt_max = 0.0;
  double sup_hamiltonian_speed = 0.0;   // max_a sup |H_a'| over [lower, upper]
  double sup_junction_divergence = 0.0; // sup of -div F over the origin box
};

/// Godunov-type numerical Hamiltonian max(H^-(p_plus), H^+(p_minus)).
double numerical_hamiltonian(const EnvelopePair& env, double p_plus,
                             double p_minus);
double numerical_hamiltonian(const Hamiltonian& h, double p_plus,
                             double p_minus);

struct StepResult {
  GridField next;
  GridField w;  // discrete time derivative (U^{n+1} - U^n) / dt
};

/// One explicit step.  Interior nodes are upwinded through the envelope
/// splitting; the origin is driven by F applied to the N outgoing
/// gradients; the truncated end is closed with the upwind flux
/// H^+(backward gradient), which keeps every update monotone.
/// All updates read the frozen previous state.
StepResult scheme_step(const GridField& state,
                       std::span<const Hamiltonian> hamiltonians,
                       const JunctionFunction& f, double dt);

/// The discrete time derivative the scheme would produce from this state
/// (independent of dt).
GridField time_derivative_field(const GridField& state,
                                std::span<const Hamiltonian> hamiltonians,
                                const JunctionFunction& f);

/// Gradient bounds and the CFL time-step bound, all from the initial data:
/// one dry-run step gives m0; the generalized inverses at -m0 give the
/// gradient box (with a +1 shift in the degenerate equality cases); dt_max
/// is dx over the larger of sup |H'| and sup(-div F) on that box.
CflData compute_cfl(const GridField& u0,
                    std::span<const Hamiltonian> hamiltonians,
                    const JunctionFunction& f);

/// Hamiltonian clamped to [lower, upper] and extended linearly with slopes
/// -C/2 and +C/2, C = sup |H'| over the clamp interval.  Coincides with the
/// base inside the interval and is globally Lipschitz with constant <= C.
struct ModifiedHamiltonian {
  Hamiltonian base;
  double lower = 0.0, upper = 0.0;
  double slope = 0.0;  // C
  Hamiltonian clamped;
};
ModifiedHamiltonian build_modified_hamiltonian(const Hamiltonian& h,
                                               double lower, double upper);

/// Per-run monitor data.  Violations are counted, never fatal; strict
/// handling is the caller's policy.
struct Monitors {
  std::optional<GridField> w;      // last discrete time-derivative field
  std::vector<double> m, M;        // per-step extrema of W
  std::vector<double> d_margin;    // per-step max of D_{i,+} * dt / dx
  long grad_violations = 0;        // gradient left its bound interval
  long monotone_violations = 0;    // m^n decreased or M^n increased
  long dplus_violations = 0;       // D_{i,+} exceeded dx/dt
  long stability_violations = 0;   // |u - u0| exceeded C0 t
  long prop33_violations = 0;      // gradient bound at level -min W^n failed
  double max_grad_excess = 0.0;
  double max_stability_excess = 0.0;
  double stability_c0 = 0.0;
  long total_violations() const {
    return grad_violations + monotone_violations + dplus_violations +
           stability_violations + prop33_violations;
  }
};

struct RunOptions {
  bool store_states = true;
  bool monitor_dplus = true;
  bool monitor_prop33 = true;
  std::optional<double> stability_c0;  // computed from the data when unset
};

struct Trajectory {
  std::vector<double> times;
  std::vector<GridField> states;  // empty unless store_states
  GridField initial;
  GridField final_state;
  Monitors monitors;
  SchemeConfig config;

  const GridField& state_at(int n) const { return states.at(n); }
};

/// March the scheme for n_steps = floor(horizon/dt) steps while recording
/// the Theorem-3.1 monitors against the supplied bounds.
Trajectory run_scheme(const GridField& u0,
                      std::span<const Hamiltonian> hamiltonians,
                      const JunctionFunction& f, const SchemeConfig& config,
                      const GradientBounds& bounds,
                      const RunOptions& options = {});

/// Stability constant C0 = max(|A|, max_a sup_{|p|<=L0} |H_a|,
/// sup_{|p_a|<=L0} |F|), by sampling.  A is ignored when absent/infinite.
double stability_constant(double u0_lipschitz,
                          std::span<const Hamiltonian> hamiltonians,
                          const JunctionFunction& f,
                          std::optional<double> limiter);

/// Evolve an ordered pair and report whether order is preserved for all
/// steps (discrete comparison principle); slack 1e-13.
bool comparison_preserved(const GridField& u0, const GridField& v0,
                          std::span<const Hamiltonian> hamiltonians,
                          const JunctionFunction& f, double dt, int steps,
                          double* max_violation = nullptr);

/// Staggered conservation-law field V_{i+1/2} = (U_{i+1} - U_i)/dx.
struct StaggeredField {
  Grid grid;
  std::vector<std::vector<double>> v;  // [branch][cell], cell i = V_{i+1/2}
  double operator()(int branch, int cell) const { return v[branch][cell]; }
  int cells_per_branch() const { return grid.i_max; }
};
StaggeredField extract_conservation_field(const GridField& u);

/// Max defect of the staggered flux-difference update between two
/// consecutive scheme states (cells 0..i_max-2; an algebraic identity, so
/// the defect is at machine precision).
double conservation_identity_defect(const GridField& prev,
                                    const GridField& next,
                                    std::span<const Hamiltonian> hamiltonians,
                                    const JunctionFunction& f, double dt);

/// Flux limiter equivalent to the BLN boundary datum v_b: A = H^+(v_b).
double bln_flux_limiter(const Hamiltonian& h, double v_b);

}  // namespace hjnet
