#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <string>

#include "hjnet/scheme.hpp"

namespace hjnet {

struct HamiltonianSpec {
  std::string type = "quadratic";  // quadratic | absolute | asymmetric
  double center = 0.0;
  double offset = 0.0;
};

struct FluxSpec {
  std::string type = "flux_limited";  // flux_limited | custom
  std::string name = "exp_sum";       // custom function name
  double limiter = -std::numeric_limits<double>::infinity();
  double scale = 1.0;  // exp_sum: F(p) = scale * sum_a exp(-p_a)
};

struct TableKnot {
  double x = 0.0;
  double value = 0.0;
};

struct InitialSpec {
  std::string type = "zero";  // zero | cone | tent | table
  double slope = 1.0;         // cone: slope * d(0, x)
  double height = 1.0;        // tent: max(0, height * (1 - d/width))
  double width = 1.0;
  std::vector<std::vector<TableKnot>> tables;  // per branch, type = table
  std::optional<double> lipschitz;             // declared L0
};

struct ProblemSpec {
  int branches = 2;
  std::vector<HamiltonianSpec> hamiltonians;  // one entry = all branches
  FluxSpec flux;
  InitialSpec initial;
  double horizon = 0.5;
  double radius = 2.0;  // diagnostic window d(0, x) <= radius
  double cfl_safety = 0.9;
  double dx = 0.1;
};

std::vector<Hamiltonian> make_hamiltonians(const ProblemSpec& problem);
std::unique_ptr<JunctionFunction> make_junction_function(
    const ProblemSpec& problem, const std::vector<Hamiltonian>& hams);
/// Initial datum as a function on the junction; reports its Lipschitz bound.
std::function<double(JunctionPoint)> make_initial(const ProblemSpec& problem,
                                                  double* lipschitz);

/// Piecewise-linear random datum with slopes in [-lipschitz, lipschitz],
/// constant beyond `extent`; shared origin value 0.
std::function<double(JunctionPoint)> random_piecewise_linear(
    int branches, double lipschitz, double knot_spacing, double extent,
    std::mt19937_64& rng);

/// Branch truncation so the diagnostic window stays outside the cone of
/// influence: L >= max(radius/0.9, radius + horizon * sup|H'|) + 2 dx,
/// rounded up to a multiple of dx_round (grids of a study then nest).
double choose_truncation(const ProblemSpec& problem,
                         const std::vector<Hamiltonian>& hams,
                         const JunctionFunction& f, double dx_round);

struct PreparedRun {
  Grid grid;
  GridField u0;
  CflData cfl;
  SchemeConfig config;
};
/// Sample the datum on a grid of step dx and truncation L, compute the CFL
/// data and set dt = cfl_safety * dt_max.
PreparedRun prepare_run(const ProblemSpec& problem,
                        std::span<const Hamiltonian> hams,
                        const JunctionFunction& f, double dx,
                        double truncation);

/// Hopf-Lax value min_y [u0(y) + t H*((x-y)/t)] on the line, minimized over
/// |y - x| <= t sup|H'| + 1 by scan plus golden refinement; the conjugate is
/// evaluated by one-dimensional maximization.
double hopf_lax(const std::function<double(double)>& u0_line,
                const Hamiltonian& h, double t, double x, double lipschitz);

/// True when the problem is the glued-line reduction: two branches, equal
/// even Hamiltonians, flux limiter at most the minimal one.
bool glued_line_compatible(const ProblemSpec& problem,
                           const std::vector<Hamiltonian>& hams);
/// Whole-line initial datum of the reduction (branch 1 = positive axis,
/// branch 2 = negative axis).
std::function<double(double)> line_initial(const ProblemSpec& problem);

/// Fine-grid self oracle: the trajectory at dx_fine restricted to coarse
/// nodes by exact index mapping, linear interpolation in time.
struct ReferenceSolution {
  Trajectory fine;
  int ratio = 8;
  double at(double t, int branch, int coarse_i) const;
};
ReferenceSolution reference_solution(const ProblemSpec& problem,
                                     std::span<const Hamiltonian> hams,
                                     const JunctionFunction& f, double dx_fine,
                                     double truncation, int ratio);

struct ConvergenceRow {
  double dx = 0.0, dt = 0.0;
  double sup_error = 0.0;
  double runtime_seconds = 0.0;
};

enum class OracleChoice { kHopfLax, kSelf, kAuto };

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  double fitted_order = 0.0;   // least-squares slope of log e vs log dx
  bool exact = false;          // all errors below 1e-10
  double ratio_spread = 0.0;   // max/min of e / dx^{1/3}
  std::string oracle_used;
};

/// Run the scheme over a strictly decreasing dx list and measure the sup
/// error over the diagnostic window against the chosen oracle.
ConvergenceResult convergence_study(const ProblemSpec& problem,
                                    std::span<const double> dx_list,
                                    OracleChoice oracle, int threads = 1,
                                    int fine_ratio = 8);

/// Sup over stored step times and window nodes of |U - oracle(t, branch, i)|.
double sup_error_vs(const Trajectory& traj, double window,
                    const std::function<double(double, int, int)>& oracle);

}  // namespace hjnet
