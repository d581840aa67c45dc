#pragma once

#include <iosfwd>
#include <string>

#include "hjnet/problem.hpp"

namespace hjnet {

/// Full-precision decimal rendering (17 significant digits).
std::string format_g17(double v);

/// Snapshot CSV: columns t,branch,i,x,U,W,p_plus (header mandatory, LF line
/// endings, branches labeled 1..N).  W is the discrete time derivative the
/// scheme produces from each stored state; the last node reuses its backward
/// gradient for p_plus.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          std::span<const Hamiltonian> hamiltonians,
                          const JunctionFunction& f);

/// Convergence table CSV: dx,dt,sup_error,runtime_seconds.
void write_convergence_csv(std::ostream& out,
                           const ConvergenceResult& result);

}  // namespace hjnet
