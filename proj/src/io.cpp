#include "hjnet/io.hpp"

#include <cstdio>
#include <ostream>

namespace hjnet {

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          std::span<const Hamiltonian> hamiltonians,
                          const JunctionFunction& f) {
  out << "t,branch,i,x,U,W,p_plus\n";
  const Grid& grid = traj.initial.grid();
  for (std::size_t s = 0; s < traj.states.size(); ++s) {
    const GridField& state = traj.states[s];
    const GridField w = time_derivative_field(state, hamiltonians, f);
    const double t = traj.times[s];
    for (int b = 0; b < grid.junction.num_branches; ++b) {
      for (int i = 0; i <= grid.i_max; ++i) {
        const double p_plus = i < grid.i_max
                                  ? state.forward_gradient(b, i)
                                  : state.forward_gradient(b, i - 1);
        out << format_g17(t) << ',' << (b + 1) << ',' << i << ','
            << format_g17(grid.coordinate(i)) << ',' << format_g17(state(b, i))
            << ',' << format_g17(w(b, i)) << ',' << format_g17(p_plus) << '\n';
      }
    }
  }
}

void write_convergence_csv(std::ostream& out, const ConvergenceResult& result) {
  out << "dx,dt,sup_error,runtime_seconds\n";
  for (const auto& row : result.rows) {
    out << format_g17(row.dx) << ',' << format_g17(row.dt) << ','
        << format_g17(row.sup_error) << ',' << format_g17(row.runtime_seconds)
        << '\n';
  }
}

}  // namespace hjnet
