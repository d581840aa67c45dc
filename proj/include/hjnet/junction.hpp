#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "hjnet/errors.hpp"

namespace hjnet {

/// A junction: N copies of the half-line glued at a single origin.
/// Branches are indexed 0..N-1 in code; user-facing labels are 1..N.
struct Junction {
  int num_branches = 1;

  explicit Junction(int n) : num_branches(n) {
    if (n < 1) throw DataError("junction needs at least one branch");
  }
};

/// A point on a junction: a branch index and a distance from the origin.
/// All points with coordinate 0 denote the same origin, whatever the branch.
struct JunctionPoint {
  int branch = 0;
  double coordinate = 0.0;
};

/// Geodesic distance: |x-y| on a common branch, |x|+|y| through the origin.
double geodesic_distance(const Junction& junction, JunctionPoint x,
                         JunctionPoint y);

/// Uniform grid on a truncated junction; node i on branch a sits at i*dx.
struct Grid {
  Junction junction;
  double dx = 0.0;
  int i_max = 0;  // last node index; nodes_per_branch = i_max + 1

  Grid(Junction j, double dx_, int i_max_) : junction(j), dx(dx_), i_max(i_max_) {
    if (dx <= 0.0 || i_max < 1) throw DataError("grid needs dx > 0 and i_max >= 1");
  }

  // Truncation at (approximately) length L; i_max*dx matches L within one dx.
  static Grid with_length(Junction j, double dx_, double length) {
    const int imax = static_cast<int>(std::max(1.0, std::ceil(length / dx_ - 1e-9)));
    return Grid(j, dx_, imax);
  }

  int nodes_per_branch() const { return i_max + 1; }
  double coordinate(int i) const { return i * dx; }
  double length() const { return i_max * dx; }
  JunctionPoint node(int branch, int i) const { return {branch, coordinate(i)}; }
};

/// Scalar field on a grid.  The origin value is stored once and shared by
/// every branch, mirroring the identification of node (a, 0) across branches.
class GridField {
 public:
  explicit GridField(const Grid& grid, double fill = 0.0)
      : grid_(grid),
        origin_(fill),
        branch_(grid.junction.num_branches,
                std::vector<double>(grid.i_max, fill)) {}

  const Grid& grid() const { return grid_; }

  double operator()(int branch, int i) const {
    return i == 0 ? origin_ : branch_[branch][i - 1];
  }
  void set(int branch, int i, double v) {
    if (i == 0)
      origin_ = v;
    else
      branch_[branch][i - 1] = v;
  }

  double origin() const { return origin_; }
  void set_origin(double v) { origin_ = v; }

  // Forward gradient (u(i+1) - u(i)) / dx, defined for i = 0..i_max-1.
  double forward_gradient(int branch, int i) const {
    return ((*this)(branch, i + 1) - (*this)(branch, i)) / grid_.dx;
  }

 private:
  Grid grid_;
  double origin_;
  std::vector<std::vector<double>> branch_;
};

/// Sample a pointwise initial datum onto a grid.  The datum must be finite
/// at every node and single-valued at the origin.
GridField sample_initial(const Grid& grid,
                         const std::function<double(JunctionPoint)>& u0);

}  // namespace hjnet
