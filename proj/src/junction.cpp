#include "hjnet/junction.hpp"

#include <cmath>
#include <string>

namespace hjnet {

double geodesic_distance(const Junction& junction, JunctionPoint x,
                         JunctionPoint y) {
  const int n = junction.num_branches;
  if (x.branch < 0 || x.branch >= n || y.branch < 0 || y.branch >= n)
    throw std::invalid_argument("geodesic_distance: point not on this junction");
  if (x.coordinate < 0.0 || y.coordinate < 0.0)
    throw std::invalid_argument("geodesic_distance: negative coordinate");
  if (x.branch == y.branch) return std::abs(x.coordinate - y.coordinate);
  return x.coordinate + y.coordinate;
}

GridField sample_initial(const Grid& grid,
                         const std::function<double(JunctionPoint)>& u0) {
  GridField field(grid);
  const double at_origin = u0({0, 0.0});
  if (!std::isfinite(at_origin)) throw DataError("initial datum not finite at origin");
  field.set_origin(at_origin);
  for (int b = 0; b < grid.junction.num_branches; ++b) {
    for (int i = 1; i <= grid.i_max; ++i) {
      const double v = u0(grid.node(b, i));
      if (!std::isfinite(v))
        throw DataError("initial datum not finite at branch " +
                        std::to_string(b + 1) + " node " + std::to_string(i));
      field.set(b, i, v);
    }
  }
  return field;
}

}  // namespace hjnet
