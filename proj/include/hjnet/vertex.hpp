#pragma once

#include <cstdint>
#include <vector>

#include "hjnet/hamiltonian.hpp"
#include "hjnet/junction.hpp"

namespace hjnet {

struct VertexValueGrad {
  double value = 0.0;
  double gx = 0.0;  // d/dx G
  double gy = 0.0;  // d/dy G
};

struct VertexHessian {
  double dxx = 0.0, dyy = 0.0, dxy = 0.0;
  bool foliation = false;  // false in the linear region (G affine there)
};

struct VertexCertification {
  double gamma = 0.0, limiter = 0.0, radius = 0.0;
  long sample_count = 0;
  double max_diagonal = 0.0;       // max G(x,x); budget gamma
  double max_compatibility = 0.0;  // max H(y,-Gy) - H(x,Gx); budget gamma
  double max_gradient_sum = 0.0;   // estimate of the constant C_K
  double hessian_sup = 0.0;        // sup over sampled foliation points
  double hessian_fd_max_rel_err = 0.0;
  double envelope_identity_defect = 0.0;  // max |H(Gx) - lambda|
  double lambda_interface_defect = 0.0;   // lambda continuity at the interface
  long superlinearity_violations = 0;     // scaled ratio decreased
  double superlinearity_min_growth = 0.0; // min ratio gain on foliation dirs
  bool diagonal_ok() const { return max_diagonal <= gamma + 1e-9; }
  bool compatibility_ok() const { return max_compatibility <= gamma + 1e-9; }
};

/// Two-point test function G on the junction, replacing |x-y|^2 in doubling
/// arguments.  Built for C^2 uniformly convex Hamiltonians (each recentered
/// so its argmin is 0) and a flux limiter strictly above the minimal one:
/// the effective limiter is A_gamma = max(A, A0 + gamma).
///
/// Cross-branch pairs use the level representation
///   G(x,y) = sup_{lambda >= A_gamma} [pi_a^+(lambda) x - pi_b^-(lambda) y
///            - lambda] + A_gamma,
/// where the optimal level solves (pi_a^+)'(lambda) x - (pi_b^-)'(lambda) y
/// = 1 when that equation has a root above A_gamma (foliation region) and
/// sits at A_gamma otherwise (linear region).  Same-branch pairs use the
/// convex conjugate of max(A_gamma, H) whose kink at the bottom is smoothed
/// by a C^1 two-quadratic blend on the level band [A_gamma, A_gamma + band].
class VertexTestFunction {
 public:
  VertexTestFunction(std::vector<Hamiltonian> hamiltonians, double flux_limiter,
                     double gamma, double diagnostic_radius);

  int num_branches() const { return static_cast<int>(hams_.size()); }
  double gamma() const { return gamma_; }
  double limiter() const { return a_gamma_; }  // A_gamma
  double minimal_limiter_a0() const { return a0_; }
  double radius() const { return radius_; }
  const Hamiltonian& hamiltonian(int b) const { return hams_[b]; }

  /// Level lambda(x, y) for a cross-branch pair; A_gamma in the linear
  /// region.  `foliation`, when given, reports which region was hit.
  double solve_lambda(int branch_x, double x, int branch_y, double y,
                      bool* foliation = nullptr) const;

  VertexValueGrad value_grad(JunctionPoint x, JunctionPoint y) const;

  /// Closed-form second derivatives at a cross-branch pair (zeros with
  /// foliation = false in the linear region).
  VertexHessian hessian(int branch_x, double x, int branch_y, double y) const;

  /// Branch-wise derivative vectors at the origin, used by the gradient
  /// compatibility check through F_{A_gamma}.
  std::vector<double> origin_gradient_x(JunctionPoint y) const;
  std::vector<double> origin_gradient_y(JunctionPoint x) const;

  VertexCertification certify(long sample_count, std::uint64_t seed) const;

 private:
  struct Well {  // smoothed bottom of max(A_gamma, H) on one branch
    double band = 0.0;       // level band actually used (<= gamma/2)
    double l = 0.0, r = 0.0; // knots where the blend meets H
    double c1 = 0.0, c2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
  };

  double smoothed(int b, double p) const;
  double smoothed_deriv(int b, double p) const;
  /// Conjugate sup_p [p q - smoothed(p)]; argmax reported through p_star.
  double conjugate(int b, double q, double* p_star) const;

  std::vector<Hamiltonian> hams_;
  std::vector<Well> wells_;
  double gamma_ = 0.0, a_gamma_ = 0.0, a0_ = 0.0, radius_ = 0.0;
};

}  // namespace hjnet
