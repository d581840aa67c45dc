#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "hjnet/hamiltonian.hpp"

namespace hjnet {

/// Axis-aligned box in R^N.
struct Box {
  std::vector<double> lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
  double clamp(int axis, double v) const {
    return std::min(std::max(v, lo[axis]), hi[axis]);
  }
  bool contains(std::span<const double> p, double slack = 0.0) const;
};

/// Junction function F(p_1, ..., p_N): couples the branch gradients at the
/// origin.  Non-increasing in every coordinate; coercive variants blow up
/// when negative parts grow.
class JunctionFunction {
 public:
  virtual ~JunctionFunction() = default;
  virtual int arity() const = 0;
  virtual double value(std::span<const double> p) const = 0;
  /// dF/dp_beta; central finite difference unless overridden.
  virtual double partial(int beta, std::span<const double> p) const;
  /// Known global infimum (-inf when unknown).
  virtual double infimum() const;
  virtual std::unique_ptr<JunctionFunction> clone() const = 0;

  double operator()(std::span<const double> p) const { return value(p); }
};

/// Flux-limited junction function F_A(p) = max(A, max_a H_a^-(p_a)).
class FluxLimitedF final : public JunctionFunction {
 public:
  FluxLimitedF(std::vector<Hamiltonian> hamiltonians, double limiter);

  int arity() const override { return static_cast<int>(hams_.size()); }
  double value(std::span<const double> p) const override;
  double infimum() const override;
  std::unique_ptr<JunctionFunction> clone() const override;

  double limiter() const { return limiter_; }
  const Hamiltonian& hamiltonian(int alpha) const { return hams_[alpha]; }

 private:
  std::vector<Hamiltonian> hams_;
  double limiter_;
};

/// General junction function given as a callable (plus optional analytic
/// partial derivatives).
class GeneralF final : public JunctionFunction {
 public:
  using Eval = std::function<double(std::span<const double>)>;
  using Partial = std::function<double(int, std::span<const double>)>;

  GeneralF(int arity, Eval eval, Partial partials = nullptr)
      : arity_(arity), eval_(std::move(eval)), partials_(std::move(partials)) {}

  /// Wrap any junction function behind the general interface with
  /// finite-difference partials.
  static GeneralF wrap(const JunctionFunction& f);

  int arity() const override { return arity_; }
  double value(std::span<const double> p) const override { return eval_(p); }
  double partial(int beta, std::span<const double> p) const override;
  std::unique_ptr<JunctionFunction> clone() const override;

 private:
  int arity_;
  Eval eval_;
  Partial partials_;
};

/// Extension of a base junction function outside a gradient box Q0.
/// Inside Q0 it equals the base exactly; outside, each escaped coordinate is
/// clamped back to Q0 and charged a linear penalty with slope C_a, where
///   C_a = min over Q0 of (-dF/dp_a),
/// so the extension stays non-increasing and its negative divergence never
/// exceeds sup over Q0 of (-div F).
class ModifiedF final : public JunctionFunction {
 public:
  ModifiedF(std::unique_ptr<JunctionFunction> base, Box q0,
            std::vector<double> slopes);

  int arity() const override { return static_cast<int>(slopes_.size()); }
  double value(std::span<const double> p) const override;
  double infimum() const override { return base_->infimum(); }
  std::unique_ptr<JunctionFunction> clone() const override;

  const Box& box() const { return q0_; }
  const std::vector<double>& slopes() const { return slopes_; }
  const JunctionFunction& base() const { return *base_; }

 private:
  std::unique_ptr<JunctionFunction> base_;
  Box q0_;
  std::vector<double> slopes_;
};

/// Minimal flux limiter A0 = max_a min H_a.
double minimal_limiter(std::span<const Hamiltonian> hamiltonians);

/// Coordinate-wise lower thresholds of the sublevel set {F <= K}:
/// F(p) <= K implies p_a >= p[a].  Exact for FluxLimitedF (pi^-(K)); for
/// general F computed by bisection with the other coordinates saturated.
struct LowerInverse {
  std::vector<double> p;
  bool feasible = true;  // false when K < inf F (thresholds are +inf)
};
LowerInverse lower_inverse(const JunctionFunction& f, double K);

/// Build the clamped linear extension of F outside Q0.  The slopes C_a are
/// found by dense sampling of -dF/dp_a over Q0 (with local refinement);
/// a strictly negative C_a (beyond tolerance) violates monotonicity.
ModifiedF build_modified_f(const JunctionFunction& f, Box q0,
                           int samples_per_axis = 33);

struct FValidation {
  std::vector<double> max_partial;  // per coordinate, over samples
  bool strictly_decreasing = true;  // hypothesis (F)
  bool non_increasing = true;       // weaker hypothesis
  bool coercive_trend = true;       // along the ray p = -t * 1
};

/// Sampled monotonicity and coercivity report over a box.
FValidation validate_f(const JunctionFunction& f, const Box& box,
                       int samples_per_axis);

/// Max over a sampled box of -div F = sum_a (-dF/dp_a), with one local
/// refinement pass around the best sample.  Central differences are used at
/// the box faces as well, so kinks sitting on the boundary are seen.
double sup_neg_divergence(const JunctionFunction& f, const Box& box,
                          int samples_per_axis = 33, int refine_rounds = 2);

/// Max of |F| over a sampled box (lattice plus local refinement).
double sup_abs_value(const JunctionFunction& f, const Box& box,
                     int samples_per_axis = 33);

}  // namespace hjnet
