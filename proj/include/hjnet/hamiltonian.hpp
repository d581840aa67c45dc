#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "hjnet/errors.hpp"
#include "hjnet/numeric.hpp"

namespace hjnet {

struct EnvelopePair;

/// A quasi-convex Hamiltonian: non-increasing left of its argmin p0,
/// non-decreasing right of it.  Instances are immutable after construction
/// and cheap to copy (shared state), so they can be shared across threads.
///
/// The monotone envelopes H^- / H^+ and their generalized inverses
///   pi^+(a) = sup { p : H^+(p) = max(a, min H) }
///   pi^-(a) = inf { p : H^-(p) = max(a, min H) }
/// are derived from the evaluation callable; a = +inf maps to +/-inf.
class Hamiltonian {
 public:
  /// Build from a callable.  The argmin is located by golden section inside
  /// [bracket_lo, bracket_hi]; a coarse unimodality check runs first.
  static Hamiltonian from_function(
      std::function<double(double)> eval,
      std::optional<std::function<double(double)>> deriv, double bracket_lo,
      double bracket_hi,
      std::optional<std::function<double(double)>> deriv2 = std::nullopt,
      std::optional<double> convexity_modulus = std::nullopt);

  /// Direct construction with a known argmin and minimum; the caller
  /// vouches for quasi-convexity (used for piecewise-defined Hamiltonians).
  static Hamiltonian from_parts(
      std::function<double(double)> eval,
      std::optional<std::function<double(double)>> deriv, double p0,
      double min_value,
      std::optional<std::function<double(double)>> deriv2 = std::nullopt,
      std::optional<double> convexity_modulus = std::nullopt);

  // Built-ins used throughout the tests and the harness.
  static Hamiltonian quadratic(double center, double offset = 0.0);
  static Hamiltonian absolute_value(double center, double offset = 0.0);
  /// max(-2p, p^2): quasi-convex, asymmetric, minimum 0 at p = 0.
  static Hamiltonian asymmetric_example();

  double operator()(double p) const { return impl_->eval(p); }
  /// Analytic derivative when supplied, central finite difference otherwise.
  double deriv(double p) const;
  double deriv2(double p) const;
  bool has_analytic_deriv() const { return impl_->deriv.has_value(); }

  double argmin() const { return impl_->p0; }
  double min_value() const { return impl_->min_value; }
  std::optional<double> convexity_modulus() const { return impl_->modulus; }

  double envelope_minus(double p) const {
    return p <= impl_->p0 ? impl_->eval(p) : impl_->min_value;
  }
  double envelope_plus(double p) const {
    return p >= impl_->p0 ? impl_->eval(p) : impl_->min_value;
  }
  EnvelopePair envelopes() const;

  double inverse_plus(double a) const;
  double inverse_minus(double a) const;

  /// Same Hamiltonian recentered so that its argmin is 0; shift = old argmin.
  Hamiltonian tilt_normalized(double* shift = nullptr) const;

  /// sup |H'| over [lo, hi]: analytic samples where available, finite
  /// differences otherwise; 129 samples plus local refinement.
  double sup_abs_deriv(double lo, double hi) const;

  /// sup |H| over [lo, hi] by sampling (129 points plus refinement).
  double sup_abs_value(double lo, double hi) const;

  // Optional declared Lipschitz bound on a stated interval, checked by
  // validate_hamiltonian when present.
  void declare_lipschitz(double bound, double lo, double hi);
  std::optional<double> declared_lipschitz() const;

 private:
  struct Impl {
    std::function<double(double)> eval;
    std::optional<std::function<double(double)>> deriv;
    std::optional<std::function<double(double)>> deriv2;
    double p0 = 0.0;
    double min_value = 0.0;
    std::optional<double> modulus;
    std::optional<double> lipschitz_bound;
    double lipschitz_lo = 0.0, lipschitz_hi = 0.0;
  };
  std::shared_ptr<const Impl> impl_;
  explicit Hamiltonian(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
};

/// The two monotone envelopes of a quasi-convex Hamiltonian.
struct EnvelopePair {
  std::function<double(double)> minus;  // non-increasing part
  std::function<double(double)> plus;   // non-decreasing part
};

struct HamiltonianValidation {
  bool lipschitz_ok = true;
  double lipschitz_estimate = 0.0;
  bool coercive_ok = true;
  bool unimodal_ok = true;
  int sign_changes = 0;  // of successive sampled differences
  bool passed() const { return lipschitz_ok && coercive_ok && unimodal_ok; }
};

/// Sampled check of regularity, coercivity trend and unimodality on
/// [lo, hi] with the given number of samples (>= 3).
HamiltonianValidation validate_hamiltonian(const Hamiltonian& h, double lo,
                                           double hi, int samples);

/// Same check on a raw candidate that may not be constructible as a
/// Hamiltonian (e.g. rejected for non-unimodality).
HamiltonianValidation validate_hamiltonian(
    const std::function<double(double)>& eval, double lo, double hi,
    int samples, std::optional<double> declared_lipschitz = std::nullopt);

/// Golden-section argmin on a bracket; tolerance num::kTolX.
double argmin_unimodal(const std::function<double(double)>& f, double lo,
                       double hi);

}  // namespace hjnet
