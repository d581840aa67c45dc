#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>

namespace hjnet::num {

// Argument-space tolerance for roots, argmins and inverse functions.
inline constexpr double kTolX = 1e-10;
// Function-value tolerance used by sampled identities.
inline constexpr double kTolF = 1e-9;
// Widest bracket the doubling searches are allowed to reach before an
// inverse is reported as infinite.
inline constexpr double kBracketCap = 1152921504606846976.0;  // 2^60

// Step for central finite differences, relative to the evaluation point.
inline double fd_step(double p) { return 1e-6 * std::max(1.0, std::abs(p)); }

inline double central_diff(const std::function<double(double)>& f, double p) {
  const double h = fd_step(p);
  return (f(p + h) - f(p - h)) / (2.0 * h);
}

// Golden-section minimizer on [lo, hi]; assumes a unimodal objective.
double golden_min(const std::function<double(double)>& f, double lo, double hi,
                  double tol = kTolX);

inline double golden_max(const std::function<double(double)>& f, double lo,
                         double hi, double tol = kTolX) {
  return golden_min([&](double p) { return -f(p); }, lo, hi, tol);
}

// Boundary between {pred true} and {pred false} for a predicate that is true
// on [lo, b) and false on (b, hi].  Returns b up to tol.
double bisect_predicate(const std::function<bool(double)>& pred, double lo,
                        double hi, double tol = kTolX);

// Least-squares slope of y against x.
double lsq_slope(std::span<const double> x, std::span<const double> y);

}  // namespace hjnet::num
