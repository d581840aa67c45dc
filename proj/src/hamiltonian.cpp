#include "hjnet/hamiltonian.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace hjnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Counts sign changes of successive differences, ignoring flat steps.
int difference_sign_changes(const std::vector<double>& values) {
  int changes = 0;
  int last_sign = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    const double d = values[k] - values[k - 1];
    if (d == 0.0) continue;
    const int sign = d > 0.0 ? 1 : -1;
    if (last_sign != 0 && sign != last_sign) ++changes;
    last_sign = sign;
  }
  return changes;
}

// Max of |g| over [lo, hi]: dense samples plus one golden refinement pass
// around the best sample.
double sampled_sup(const std::function<double(double)>& g, double lo,
                   double hi, int samples = 129) {
  if (hi <= lo) return std::abs(g(lo));
  double best = -kInf;
  int best_k = 0;
  const double step = (hi - lo) / (samples - 1);
  for (int k = 0; k < samples; ++k) {
    const double v = std::abs(g(lo + k * step));
    if (v > best) {
      best = v;
      best_k = k;
    }
  }
  const double a = lo + std::max(0, best_k - 1) * step;
  const double b = lo + std::min(samples - 1, best_k + 1) * step;
  const double refined =
      num::golden_max([&](double p) { return std::abs(g(p)); }, a, b);
  return std::max(best, std::abs(g(refined)));
}

}  // namespace

double argmin_unimodal(const std::function<double(double)>& f, double lo,
                       double hi) {
  return num::golden_min(f, lo, hi);
}

Hamiltonian Hamiltonian::from_function(
    std::function<double(double)> eval,
    std::optional<std::function<double(double)>> deriv, double bracket_lo,
    double bracket_hi, std::optional<std::function<double(double)>> deriv2,
    std::optional<double> convexity_modulus) {
  if (!(bracket_lo < bracket_hi))
    throw ValidationError("hamiltonian: empty argmin bracket");
  // Coarse unimodality screen before trusting golden section.
  std::vector<double> probe;
  const int n = 65;
  for (int k = 0; k < n; ++k) {
    const double p = bracket_lo + (bracket_hi - bracket_lo) * k / (n - 1);
    const double v = eval(p);
    if (!std::isfinite(v)) throw DataError("hamiltonian: non-finite evaluation");
    probe.push_back(v);
  }
  if (difference_sign_changes(probe) > 1)
    throw ValidationError("hamiltonian: sampled values are not unimodal");

  auto impl = std::make_shared<Impl>();
  impl->eval = std::move(eval);
  impl->deriv = std::move(deriv);
  impl->deriv2 = std::move(deriv2);
  impl->modulus = convexity_modulus;
  impl->p0 = num::golden_min(impl->eval, bracket_lo, bracket_hi);
  impl->min_value = impl->eval(impl->p0);
  return Hamiltonian(std::move(impl));
}

Hamiltonian Hamiltonian::from_parts(
    std::function<double(double)> eval,
    std::optional<std::function<double(double)>> deriv, double p0,
    double min_value, std::optional<std::function<double(double)>> deriv2,
    std::optional<double> convexity_modulus) {
  auto impl = std::make_shared<Impl>();
  impl->eval = std::move(eval);
  impl->deriv = std::move(deriv);
  impl->deriv2 = std::move(deriv2);
  impl->p0 = p0;
  impl->min_value = min_value;
  impl->modulus = convexity_modulus;
  return Hamiltonian(std::move(impl));
}

Hamiltonian Hamiltonian::quadratic(double center, double offset) {
  auto impl = std::make_shared<Impl>();
  impl->eval = [center, offset](double p) {
    return (p - center) * (p - center) + offset;
  };
  impl->deriv = [center](double p) { return 2.0 * (p - center); };
  impl->deriv2 = [](double) { return 2.0; };
  impl->p0 = center;
  impl->min_value = offset;
  impl->modulus = 2.0;
  return Hamiltonian(std::move(impl));
}

Hamiltonian Hamiltonian::absolute_value(double center, double offset) {
  auto impl = std::make_shared<Impl>();
  impl->eval = [center, offset](double p) { return std::abs(p - center) + offset; };
  impl->deriv = [center](double p) {
    return p > center ? 1.0 : (p < center ? -1.0 : 0.0);
  };
  impl->p0 = center;
  impl->min_value = offset;
  return Hamiltonian(std::move(impl));
}

Hamiltonian Hamiltonian::asymmetric_example() {
  auto impl = std::make_shared<Impl>();
  impl->eval = [](double p) { return std::max(-2.0 * p, p * p); };
  impl->deriv = [](double p) {
    if (p >= 0.0) return 2.0 * p;
    if (p <= -2.0) return 2.0 * p;
    return -2.0;
  };
  impl->p0 = 0.0;
  impl->min_value = 0.0;
  return Hamiltonian(std::move(impl));
}

double Hamiltonian::deriv(double p) const {
  if (impl_->deriv) return (*impl_->deriv)(p);
  return num::central_diff(impl_->eval, p);
}

double Hamiltonian::deriv2(double p) const {
  if (impl_->deriv2) return (*impl_->deriv2)(p);
  if (impl_->deriv) {
    const auto& d = *impl_->deriv;
    const double h = num::fd_step(p);
    return (d(p + h) - d(p - h)) / (2.0 * h);
  }
  const double h = std::sqrt(num::fd_step(p));
  return (impl_->eval(p + h) - 2.0 * impl_->eval(p) + impl_->eval(p - h)) /
         (h * h);
}

EnvelopePair Hamiltonian::envelopes() const {
  auto self = *this;
  return EnvelopePair{
      [self](double p) { return self.envelope_minus(p); },
      [self](double p) { return self.envelope_plus(p); },
  };
}

double Hamiltonian::inverse_plus(double a) const {
  if (std::isinf(a) && a > 0.0) return kInf;
  const double target = std::max(a, impl_->min_value);
  const double p0 = impl_->p0;
  // sup of the region where H^+ <= target: grow the bracket until the
  // envelope exceeds the target, then bisect on the boundary.
  double width = 1.0;
  while (envelope_plus(p0 + width) <= target) {
    width *= 2.0;
    if (width > num::kBracketCap) return kInf;
  }
  auto below = [&](double p) { return envelope_plus(p) <= target; };
  return num::bisect_predicate(below, p0, p0 + width);
}

double Hamiltonian::inverse_minus(double a) const {
  if (std::isinf(a) && a > 0.0) return -kInf;
  const double target = std::max(a, impl_->min_value);
  const double p0 = impl_->p0;
  double width = 1.0;
  while (envelope_minus(p0 - width) <= target) {
    width *= 2.0;
    if (width > num::kBracketCap) return -kInf;
  }
  auto below = [&](double p) { return envelope_minus(-p) <= target; };
  // Mirror so the true region sits left of the boundary.
  return -num::bisect_predicate(below, -p0, -p0 + width);
}

Hamiltonian Hamiltonian::tilt_normalized(double* shift) const {
  const double p0 = impl_->p0;
  if (shift) *shift = p0;
  auto base = impl_;
  auto impl = std::make_shared<Impl>();
  impl->eval = [base, p0](double p) { return base->eval(p0 + p); };
  if (base->deriv) {
    auto d = *base->deriv;
    impl->deriv = [d, p0](double p) { return d(p0 + p); };
  }
  if (base->deriv2) {
    auto d2 = *base->deriv2;
    impl->deriv2 = [d2, p0](double p) { return d2(p0 + p); };
  }
  impl->p0 = 0.0;
  impl->min_value = base->min_value;
  impl->modulus = base->modulus;
  return Hamiltonian(std::move(impl));
}

double Hamiltonian::sup_abs_deriv(double lo, double hi) const {
  auto self = *this;
  return sampled_sup([self](double p) { return self.deriv(p); }, lo, hi);
}

double Hamiltonian::sup_abs_value(double lo, double hi) const {
  auto self = *this;
  return sampled_sup([self](double p) { return self(p); }, lo, hi);
}

void Hamiltonian::declare_lipschitz(double bound, double lo, double hi) {
  auto impl = std::make_shared<Impl>(*impl_);
  impl->lipschitz_bound = bound;
  impl->lipschitz_lo = lo;
  impl->lipschitz_hi = hi;
  impl_ = std::move(impl);
}

std::optional<double> Hamiltonian::declared_lipschitz() const {
  return impl_->lipschitz_bound;
}

HamiltonianValidation validate_hamiltonian(
    const std::function<double(double)>& eval, double lo, double hi,
    int samples, std::optional<double> declared_lipschitz) {
  if (samples < 3) throw ValidationError("validate_hamiltonian: samples < 3");
  HamiltonianValidation report;
  std::vector<double> values(samples);
  const double step = (hi - lo) / (samples - 1);
  double sampled_min = kInf;
  for (int k = 0; k < samples; ++k) {
    values[k] = eval(lo + k * step);
    if (!std::isfinite(values[k]))
      throw DataError("validate_hamiltonian: non-finite evaluation");
    sampled_min = std::min(sampled_min, values[k]);
  }
  // Sampled Lipschitz estimate, compared with the declared bound if any.
  double max_slope = 0.0;
  for (int k = 1; k < samples; ++k)
    max_slope = std::max(max_slope, std::abs(values[k] - values[k - 1]) / step);
  report.lipschitz_estimate = max_slope;
  if (declared_lipschitz)
    report.lipschitz_ok = max_slope <= *declared_lipschitz + num::kTolF;

  // Coercivity trend: values must rise toward both interval ends.
  const int quarter = std::max(1, samples / 4);
  report.coercive_ok = values.front() > values[quarter] - num::kTolF &&
                       values.back() > values[samples - 1 - quarter] - num::kTolF &&
                       values.front() > sampled_min + num::kTolF &&
                       values.back() > sampled_min + num::kTolF;

  report.sign_changes = difference_sign_changes(values);
  report.unimodal_ok = report.sign_changes <= 1;
  return report;
}

HamiltonianValidation validate_hamiltonian(const Hamiltonian& h, double lo,
                                           double hi, int samples) {
  return validate_hamiltonian([&](double p) { return h(p); }, lo, hi, samples,
                              h.declared_lipschitz());
}

}  // namespace hjnet
