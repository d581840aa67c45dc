#include "hjnet/junction_function.hpp"

#include <cmath>
#include <limits>

#include "hjnet/errors.hpp"

namespace hjnet {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Visit every node of a regular lattice over `box` with k points per axis.
template <typename Fn>
void for_each_lattice_point(const Box& box, int k, Fn&& fn) {
  const int n = box.dim();
  std::vector<int> idx(n, 0);
  std::vector<double> p(n);
  while (true) {
    for (int a = 0; a < n; ++a) {
      p[a] = k == 1 ? box.lo[a]
                    : box.lo[a] + (box.hi[a] - box.lo[a]) * idx[a] / (k - 1);
    }
    fn(std::span<const double>(p));
    int a = 0;
    while (a < n && ++idx[a] == k) idx[a++] = 0;
    if (a == n) break;
  }
}

Box shrink_around(const Box& box, std::span<const double> center,
                  double factor) {
  Box out = box;
  for (int a = 0; a < box.dim(); ++a) {
    const double half = 0.5 * factor * (box.hi[a] - box.lo[a]);
    out.lo[a] = std::max(box.lo[a], center[a] - half);
    out.hi[a] = std::min(box.hi[a], center[a] + half);
  }
  return out;
}
}  // namespace

bool Box::contains(std::span<const double> p, double slack) const {
  for (int a = 0; a < dim(); ++a)
    if (p[a] < lo[a] - slack || p[a] > hi[a] + slack) return false;
  return true;
}

double JunctionFunction::partial(int beta, std::span<const double> p) const {
  const double h = num::fd_step(p[beta]);
  std::vector<double> q(p.begin(), p.end());
  q[beta] = p[beta] + h;
  const double up = value(q);
  q[beta] = p[beta] - h;
  const double down = value(q);
  return (up - down) / (2.0 * h);
}

double JunctionFunction::infimum() const { return -kInf; }

FluxLimitedF::FluxLimitedF(std::vector<Hamiltonian> hamiltonians,
                           double limiter)
    : hams_(std::move(hamiltonians)), limiter_(limiter) {
  if (hams_.empty()) throw DataError("flux-limited F needs hamiltonians");
}

double FluxLimitedF::value(std::span<const double> p) const {
  double v = limiter_;
  for (std::size_t a = 0; a < hams_.size(); ++a)
    v = std::max(v, hams_[a].envelope_minus(p[a]));
  return v;
}

double FluxLimitedF::infimum() const {
  // F_A >= max(A, max_a min H_a) everywhere, attained for large gradients.
  double v = limiter_;
  for (const auto& h : hams_) v = std::max(v, h.min_value());
  return v;
}

std::unique_ptr<JunctionFunction> FluxLimitedF::clone() const {
  return std::make_unique<FluxLimitedF>(*this);
}

GeneralF GeneralF::wrap(const JunctionFunction& f) {
  std::shared_ptr<JunctionFunction> owned = f.clone();
  return GeneralF(f.arity(), [owned](std::span<const double> p) {
    return owned->value(p);
  });
}

double GeneralF::partial(int beta, std::span<const double> p) const {
  if (partials_) return partials_(beta, p);
  return JunctionFunction::partial(beta, p);
}

std::unique_ptr<JunctionFunction> GeneralF::clone() const {
  return std::make_unique<GeneralF>(*this);
}

ModifiedF::ModifiedF(std::unique_ptr<JunctionFunction> base, Box q0,
                     std::vector<double> slopes)
    : base_(std::move(base)), q0_(std::move(q0)), slopes_(std::move(slopes)) {}

double ModifiedF::value(std::span<const double> p) const {
  const int n = arity();
  std::vector<double> clamped(n);
  double penalty = 0.0;
  for (int a = 0; a < n; ++a) {
    clamped[a] = q0_.clamp(a, p[a]);
    penalty += slopes_[a] * (p[a] - clamped[a]);
  }
  return base_->value(clamped) - penalty;
}

std::unique_ptr<JunctionFunction> ModifiedF::clone() const {
  return std::make_unique<ModifiedF>(base_->clone(), q0_, slopes_);
}

double minimal_limiter(std::span<const Hamiltonian> hamiltonians) {
  double a0 = -kInf;
  for (const auto& h : hamiltonians) a0 = std::max(a0, h.min_value());
  return a0;
}

LowerInverse lower_inverse(const JunctionFunction& f, double K) {
  const int n = f.arity();
  LowerInverse out;
  out.p.assign(n, kInf);

  if (auto* fa = dynamic_cast<const FluxLimitedF*>(&f)) {
    if (K < fa->infimum() - num::kTolF) {
      out.feasible = false;
      return out;
    }
    for (int a = 0; a < n; ++a) out.p[a] = fa->hamiltonian(a).inverse_minus(K);
    return out;
  }

  // Generic path.  Saturate the other coordinates at a large value M so that
  // g_a(q) = F(q e_a + M elsewhere) lower-bounds F on {p_b <= M}; the
  // threshold is the boundary of {g_a <= K}.  Soundness is therefore sampled:
  // it covers states with coordinates below M.
  double M = 1.0;
  {
    std::vector<double> ones(n, M);
    double prev = f.value(ones);
    while (M < 1073741824.0) {  // 2^30
      std::vector<double> next(n, 2.0 * M);
      const double v = f.value(next);
      if (std::abs(v - prev) <= num::kTolF) break;
      prev = v;
      M *= 2.0;
    }
  }
  {
    std::vector<double> sat(n, M);
    if (f.value(sat) > K + num::kTolF) {
      // Even the most favorable saturated point sits above K.
      out.feasible = false;
      return out;
    }
  }
  for (int a = 0; a < n; ++a) {
    std::vector<double> q(n, M);
    auto g = [&](double t) {
      q[a] = t;
      return f.value(q);
    };
    double hi = M;
    double lo = -1.0;
    while (g(lo) <= K) {
      lo *= 2.0;
      if (-lo > num::kBracketCap) break;
    }
    if (g(lo) <= K) {
      out.p[a] = -kInf;  // no finite threshold within the searched range
      continue;
    }
    // g is non-increasing: below K right of the boundary.
    out.p[a] = num::bisect_predicate([&](double t) { return g(t) > K; }, lo, hi);
  }
  return out;
}

double sup_neg_divergence(const JunctionFunction& f, const Box& box,
                          int samples_per_axis, int refine_rounds) {
  auto neg_div = [&](std::span<const double> p) {
    double s = 0.0;
    for (int a = 0; a < f.arity(); ++a) s -= f.partial(a, p);
    return s;
  };
  double best = -kInf;
  std::vector<double> best_p(box.dim(), 0.0);
  Box region = box;
  int k = samples_per_axis;
  for (int round = 0; round <= refine_rounds; ++round) {
    for_each_lattice_point(region, k, [&](std::span<const double> p) {
      const double v = neg_div(p);
      if (v > best) {
        best = v;
        best_p.assign(p.begin(), p.end());
      }
    });
    if (k < 2) break;
    region = shrink_around(region, best_p, 2.0 / (k - 1));
    k = 9;
  }
  return best;
}

double sup_abs_value(const JunctionFunction& f, const Box& box,
                     int samples_per_axis) {
  double best = -kInf;
  std::vector<double> best_p(box.dim(), 0.0);
  Box region = box;
  int k = samples_per_axis;
  for (int round = 0; round < 3; ++round) {
    for_each_lattice_point(region, k, [&](std::span<const double> p) {
      const double v = std::abs(f.value(p));
      if (v > best) {
        best = v;
        best_p.assign(p.begin(), p.end());
      }
    });
    if (k < 2) break;
    region = shrink_around(region, best_p, 2.0 / (k - 1));
    k = 9;
  }
  return best;
}

ModifiedF build_modified_f(const JunctionFunction& f, Box q0,
                           int samples_per_axis) {
  const int n = f.arity();
  if (q0.dim() != n) throw DataError("build_modified_f: box arity mismatch");
  std::vector<double> slopes(n, kInf);
  for (int a = 0; a < n; ++a) {
    std::vector<double> arg_min(n, 0.0);
    Box region = q0;
    int k = samples_per_axis;
    double c = kInf;
    for (int round = 0; round < 3; ++round) {
      for_each_lattice_point(region, k, [&](std::span<const double> p) {
        const double v = -f.partial(a, p);
        if (v < c) {
          c = v;
          arg_min.assign(p.begin(), p.end());
        }
      });
      region = shrink_around(region, arg_min, 2.0 / (k - 1));
      k = 9;
    }
    if (c < -num::kTolF)
      throw ValidationError("build_modified_f: F increases along axis " +
                            std::to_string(a + 1));
    slopes[a] = std::max(c, 0.0);
  }
  return ModifiedF(f.clone(), std::move(q0), std::move(slopes));
}

FValidation validate_f(const JunctionFunction& f, const Box& box,
                       int samples_per_axis) {
  if (samples_per_axis < 3) throw ValidationError("validate_f: samples < 3");
  const int n = f.arity();
  FValidation report;
  report.max_partial.assign(n, -kInf);
  for_each_lattice_point(box, samples_per_axis,
                         [&](std::span<const double> p) {
                           for (int a = 0; a < n; ++a)
                             report.max_partial[a] =
                                 std::max(report.max_partial[a],
                                          f.partial(a, p));
                         });
  for (int a = 0; a < n; ++a) {
    if (report.max_partial[a] > num::kTolF) report.non_increasing = false;
    if (report.max_partial[a] > -num::kTolF) report.strictly_decreasing = false;
  }
  // Coercivity trend along p = -t * 1.
  double scale = 0.0;
  for (int a = 0; a < n; ++a)
    scale = std::max(scale, std::max(std::abs(box.lo[a]), std::abs(box.hi[a])));
  if (scale == 0.0) scale = 1.0;
  double first = 0.0, prev = 0.0;
  bool non_decreasing = true;
  for (int k = 0; k < 7; ++k) {
    const double t = scale * std::pow(2.0, k);
    std::vector<double> p(n, -t);
    const double v = f.value(p);
    if (k == 0) first = v;
    if (k > 0 && v < prev - num::kTolF) non_decreasing = false;
    prev = v;
  }
  report.coercive_trend = non_decreasing && prev > first + num::kTolF;
  return report;
}

}  // namespace hjnet
