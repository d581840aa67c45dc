#include "hjnet/vertex.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "hjnet/junction_function.hpp"

namespace hjnet {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

VertexTestFunction::VertexTestFunction(std::vector<Hamiltonian> hamiltonians,
                                       double flux_limiter, double gamma,
                                       double diagnostic_radius)
    : gamma_(gamma), radius_(diagnostic_radius) {
  if (hamiltonians.empty()) throw DataError("vertex: no hamiltonians");
  if (!(gamma > 0.0)) throw DataError("vertex: gamma must be positive");
  for (auto& h : hamiltonians) {
    if (!h.convexity_modulus() || *h.convexity_modulus() <= 0.0)
      throw ValidationError(
          "vertex: needs C^2 uniformly convex hamiltonians "
          "(convexity modulus not declared)");
    hams_.push_back(h.tilt_normalized());
  }
  a0_ = minimal_limiter(hams_);
  a_gamma_ = std::max(flux_limiter, a0_ + gamma_);

  // Smooth the flat bottom of max(A_gamma, H) on each branch: two quadratics
  // meeting the graph of H tangentially at the ends of the level band
  // [A_gamma, A_gamma + band], with minimum exactly A_gamma.  The band is
  // halved until the two arcs fit inside [l, r].
  wells_.resize(hams_.size());
  for (std::size_t b = 0; b < hams_.size(); ++b) {
    const Hamiltonian& h = hams_[b];
    double band = 0.5 * gamma_;
    for (int attempt = 0;; ++attempt) {
      if (attempt > 60)
        throw NumericalError("vertex: could not fit the bottom smoothing on branch " +
                             std::to_string(b + 1));
      const double level = a_gamma_ + band;
      const double l = h.inverse_minus(level);
      const double r = h.inverse_plus(level);
      const double sl = h.deriv(l);
      const double sr = h.deriv(r);
      if (!(sl < 0.0 && sr > 0.0)) {
        band *= 0.5;
        continue;
      }
      const double c1 = l - 2.0 * band / sl;
      const double c2 = r - 2.0 * band / sr;
      if (c1 <= c2) {
        wells_[b] = Well{band, l, r, c1, c2, sl * sl / (4.0 * band),
                         sr * sr / (4.0 * band)};
        break;
      }
      band *= 0.5;
    }
  }
}

double VertexTestFunction::smoothed(int b, double p) const {
  const Well& w = wells_[b];
  if (p <= w.l || p >= w.r) return std::max(a_gamma_, hams_[b](p));
  if (p <= w.c1) return a_gamma_ + w.a1 * (p - w.c1) * (p - w.c1);
  if (p >= w.c2) return a_gamma_ + w.a2 * (p - w.c2) * (p - w.c2);
  return a_gamma_;
}

double VertexTestFunction::smoothed_deriv(int b, double p) const {
  const Well& w = wells_[b];
  if (p <= w.l || p >= w.r) {
    const double v = hams_[b](p);
    return v >= a_gamma_ ? hams_[b].deriv(p) : 0.0;
  }
  if (p <= w.c1) return 2.0 * w.a1 * (p - w.c1);
  if (p >= w.c2) return 2.0 * w.a2 * (p - w.c2);
  return 0.0;
}

double VertexTestFunction::conjugate(int b, double q, double* p_star) const {
  const Well& w = wells_[b];
  double lo = w.c1 - 1.0, hi = w.c2 + 1.0;
  while (smoothed_deriv(b, lo) > q) {
    lo = w.c1 - 2.0 * (w.c1 - lo);
    if (w.c1 - lo > num::kBracketCap)
      throw NumericalError("vertex: conjugate bracket ran away (left)");
  }
  while (smoothed_deriv(b, hi) < q) {
    hi = w.c2 + 2.0 * (hi - w.c2);
    if (hi - w.c2 > num::kBracketCap)
      throw NumericalError("vertex: conjugate bracket ran away (right)");
  }
  const double arg = num::golden_max(
      [&](double p) { return p * q - smoothed(b, p); }, lo, hi);
  if (p_star) *p_star = arg;
  return arg * q - smoothed(b, arg);
}

double VertexTestFunction::solve_lambda(int branch_x, double x, int branch_y,
                                        double y, bool* foliation) const {
  const Hamiltonian& hx = hams_[branch_x];
  const Hamiltonian& hy = hams_[branch_y];
  auto residual = [&](double lambda) {
    // (pi_x^+)'(lambda) x - (pi_y^-)'(lambda) y - 1, decreasing in lambda.
    const double dplus = 1.0 / hx.deriv(hx.inverse_plus(lambda));
    const double dminus = 1.0 / hy.deriv(hy.inverse_minus(lambda));
    return x * dplus - y * dminus - 1.0;
  };
  if (residual(a_gamma_) <= 0.0) {
    if (foliation) *foliation = false;
    return a_gamma_;
  }
  double width = 1.0;
  while (residual(a_gamma_ + width) > 0.0) {
    width *= 2.0;
    if (width > num::kBracketCap)
      throw NumericalError("vertex: foliation level not bracketable");
  }
  if (foliation) *foliation = true;
  return num::bisect_predicate(
      [&](double lambda) { return residual(lambda) > 0.0; }, a_gamma_,
      a_gamma_ + width);
}

VertexValueGrad VertexTestFunction::value_grad(JunctionPoint x,
                                               JunctionPoint y) const {
  if (x.coordinate < 0.0 || y.coordinate < 0.0)
    throw DataError("vertex: negative coordinate");
  VertexValueGrad out;
  if (x.branch == y.branch) {
    const double q = x.coordinate - y.coordinate;
    double p_star = 0.0;
    const double conj = conjugate(x.branch, q, &p_star);
    out.value = conj + a_gamma_;
    out.gx = p_star;
    out.gy = -p_star;
    return out;
  }
  const double lambda =
      solve_lambda(x.branch, x.coordinate, y.branch, y.coordinate);
  const double px = hams_[x.branch].inverse_plus(lambda);
  const double py = hams_[y.branch].inverse_minus(lambda);
  out.value = px * x.coordinate - py * y.coordinate - lambda + a_gamma_;
  out.gx = px;
  out.gy = -py;
  return out;
}

VertexHessian VertexTestFunction::hessian(int branch_x, double x, int branch_y,
                                          double y) const {
  if (branch_x == branch_y)
    throw DataError("vertex: hessian is defined for cross-branch pairs");
  bool foliation = false;
  const double lambda = solve_lambda(branch_x, x, branch_y, y, &foliation);
  VertexHessian out;
  out.foliation = foliation;
  if (!foliation) return out;  // G is affine below the interface

  const Hamiltonian& hx = hams_[branch_x];
  const Hamiltonian& hy = hams_[branch_y];
  const double pa = hx.inverse_plus(lambda);
  const double pb = hy.inverse_minus(lambda);
  const double ha1 = hx.deriv(pa), ha2 = hx.deriv2(pa);
  const double hb1 = hy.deriv(pb), hb2 = hy.deriv2(pb);

  const double denom_xx =
      x * ha2 / ha1 + y * hb2 * ha1 * ha1 / (-(hb1 * hb1 * hb1));
  const double denom_yy =
      x * ha2 * hb1 * hb1 / (ha1 * ha1 * ha1) + y * hb2 / (-hb1);
  const double denom_xy =
      -x * hb1 * ha2 / (ha1 * ha1) + y * ha1 * hb2 / (hb1 * hb1);
  out.dxx = 1.0 / denom_xx;
  out.dyy = 1.0 / denom_yy;
  out.dxy = 1.0 / denom_xy;
  return out;
}

std::vector<double> VertexTestFunction::origin_gradient_x(
    JunctionPoint y) const {
  std::vector<double> g(hams_.size());
  for (int b = 0; b < num_branches(); ++b) {
    if (b == y.branch) {
      double p_star = 0.0;
      conjugate(b, -y.coordinate, &p_star);
      g[b] = p_star;
    } else {
      const double lambda = solve_lambda(b, 0.0, y.branch, y.coordinate);
      g[b] = hams_[b].inverse_plus(lambda);
    }
  }
  return g;
}

std::vector<double> VertexTestFunction::origin_gradient_y(
    JunctionPoint x) const {
  std::vector<double> g(hams_.size());
  for (int b = 0; b < num_branches(); ++b) {
    if (b == x.branch) {
      double p_star = 0.0;
      conjugate(b, x.coordinate, &p_star);
      g[b] = -p_star;
    } else {
      const double lambda = solve_lambda(x.branch, x.coordinate, b, 0.0);
      g[b] = -hams_[b].inverse_minus(lambda);
    }
  }
  return g;
}

VertexCertification VertexTestFunction::certify(long sample_count,
                                                std::uint64_t seed) const {
  if (sample_count < 1000)
    throw ValidationError("vertex: certification needs at least 1000 samples");
  const int n = num_branches();
  const double K = radius_;
  VertexCertification rep;
  rep.gamma = gamma_;
  rep.limiter = a_gamma_;
  rep.radius = K;
  rep.superlinearity_min_growth = kInf;

  FluxLimitedF f_origin(hams_, a_gamma_);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, n - 1);

  struct Pair {
    JunctionPoint x, y;
  };
  std::vector<Pair> samples;
  samples.reserve(sample_count + 4096);
  for (long k = 0; k < sample_count; ++k) {
    const int bx = pick(rng), by = pick(rng);
    double x, y;
    if (bx == by) {
      x = K * unit(rng);
      y = K * unit(rng);
    } else {
      x = K * unit(rng);
      y = (K - x) * unit(rng);
    }
    samples.push_back({{bx, x}, {by, y}});
  }
  // Structured pairs: origin rows/columns, log-spaced approaches to zero and
  // to the linear/foliation interface (where the second derivatives peak).
  for (int bx = 0; bx < n; ++bx) {
    for (int by = 0; by < n; ++by) {
      if (bx == by) continue;
      const double y_itf =
          std::abs(hams_[by].deriv(hams_[by].inverse_minus(a_gamma_)));
      const double x_itf = hams_[bx].deriv(hams_[bx].inverse_plus(a_gamma_));
      for (int i = 0; i <= 24; ++i) {
        const double x = i == 0 ? 0.0 : K * std::pow(10.0, -8.0 * (24 - i) / 24.0);
        for (int j = 0; j < 12; ++j) {
          const double y = std::min(K - x, y_itf * (1.0 + std::pow(10.0, -4.0 + 4.0 * j / 11.0)));
          if (y >= 0.0) samples.push_back({{bx, x}, {by, y}});
        }
        const double y_lin = std::min(K - x, 0.5 * y_itf);
        if (y_lin >= 0.0) samples.push_back({{bx, x}, {by, y_lin}});
      }
      for (int j = 0; j < 12; ++j) {
        const double x = std::min(K, x_itf * (1.0 + std::pow(10.0, -4.0 + 4.0 * j / 11.0)));
        samples.push_back({{bx, x}, {by, 0.0}});
      }
      samples.push_back({{bx, 0.0}, {by, 0.0}});
    }
  }
  rep.sample_count = static_cast<long>(samples.size());

  auto shorthand_pair = [&](const Pair& s,
                            const VertexValueGrad& vg) -> double {
    // H(y, -G_y) - H(x, G_x) with the flux-limited coupling at the origin.
    double left, right;
    if (s.y.coordinate == 0.0) {
      std::vector<double> gy = origin_gradient_y(s.x);
      for (auto& v : gy) v = -v;
      left = f_origin.value(gy);
    } else {
      left = hams_[s.y.branch](-vg.gy);
    }
    if (s.x.coordinate == 0.0) {
      const std::vector<double> gx = origin_gradient_x(s.y);
      right = f_origin.value(gx);
    } else {
      right = hams_[s.x.branch](vg.gx);
    }
    return left - right;
  };

  long fd_checks = 0;
  long superlin_checked = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Pair& s = samples[k];
    const VertexValueGrad vg = value_grad(s.x, s.y);
    rep.max_gradient_sum =
        std::max(rep.max_gradient_sum, std::abs(vg.gx) + std::abs(vg.gy));
    rep.max_compatibility =
        std::max(rep.max_compatibility, shorthand_pair(s, vg));

    if (s.x.branch != s.y.branch) {
      bool foliation = false;
      const double lambda = solve_lambda(s.x.branch, s.x.coordinate,
                                         s.y.branch, s.y.coordinate, &foliation);
      if (foliation) {
        rep.envelope_identity_defect = std::max(
            rep.envelope_identity_defect,
            std::max(std::abs(hams_[s.x.branch](vg.gx) - lambda),
                     std::abs(hams_[s.y.branch](-vg.gy) - lambda)));
        const VertexHessian hess =
            hessian(s.x.branch, s.x.coordinate, s.y.branch, s.y.coordinate);
        rep.hessian_sup =
            std::max({rep.hessian_sup, std::abs(hess.dxx), std::abs(hess.dyy),
                      std::abs(hess.dxy)});

        // Spot-check the closed forms against central differences of the
        // gradient, away from the domain boundary.
        const double h = 1e-4;
        if (fd_checks < 400 && s.x.coordinate > 0.02 * K + h &&
            s.y.coordinate > 0.02 * K + h && k % 7 == 0) {
          ++fd_checks;
          auto vg_xp = value_grad({s.x.branch, s.x.coordinate + h}, s.y);
          auto vg_xm = value_grad({s.x.branch, s.x.coordinate - h}, s.y);
          auto vg_yp = value_grad(s.x, {s.y.branch, s.y.coordinate + h});
          auto vg_ym = value_grad(s.x, {s.y.branch, s.y.coordinate - h});
          const double fd_xx = (vg_xp.gx - vg_xm.gx) / (2.0 * h);
          const double fd_yy = (vg_yp.gy - vg_ym.gy) / (2.0 * h);
          const double fd_xy = (vg_yp.gx - vg_ym.gx) / (2.0 * h);
          const double scale =
              std::max({std::abs(hess.dxx), std::abs(hess.dyy),
                        std::abs(hess.dxy), 1e-12});
          rep.hessian_fd_max_rel_err = std::max(
              {rep.hessian_fd_max_rel_err, std::abs(fd_xx - hess.dxx) / scale,
               std::abs(fd_yy - hess.dyy) / scale,
               std::abs(fd_xy - hess.dxy) / scale});
        }
      }
    }

    // Superlinearity proxy: G(sx, sy) / (s d(x,y)) must not decrease in s,
    // and gains strictly once the scaled pair reaches the foliation region.
    if (k % 11 == 0 && superlin_checked < 2000) {
      const double d = s.x.branch == s.y.branch
                           ? std::abs(s.x.coordinate - s.y.coordinate)
                           : s.x.coordinate + s.y.coordinate;
      if (d > 1e-6) {
        ++superlin_checked;
        double prev_ratio = -kInf;
        bool reached_foliation = false;
        double first_ratio = 0.0, last_ratio = 0.0;
        for (int scale = 1; scale <= 8; scale *= 2) {
          JunctionPoint xs{s.x.branch, scale * s.x.coordinate};
          JunctionPoint ys{s.y.branch, scale * s.y.coordinate};
          const double ratio = value_grad(xs, ys).value / (scale * d);
          if (scale == 1) first_ratio = ratio;
          last_ratio = ratio;
          if (ratio < prev_ratio - 1e-12) ++rep.superlinearity_violations;
          prev_ratio = ratio;
          if (s.x.branch != s.y.branch) {
            bool fol = false;
            solve_lambda(xs.branch, xs.coordinate, ys.branch, ys.coordinate,
                         &fol);
            reached_foliation = reached_foliation || fol;
          } else {
            reached_foliation = true;  // the conjugate grows superlinearly
          }
        }
        if (reached_foliation)
          rep.superlinearity_min_growth =
              std::min(rep.superlinearity_min_growth, last_ratio - first_ratio);
      }
    }
  }

  // Diagonal compatibility: G(x, x) stays within the gamma budget.
  for (int b = 0; b < n; ++b) {
    for (int i = 0; i <= 64; ++i) {
      const double x = K * i / 64.0;
      rep.max_diagonal = std::max(
          rep.max_diagonal, value_grad({b, x}, {b, x}).value);
    }
  }

  // Continuity of the level across the linear/foliation interface: walk a
  // few rays, bisect the interface scale, and compare the level just above.
  for (int bx = 0; bx < n; ++bx) {
    for (int by = 0; by < n; ++by) {
      if (bx == by) continue;
      for (int ray = 1; ray <= 4; ++ray) {
        const double cx = std::cos(0.3 * ray), cy = std::sin(0.3 * ray);
        bool fol_at_K = false;
        solve_lambda(bx, K * cx, by, K * cy, &fol_at_K);
        if (!fol_at_K) continue;
        double lo = 0.0, hi = 1.0;  // scale of (K cx, K cy)
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          bool fol = false;
          solve_lambda(bx, mid * K * cx, by, mid * K * cy, &fol);
          (fol ? hi : lo) = mid;
        }
        bool fol = false;
        const double lambda_above =
            solve_lambda(bx, hi * K * cx, by, hi * K * cy, &fol);
        rep.lambda_interface_defect =
            std::max(rep.lambda_interface_defect,
                     std::abs(lambda_above - a_gamma_));
      }
    }
  }
  if (!std::isfinite(rep.superlinearity_min_growth))
    rep.superlinearity_min_growth = 0.0;
  return rep;
}

}  // namespace hjnet
