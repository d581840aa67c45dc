#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hjnet/vertex.hpp"

using namespace hjnet;

namespace {
const double kNegInf = -std::numeric_limits<double>::infinity();

VertexTestFunction quadratic_pair(double gamma, double limiter = kNegInf,
                                  double radius = 5.0) {
  return VertexTestFunction(
      {Hamiltonian::quadratic(0.0), Hamiltonian::quadratic(0.0)}, limiter,
      gamma, radius);
}
}  // namespace

TEST_CASE("level solver, quadratic closed forms") {
  // both Hamiltonians p^2: the level solves (x+y) / (2 sqrt(l)) = 1
  VertexTestFunction g = quadratic_pair(0.01);
  CHECK(g.limiter() == doctest::Approx(0.01));

  bool foliation = false;
  CHECK(g.solve_lambda(0, 1.0, 1, 1.0, &foliation) ==
        doctest::Approx(1.0).epsilon(1e-7));
  CHECK(foliation);
  CHECK(g.solve_lambda(0, 3.0, 1, 1.0, &foliation) ==
        doctest::Approx(4.0).epsilon(1e-7));
  CHECK(foliation);

  // inside the linear region the level clamps to A_gamma
  VertexTestFunction clamped = quadratic_pair(0.01, 0.5);
  CHECK(clamped.limiter() == doctest::Approx(0.5));
  CHECK(clamped.solve_lambda(0, 0.1, 1, 0.1, &foliation) ==
        doctest::Approx(0.5));
  CHECK_FALSE(foliation);
}

TEST_CASE("value and gradient, quadratic closed forms") {
  VertexTestFunction g = quadratic_pair(0.01);
  const double a_gamma = g.limiter();

  // cross branch: G = (x+y)^2/4 + A_gamma in the foliation region
  auto vg = g.value_grad({0, 1.0}, {1, 1.0});
  CHECK(vg.value == doctest::Approx(1.0 + a_gamma).epsilon(1e-7));
  CHECK(vg.gx == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(vg.gy == doctest::Approx(1.0).epsilon(1e-7));

  auto vg2 = g.value_grad({0, 3.0}, {1, 1.0});
  CHECK(vg2.value == doctest::Approx(4.0 + a_gamma).epsilon(1e-7));
  CHECK(vg2.gx == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(vg2.gy == doctest::Approx(2.0).epsilon(1e-7));

  // normalization: zero at the origin pair, nonnegative everywhere sampled
  CHECK(g.value_grad({0, 0.0}, {1, 0.0}).value ==
        doctest::Approx(0.0).epsilon(1e-9));
  for (double x = 0.0; x <= 2.0; x += 0.25)
    for (double y = 0.0; y <= 2.0; y += 0.25) {
      CHECK(g.value_grad({0, x}, {1, y}).value >= -1e-10);
      CHECK(g.value_grad({0, x}, {0, y}).value >= -1e-10);
    }

  // same branch, diagonal: compatibility within the gamma budget
  for (double x = 0.0; x <= 3.0; x += 0.5) {
    const double diag = g.value_grad({0, x}, {0, x}).value;
    CHECK(diag >= -1e-10);
    CHECK(diag <= g.gamma() + 1e-9);
  }
}

TEST_CASE("same-branch values follow the conjugate") {
  // for H = p^2 and q beyond the smoothing band the conjugate of
  // max(A,H) at q>0 is q^2/4 if q/2 >= sqrt(A), else q sqrt(A) - A
  VertexTestFunction g = quadratic_pair(0.1, 0.5);
  const double a = g.limiter();  // 0.5 + ... = max(0.5, 0+0.1) = 0.5
  CHECK(a == doctest::Approx(0.5));
  const double q = 3.0;  // far from the band
  auto vg = g.value_grad({0, 4.0}, {0, 1.0});
  CHECK(vg.value == doctest::Approx(q * q / 4.0 + a).epsilon(1e-7));
  CHECK(vg.gx == doctest::Approx(q / 2.0).epsilon(1e-7));
  CHECK(vg.gy == doctest::Approx(-q / 2.0).epsilon(1e-7));

  const double q2 = 0.5;  // linear part: q2/2 < sqrt(a)
  auto vg2 = g.value_grad({0, 1.5}, {0, 1.0});
  CHECK(vg2.value ==
        doctest::Approx(q2 * std::sqrt(a) - a + a).epsilon(2e-2));
}

TEST_CASE("hessian closed forms, quadratic pair") {
  VertexTestFunction g = quadratic_pair(0.01);
  for (double x : {0.5, 1.0, 2.0})
    for (double y : {0.5, 1.5}) {
      auto h = g.hessian(0, x, 1, y);
      REQUIRE(h.foliation);
      CHECK(h.dxx == doctest::Approx(0.5).epsilon(1e-6));
      CHECK(h.dyy == doctest::Approx(0.5).epsilon(1e-6));
      CHECK(h.dxy == doctest::Approx(0.5).epsilon(1e-6));
    }
  // linear region: affine, zero second derivatives
  VertexTestFunction big = quadratic_pair(0.01, 4.0);
  auto lin = big.hessian(0, 0.3, 1, 0.3);
  CHECK_FALSE(lin.foliation);
  CHECK(lin.dxx == 0.0);
}

TEST_CASE("hessian matches finite differences of the gradient") {
  VertexTestFunction g = quadratic_pair(0.05);
  const double h = 1e-4;
  for (double x : {0.8, 1.7})
    for (double y : {0.6, 2.1}) {
      auto hess = g.hessian(0, x, 1, y);
      REQUIRE(hess.foliation);
      auto gxp = g.value_grad({0, x + h}, {1, y});
      auto gxm = g.value_grad({0, x - h}, {1, y});
      auto gyp = g.value_grad({0, x}, {1, y + h});
      auto gym = g.value_grad({0, x}, {1, y - h});
      CHECK((gxp.gx - gxm.gx) / (2 * h) ==
            doctest::Approx(hess.dxx).epsilon(1e-5));
      CHECK((gyp.gy - gym.gy) / (2 * h) ==
            doctest::Approx(hess.dyy).epsilon(1e-5));
      CHECK((gyp.gx - gym.gx) / (2 * h) ==
            doctest::Approx(hess.dxy).epsilon(1e-5));
    }
}

TEST_CASE("envelope identity at foliation points") {
  VertexTestFunction g(
      {Hamiltonian::quadratic(0.0), Hamiltonian::quadratic(0.0, 0.5)}, kNegInf,
      0.05, 5.0);
  for (double x : {0.5, 1.0, 3.0})
    for (double y : {0.7, 2.0}) {
      bool foliation = false;
      const double lambda = g.solve_lambda(0, x, 1, y, &foliation);
      if (!foliation) continue;
      auto vg = g.value_grad({0, x}, {1, y});
      CHECK(g.hamiltonian(0)(vg.gx) == doctest::Approx(lambda).epsilon(1e-7));
      CHECK(g.hamiltonian(1)(-vg.gy) == doctest::Approx(lambda).epsilon(1e-7));
    }
}

TEST_CASE("raising the limiter never lowers the function") {
  VertexTestFunction low = quadratic_pair(0.05, 0.2);
  VertexTestFunction high = quadratic_pair(0.05, 0.6);
  for (double x = 0.0; x <= 2.0; x += 0.2)
    for (double y = 0.0; y <= 2.0; y += 0.2) {
      CHECK(high.value_grad({0, x}, {1, y}).value >=
            low.value_grad({0, x}, {1, y}).value - 1e-7);
      CHECK(high.value_grad({0, x}, {0, y}).value >=
            low.value_grad({0, x}, {0, y}).value - low.gamma() - 1e-7);
    }
}

TEST_CASE("certification of the quadratic pair") {
  VertexTestFunction g = quadratic_pair(0.1, 0.0, 5.0);
  VertexCertification rep = g.certify(2000, 12345);
  CHECK(rep.diagonal_ok());
  CHECK(rep.compatibility_ok());
  CHECK(rep.max_compatibility <= 0.1 + 1e-9);
  CHECK(rep.hessian_sup == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(rep.hessian_fd_max_rel_err <= 1e-5);
  CHECK(rep.envelope_identity_defect <= 1e-7);
  CHECK(rep.superlinearity_violations == 0);
  CHECK(rep.lambda_interface_defect <= 1e-4);
  CHECK(rep.max_gradient_sum > 0.0);
}

TEST_CASE("hessian growth when one minimum sits at the junction level") {
  // H1 = p^2 (min 0 < A0), H2 = p^2 + 0.5 (min = A0): the second
  // derivative peaks like A0/(2 gamma) near the degenerate branch
  double previous = 0.0;
  for (double gamma : {0.1, 0.05, 0.025}) {
    VertexTestFunction g(
        {Hamiltonian::quadratic(0.0), Hamiltonian::quadratic(0.0, 0.5)},
        kNegInf, gamma, 5.0);
    VertexCertification rep = g.certify(1500, 7);
    CHECK(rep.diagonal_ok());
    CHECK(rep.compatibility_ok());
    CHECK(rep.hessian_sup > previous);  // grows as gamma shrinks
    previous = rep.hessian_sup;
    // the sharp peak value A_gamma / (2 gamma) must be captured
    const double peak = g.limiter() / (2.0 * gamma);
    CHECK(rep.hessian_sup >= 0.8 * peak);
    CHECK(rep.hessian_sup <= 1.5 * peak);
  }
}

TEST_CASE("construction guards") {
  CHECK_THROWS_AS(VertexTestFunction({Hamiltonian::absolute_value(0.0)},
                                     kNegInf, 0.1, 1.0),
                  ValidationError);
  CHECK_THROWS_AS(quadratic_pair(-0.1), DataError);
}
