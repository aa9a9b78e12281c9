#include "widthlab/mollifier.hpp"
#include "widthlab/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace widthlab;

TEST_CASE("gauss-legendre three point rule matches the textbook nodes") {
  const auto rule = gauss_legendre<double>(3);
  CHECK(rule.nodes[0] == doctest::Approx(-std::sqrt(0.6)).epsilon(1e-15));
  CHECK(rule.nodes[1] == 0.0);
  CHECK(rule.nodes[2] == doctest::Approx(std::sqrt(0.6)).epsilon(1e-15));
  CHECK(rule.weights[0] == doctest::Approx(5.0 / 9.0).epsilon(1e-15));
  CHECK(rule.weights[1] == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("gauss-legendre with n nodes integrates degree 2n-1 exactly") {
  for (int n = 1; n <= 12; ++n) {
    const auto rule = gauss_legendre<double>(n);
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      double sum = 0.0;
      for (int k = 0; k < n; ++k) sum += rule.weights[k] * std::pow(rule.nodes[k], deg);
      const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
      CHECK(std::abs(sum - exact) < 1e-14);
    }
  }
}

TEST_CASE("long double rule agrees with the double rule") {
  const auto a = gauss_legendre<double>(8);
  const auto b = gauss_legendre<long double>(8);
  for (int k = 0; k < 8; ++k) CHECK(std::abs(a.nodes[k] - static_cast<double>(b.nodes[k])) < 1e-15);
}

TEST_CASE("compensated sum keeps the small terms") {
  CompensatedSum<> s;
  s.add(1e16);
  s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == 1.0);
}

TEST_CASE("tensor quadrature of a separable polynomial") {
  const Box box{Vector::Zero(2), Vector::Ones(2)};
  const auto f = [](const Vector& x) { return x[0] * x[0] * x[1] * x[1] * x[1]; };
  const auto est = tensor_integrate(f, box, 2, 3);
  CHECK(est.value == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
  CHECK(est.abs_value == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
}

TEST_CASE("refined quadrature converges on a smooth integrand and reports failure otherwise") {
  const Box box{Vector::Constant(1, 0.0), Vector::Constant(1, 1.0)};
  const auto smooth = [](const Vector& x) { return std::exp(x[0]); };
  CHECK(integrate_refined(smooth, box, 1, 4, 1e-12).value == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-13));
  const auto jump = [](const Vector& x) { return x[0] < 1.0 / 3.0 ? 0.0 : 1.0; };
  CHECK_THROWS_AS(integrate_refined(jump, box, 1, 2, 1e-15, 2), ConvergenceError);
}

TEST_CASE("mollifier values") {
  const Mollifier psi(1);
  CHECK(psi(Vector::Zero(1)) == 1.0);
  CHECK(psi(Vector::Constant(1, 0.5)) == doctest::Approx(std::exp(-1.0 / 3.0)).epsilon(1e-15));
  CHECK(psi(Vector::Constant(1, 0.5)) == doctest::Approx(0.71653).epsilon(1e-5));
  const Mollifier psi2(2);
  const Vector far = (Vector(2) << 1.2, 0.9).finished();  // |z| = 1.5
  CHECK(psi2(far) == 0.0);
  for (int order = 0; order <= 6; ++order)
    for (const auto& alpha : multi_indices(2, order)) CHECK(psi2.derivative(far, alpha) == 0.0);
}

TEST_CASE("mollifier stays in [0, 1]") {
  const Mollifier psi(2);
  for (int i = -20; i <= 20; ++i)
    for (int j = -20; j <= 20; ++j) {
      const Vector z = (Vector(2) << i / 15.0, j / 15.0).finished();
      const double v = psi(z);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
}

TEST_CASE("mollifier rejects derivative orders above the configured maximum") {
  const Mollifier psi(1, 3);
  const std::vector<int> ok{3}, bad{4};
  CHECK_NOTHROW(psi.derivative(Vector::Constant(1, 0.2), ok));
  CHECK_THROWS_AS(psi.derivative(Vector::Constant(1, 0.2), bad), DomainError);
}

// Closed form of the first two derivatives in one dimension, independent of
// the polynomial recursion.
double psi1(double x) { return std::abs(x) < 1 ? std::exp(1 - 1 / (1 - x * x)) : 0.0; }
double dpsi1(double x) {
  if (std::abs(x) >= 1) return 0.0;
  const double q = 1 - x * x;
  return psi1(x) * (-2 * x / (q * q));
}
double d2psi1(double x) {
  if (std::abs(x) >= 1) return 0.0;
  const double q = 1 - x * x;
  const double g = -2 * x / (q * q);
  const double dg = (-2 * q * q - (-2 * x) * 2 * q * (-2 * x)) / (q * q * q * q);
  return psi1(x) * (g * g + dg);
}

TEST_CASE("one-dimensional derivatives match the closed form") {
  const Mollifier psi(1);
  const std::vector<int> a1{1}, a2{2};
  for (double x : {-0.9, -0.6, -0.3, 0.0, 0.1, 0.45, 0.7, 0.95}) {
    const Vector z = Vector::Constant(1, x);
    CHECK(psi.derivative(z, a1) == doctest::Approx(dpsi1(x)).epsilon(1e-12));
    CHECK(psi.derivative(z, a2) == doctest::Approx(d2psi1(x)).epsilon(1e-11));
  }
}

TEST_CASE("mixed partials match finite differences") {
  const Mollifier psi(2);
  const double step = 1e-4;
  for (const Vector& z : {(Vector(2) << 0.2, -0.3).finished(), (Vector(2) << -0.5, 0.4).finished(),
                          (Vector(2) << 0.0, 0.6).finished()}) {
    const std::vector<int> a10{1, 0}, a01{0, 1}, a11{1, 1}, a21{2, 1};
    // derivatives of lower-order analytic partials by central differences
    const auto fd = [&](const std::vector<int>& base, int axis) {
      Vector zp = z, zm = z;
      zp[axis] += step;
      zm[axis] -= step;
      return (psi.derivative(zp, base) - psi.derivative(zm, base)) / (2 * step);
    };
    const auto value = [&](const Vector& x) { return psi(x); };
    Vector zp = z, zm = z;
    zp[0] += step;
    zm[0] -= step;
    CHECK(psi.derivative(z, a10) == doctest::Approx((value(zp) - value(zm)) / (2 * step)).epsilon(1e-6));
    CHECK(psi.derivative(z, a11) == doctest::Approx(fd(a10, 1)).epsilon(1e-6));
    CHECK(psi.derivative(z, a21) == doctest::Approx(fd(a11, 0)).epsilon(1e-6));
    CHECK(psi.derivative(z, a11) == doctest::Approx(fd(a01, 0)).epsilon(1e-6));
  }
}

TEST_CASE("radial derivatives follow the recursion") {
  const Mollifier psi(1);
  const double step = 1e-5;
  for (double u : {0.0, 0.2, 0.5, 0.8}) {
    for (int k = 0; k < 4; ++k) {
      const double fd = (psi.radial_derivative(u + step, k) - psi.radial_derivative(u - step, k)) / (2 * step);
      CHECK(psi.radial_derivative(u, k + 1) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("finite-difference derivatives are continuous across the unit sphere") {
  const Mollifier psi(2);
  const Vector dir = (Vector(2) << 0.6, 0.8).finished();
  const double step = 1e-3;
  for (int order = 1; order <= 3; ++order) {
    // central difference of the given order at r = 1, straddling the support edge
    double d = 0.0;
    for (int j = 0; j <= order; ++j) {
      const double binom = std::tgamma(order + 1) / (std::tgamma(j + 1) * std::tgamma(order - j + 1));
      const double r = 1.0 + (order / 2.0 - j) * step;
      d += (j % 2 ? -1.0 : 1.0) * binom * psi(Vector(r * dir));
    }
    d /= std::pow(step, order);
    CHECK(std::abs(d) < 1e-8);
  }
}

TEST_CASE("multi-indices are complete and in descending lexicographic order") {
  const auto idx = multi_indices(2, 2);
  REQUIRE(idx.size() == 3);
  CHECK(idx[0] == std::vector<int>{2, 0});
  CHECK(idx[1] == std::vector<int>{1, 1});
  CHECK(idx[2] == std::vector<int>{0, 2});
  CHECK(multi_indices(3, 3).size() == 10);
  CHECK(multi_indices(1, 5).size() == 1);
}
