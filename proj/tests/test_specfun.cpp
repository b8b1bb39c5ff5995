#include <doctest.h>

#include <cmath>

#include "dipole_psf/specfun.hpp"

using dpsf::specfun::bessel_j;
using dpsf::specfun::QuadratureRule;

namespace {

// Plain 60-term ascending series in long double; reliable for small arguments.
long double series_oracle(int n, long double x) {
  long double half = x / 2;
  long double term = 1;
  for (int j = 1; j <= n; ++j) term *= half / j;
  long double sum = term;
  for (int k = 1; k < 60; ++k) {
    term *= -half * half / (static_cast<long double>(k) * (k + n));
    sum += term;
  }
  return sum;
}

// Bessel's integral by the trapezoid rule, spectrally accurate for a periodic integrand.
double integral_oracle(int n, double x) {
  const int m = 4000;
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    const double t = 2.0 * dpsf::kPi * i / m;
    s += std::cos(n * t - x * std::sin(t));
  }
  return s / m;
}

}  // namespace

TEST_CASE("bessel_j trivial values") {
  CHECK(bessel_j(0, 0.0) == doctest::Approx(1.0));
  CHECK(bessel_j(1, 0.0) == 0.0);
  CHECK(bessel_j(2, 0.0) == 0.0);
}

TEST_CASE("bessel_j first zero of J1 matches a series oracle") {
  long double lo = 3.5L, hi = 4.0L;
  for (int i = 0; i < 200; ++i) {
    long double mid = 0.5L * (lo + hi);
    if (series_oracle(1, lo) * series_oracle(1, mid) <= 0) hi = mid; else lo = mid;
  }
  CHECK(static_cast<double>(lo) == doctest::Approx(3.8317059702).epsilon(1e-10));
  CHECK(std::abs(bessel_j(1, 3.8317059702)) < 1e-8);
}

TEST_CASE("bessel_j absolute accuracy up to |x| = 50") {
  double worst = 0.0;
  for (int n = 0; n <= 2; ++n) {
    for (double x = -50.0; x <= 50.0; x += 0.0731) {
      worst = std::max(worst, std::abs(bessel_j(n, x) - integral_oracle(n, x)));
    }
    for (double x = 11.0; x <= 13.0; x += 0.001) {
      worst = std::max(worst, std::abs(bessel_j(n, x) - integral_oracle(n, x)));
    }
  }
  CHECK(worst < 1e-10);
  for (double x = 0.0; x < 8.0; x += 0.37) {
    CHECK(std::abs(bessel_j(2, x) - static_cast<double>(series_oracle(2, x))) < 1e-13);
  }
}

TEST_CASE("bessel_j recurrence J0 + J2 = 2 J1 / x") {
  for (double x = 0.01; x <= 20.0; x += 0.013) {
    CHECK(std::abs(bessel_j(0, x) + bessel_j(2, x) - 2.0 / x * bessel_j(1, x)) < 1e-9);
  }
}

TEST_CASE("bessel_j rejects bad input") {
  CHECK_THROWS_AS(bessel_j(0, std::nan("")), dpsf::DomainError);
  CHECK_THROWS_AS(bessel_j(0, INFINITY), dpsf::DomainError);
  CHECK_THROWS_AS(bessel_j(3, 1.0), dpsf::DomainError);
}

TEST_CASE("Gauss-Legendre rule invariants") {
  for (int order : {1, 2, 3, 4, 7, 16, 32, 64, 65, 128}) {
    auto rule = QuadratureRule::gauss_legendre(order);
    REQUIRE(rule.order() == order);
    double wsum = 0.0;
    for (double w : rule.weights()) {
      CHECK(w > 0.0);
      wsum += w;
    }
    CHECK(std::abs(wsum - 2.0) < 1e-12);
    for (int i = 1; i < order; ++i) CHECK(rule.nodes()[i] > rule.nodes()[i - 1]);
    CHECK(rule.nodes().front() >= -1.0);
    CHECK(rule.nodes().back() <= 1.0);
  }
}

TEST_CASE("integrate examples") {
  auto r4 = QuadratureRule::gauss_legendre(4);
  CHECK(dpsf::specfun::integrate([](double) { return 1.0; }, 0, 1, r4) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(dpsf::specfun::integrate([](double x) { return x * x * x; }, 0, 1, r4) == doctest::Approx(0.25).epsilon(1e-15));
  // Degree 2n-1 exactness, degree 2n is not exact.
  CHECK(dpsf::specfun::integrate([](double x) { return std::pow(x, 7); }, 0, 1, r4) == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(std::abs(dpsf::specfun::integrate([](double x) { return std::pow(x, 8); }, 0, 1, r4) - 1.0 / 9.0) > 1e-8);

  auto r16 = QuadratureRule::gauss_legendre(16);
  double trap = 0.0;
  const int m = 1000000;
  for (int i = 0; i <= m; ++i) trap += (i == 0 || i == m ? 0.5 : 1.0) * std::sin(dpsf::kPi * i / m);
  trap *= dpsf::kPi / m;
  const double gl = dpsf::specfun::integrate([](double x) { return std::sin(x); }, 0, dpsf::kPi, r16);
  CHECK(std::abs(gl - 2.0) < 1e-10);
  CHECK(std::abs(gl - trap) < 1e-10);
  CHECK_THROWS_AS(dpsf::specfun::integrate([](double) { return 1.0; }, 1, 0, r4), dpsf::DomainError);
}

TEST_CASE("quadrature converges on the I0 integrand") {
  auto f = [](double t) { return std::sqrt(std::cos(t)) * std::sin(t) * (1 + std::cos(t)); };
  for (double tm : {0.2, 0.6, dpsf::kPi / 3}) {
    for (int order : {32, 64}) {
      double a = dpsf::specfun::integrate(f, 0, tm, QuadratureRule::gauss_legendre(order));
      double b = dpsf::specfun::integrate(f, 0, tm, QuadratureRule::gauss_legendre(2 * order));
      CHECK(std::abs(a - b) < 1e-10);
    }
  }
}
