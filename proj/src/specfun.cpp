#include "dipole_psf/specfun.hpp"

#include <cmath>

namespace dpsf::specfun {
namespace {

constexpr double kSeriesLimit = 12.0;

double bessel_series(int n, double x) {
  const double half = 0.5 * x;
  double term = 1.0;
  for (int j = 1; j <= n; ++j) term *= half / j;
  const double q = -half * half;
  double sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * (k + n));
    sum += term;
    if (std::abs(term) < 1e-18 && k > half) break;
  }
  return sum;
}

// Hankel large-argument expansion, summed up to its smallest term.
double bessel_asymptotic(int n, double x) {
  const double mu = 4.0 * n * n;
  double p = 1.0;
  double q = 0.0;
  double a = 1.0;
  double prev = 1.0;
  for (int k = 1; k < 100; ++k) {
    const double odd = 2.0 * k - 1.0;
    a *= (mu - odd * odd) / (k * 8.0 * x);
    const double mag = std::abs(a);
    if (mag > prev || mag < 1e-17) break;
    prev = mag;
    // a_k alternates between the Q (odd k) and P (even k) series with signs (-1)^floor(k/2).
    const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 1) {
      q += sign * a;
    } else {
      p += sign * a;
    }
  }
  const double chi = x - (0.5 * n + 0.25) * kPi;
  return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace

double bessel_j(int order, double x) {
  if (order < 0 || order > 2) throw DomainError("bessel_j: order must be 0, 1 or 2");
  if (!std::isfinite(x)) throw DomainError("bessel_j: argument must be finite");
  const double ax = std::abs(x);
  const double value = ax < kSeriesLimit ? bessel_series(order, ax) : bessel_asymptotic(order, ax);
  return (x < 0.0 && order == 1) ? -value : value;
}

QuadratureRule QuadratureRule::gauss_legendre(int order) {
  if (order < 1) throw DomainError("gauss_legendre: order must be positive");
  const int n = order;
  std::vector<double> nodes(n), weights(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = z;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      double pn = n == 1 ? z : p1;
      double pnm1 = n == 1 ? 1.0 : p0;
      dp = n * (z * pn - pnm1) / (z * z - 1.0);
      const double dz = pn / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    if (n == 1) {
      z = 0.0;
      dp = 1.0;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    nodes[i] = -z;
    nodes[n - 1 - i] = z;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
  return QuadratureRule(std::move(nodes), std::move(weights));
}

const QuadratureRule& default_rule() {
  static const QuadratureRule rule = QuadratureRule::gauss_legendre(kDefaultQuadratureOrder);
  return rule;
}

}  // namespace dpsf::specfun
