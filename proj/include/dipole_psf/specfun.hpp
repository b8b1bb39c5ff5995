#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dipole_psf/common.hpp"

namespace dpsf::specfun {

/// Bessel function of the first kind J_order(x) for order 0, 1 or 2.
/// Absolute error is below 1e-10 for |x| <= 50.
/// Throws DomainError for non-finite x or an unsupported order.
double bessel_j(int order, double x);

/// Gauss-Legendre rule on [-1, 1]. Immutable once built.
class QuadratureRule {
 public:
  /// Builds an order-point rule by Newton iteration on P_order.
  static QuadratureRule gauss_legendre(int order);

  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  int order() const { return static_cast<int>(nodes_.size()); }

 private:
  QuadratureRule(std::vector<double> nodes, std::vector<double> weights)
      : nodes_(std::move(nodes)), weights_(std::move(weights)) {}
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

inline constexpr int kDefaultQuadratureOrder = 64;

/// Shared order-64 rule, built on first use.
const QuadratureRule& default_rule();

/// Gauss-Legendre estimate of the integral of f over [a, b].
template <class F>
double integrate(F&& f, double a, double b, const QuadratureRule& rule) {
  if (!(a <= b)) throw DomainError("integrate: lower bound exceeds upper bound");
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  auto x = rule.nodes();
  auto w = rule.weights();
  for (std::size_t i = 0; i < x.size(); ++i) sum += w[i] * f(mid + half * x[i]);
  return half * sum;
}

}  // namespace dpsf::specfun
