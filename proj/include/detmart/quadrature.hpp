#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "detmart/errors.hpp"

namespace detmart::quad {

template <typename Real>
struct Rule {
  std::vector<Real> nodes;
  std::vector<Real> weights;
};

// Gauss-Legendre on [-1, 1]
template <typename Real>
Rule<Real> gauss_legendre(int n);

// Gauss-Hermite for weight e^{-x^2}
Rule<double> gauss_hermite(int n);

// Generalized Gauss-Laguerre for weight x^alpha e^{-x}
Rule<double> gauss_laguerre(int n, double alpha);

struct Result {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive Gauss-Kronrod (7/15) on [a, b].
Result integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-12, double rel_tol = 1e-12, int max_depth = 40);

// Fixed Gauss-Legendre sum on [a, b].
template <typename Real, typename F>
auto integrate_fixed(const Rule<Real>& rule, F&& f, Real a, Real b) {
  const Real half = (b - a) / 2, mid = (a + b) / 2;
  using Out = decltype(f(mid));
  Out sum{};
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return Out(sum * half);
}

}  // namespace detmart::quad
