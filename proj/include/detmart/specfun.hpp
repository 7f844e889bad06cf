#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "detmart/process.hpp"

namespace detmart::specfun {

double gamma(double x);
double log_gamma(double x);  // x > 0
std::complex<double> gamma(std::complex<double> z);
std::complex<double> log_gamma(std::complex<double> z);  // Re z >= 0.5 uses the principal branch
std::complex<double> rgamma(std::complex<double> z);     // 1/Gamma, entire
std::complex<double> sin_pi(std::complex<double> z);
double sin_pi(double x);

template <typename Scalar>
Scalar hermite(int n, const Scalar& x) {
  if (n < 0) throw std::invalid_argument("hermite: negative degree");
  Scalar h0(1);
  if (n == 0) return h0;
  Scalar h1 = Scalar(2) * x;
  for (int k = 1; k < n; ++k) {
    Scalar h2 = Scalar(2) * x * h1 - Scalar(2 * k) * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

// H_0..H_n at x
Eigen::VectorXd hermite_all(int n, double x);

template <typename Scalar>
Scalar laguerre(int n, double nu, const Scalar& x) {
  if (n < 0) throw std::invalid_argument("laguerre: negative degree");
  Scalar l0(1);
  if (n == 0) return l0;
  Scalar l1 = Scalar(1.0 + nu) - x;
  for (int k = 1; k < n; ++k) {
    Scalar l2 = ((Scalar(2.0 * k + 1.0 + nu) - x) * l1 - Scalar(k + nu) * l0) / Scalar(k + 1.0);
    l0 = l1;
    l1 = l2;
  }
  return l1;
}

// Bessel J of real order nu > -1 at x >= 0. Power series for x <= 8, Steed's
// continued fractions above. Instantiated for double and long double.
template <typename Real>
Real bessel_j(Real nu, Real x);

// J_nu'(x) via (nu/x) J_nu - J_{nu+1}
template <typename Real>
Real bessel_j_derivative(Real nu, Real x);

// E_nu(-w) = J_nu(2 sqrt w) / w^{nu/2}, w >= 0. Entire in w.
template <typename Real>
Real bessel_j_reduced(Real nu, Real w);

double bessel_i(double nu, double x);
// e^{-x} I_nu(x)
template <typename Real>
Real bessel_i_scaled(Real nu, Real x);

// E_nu(w) = sum_n w^n / (n! Gamma(n+nu+1)); I_nu(x) = (x/2)^nu E_nu(x^2/4).
std::complex<double> bessel_entire(double nu, std::complex<double> w);

struct BesselZeroTable {
  double nu = 0.0;
  std::vector<double> zeros;  // j_{nu,1} < j_{nu,2} < ...
};

BesselZeroTable bessel_zeros(double nu, int count);

template <typename Real>
std::vector<Real> bessel_zeros_t(Real nu, int count);

// p(t, y | x) for BM, BESQ(nu), BES(nu) and the simple random walk.
double transition_density(const ProcessKind& kind, double t, double y, double x);

template <typename Real>
Real besq_density(Real nu, Real t, Real y, Real x);

// p(s, x | zeta) for complex starting point zeta divided by p(s, x | u).
// Defined for BM and BESQ, where the density is entire in the start point.
std::complex<double> density_ratio(const ProcessKind& kind, double s, double x,
                                   std::complex<double> zeta, double u);

double theta_soften(double a, double x);

// Coefficients of (cosh a)^{-t} up to a^order.
Eigen::VectorXd cosh_neg_power_series(double t, int order);
template <typename Real>
std::vector<Real> cosh_neg_power_coeffs(Real t, int order);

}  // namespace detmart::specfun
