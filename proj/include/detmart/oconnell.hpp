#pragma once

#include <complex>

#include "detmart/config.hpp"
#include "detmart/simulate.hpp"

namespace detmart {

struct LiftParams {
  double a = 0.1;
  PointConfiguration nu_hat;
  double t = 1.0;
  double h = 0.0;

  void validate() const;
};

constexpr double kPoleTolerance = 1e-8;

// Gamma(1 - a(u - x)) prod_{r != u} Gamma(a(r - u)) / Gamma(a(r - x)); throws
// std::domain_error within kPoleTolerance of a pole x_n = u - n/a
std::complex<double> phi_lift(const PointConfiguration& nu_hat, double u, double a, std::complex<double> x);
// distance from x to the nearest pole of phi_lift(., u, a, .)
double phi_lift_pole_distance(double u, double a, std::complex<double> x);

// E[phi_lift(x + i W(tau))], W(tau) ~ N(0, tau), by Gauss-Hermite of the given order
double lift_transform(const PointConfiguration& nu_hat, double u, double a, double tau, double x, int order);

struct OconnellResult {
  ComplexEstimate estimate;  // real part is the observable; imaginary part is a diagnostic
  long rejections = 0;       // CPR paths within pole tolerance
  int quad_order = 0;        // Gauss-Hermite order used by the DMR route
};

// E[prod_j 1(Re Z_j(1/t) >= h/t) det[phi_lift^{nu_k}(Z_j(1/t))]], Z_j = nu_j + B_j + i W_j
OconnellResult oconnell_theta_cpr(const LiftParams& p, const McOptions& opts);
// the same through real paths and the transform M^{u,a}(1/t, B_j(1/t)); the order
// starts at quad_order and doubles until probe values are stable to 1e-8
OconnellResult oconnell_theta_dmr(const LiftParams& p, const McOptions& opts, int quad_order = 128);

// E_nu[prod_j 1(X_j(t) >= h)] for the noncolliding BM from nu_hat, by the Euler sampler
Estimate reciprocal_reference(const PointConfiguration& nu_hat, double t, double h, const McOptions& opts,
                              const SdeOptions& sde = {});
// CPR with the combinatorial-limit functions at time 1/t and level h/t
ComplexEstimate reciprocal_cpr(const PointConfiguration& nu_hat, double t, double h, const McOptions& opts);

}  // namespace detmart
