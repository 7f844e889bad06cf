#pragma once

#include <complex>

#include <Eigen/Core>

#include "detmart/config.hpp"
#include "detmart/process.hpp"
#include "detmart/random.hpp"
#include "detmart/specfun.hpp"

namespace detmart {

// m_n(t, x) for BM (Hermite), BESQ (Laguerre) and RW (Fujita polynomials).
double poly_martingale(const ProcessKind& kind, int n, double t, double x);
// m_0 .. m_nmax at (t, x)
Eigen::VectorXd poly_martingales(const ProcessKind& kind, int nmax, double t, double x);

// sum_n m_n(t,x) alpha^n / n!
std::complex<double> generating_function(const ProcessKind& kind, std::complex<double> alpha, double t,
                                         double x);

enum class TransformRoute { coefficient, quadrature };

// t -> M_xi^u(t, .) = M[Phi_xi^u(cW) | (t, y)] for simple xi.
class MartingaleTransform {
 public:
  MartingaleTransform(const ProcessKind& kind, const PointConfiguration& xi, double u,
                      TransformRoute route = TransformRoute::coefficient);

  double operator()(double t, double y) const;
  const Eigen::VectorXd& coefficients() const { return coeffs_; }
  const ProcessKind& process() const { return kind_; }

 private:
  double quadrature(double t, double y) const;

  ProcessKind kind_;
  Eigen::VectorXd support_;
  Eigen::Index index_ = 0;
  Eigen::VectorXd coeffs_;
  TransformRoute route_;
};

double martingale_transform(const ProcessKind& kind, const PointConfiguration& xi, double u, double t,
                            double y, TransformRoute route = TransformRoute::coefficient);

// sum_l a_l(s,x) m_l(t,y) with a_l the coefficients of the two-time Phi
double martingale_transform_twotime(const ProcessKind& kind, const PointConfiguration& xi, double u,
                                    double s, double x, double t, double y);

// One draw of C(t) = (2/pi^2) sum_l eta_l(t)/(l - 1/2)^2, eta_l ~ Gamma(t, 1) iid,
// truncated at L terms with the tail replaced by its mean.
double sample_ctime(double t, RandomStream& rng, int L = 1000);

// Q_t^{(n+1/2)}(z)
std::complex<double> bes_q_factor(int n, double t, std::complex<double> z);
// closed form of the BES(n+1/2) transform of (iW)^{2l} at (t, x)
double bes_transform_monomial(int n, int l, double t, double x);

// (1/2pi) int_{-pi}^{pi} e^{lambda^2 t/2 + i lambda (x-k)} d lambda
double lattice_martingale(double k, double t, double x);
// martingale for the k-th (1-based) zero of a Bessel zero table, BESQ(nu) coordinates
double besselzero_martingale(const specfun::BesselZeroTable& table, int k, double t, double x);

}  // namespace detmart
