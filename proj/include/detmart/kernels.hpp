#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "detmart/config.hpp"
#include "detmart/martingales.hpp"
#include "detmart/process.hpp"

namespace detmart {

enum class KernelVariant {
  general,
  rw,
  multipoint,
  extended_hermite,
  extended_laguerre,
  sine,
  bessel,
  lattice,
  besselzero
};

std::string to_string(KernelVariant v);

// K(s,x;t,y) = sum_v xi_s(v) p(s,x|v) M^v(.. | t,y) - 1(s>t) p(s-t,x|y) and the
// closed-form special cases. Immutable; copies share the precomputed state.
class CorrelationKernel {
 public:
  struct State;

  // picks rw for RW, general for simple xi and multipoint otherwise
  static CorrelationKernel make(const ProcessKind& kind, const PointConfiguration& xi);
  static CorrelationKernel general(const ProcessKind& kind, const PointConfiguration& xi);
  static CorrelationKernel rw(const PointConfiguration& xi);
  static CorrelationKernel multipoint(const ProcessKind& kind, const PointConfiguration& xi);
  static CorrelationKernel extended_hermite(int N);
  static CorrelationKernel extended_laguerre(int N, double nu);
  static CorrelationKernel sine();
  static CorrelationKernel bessel(double nu);
  // infinite configurations Z (BM) and {j_{nu,k}^2} (BESQ(nu)), truncations chosen adaptively
  static CorrelationKernel lattice();
  static CorrelationKernel besselzero(double nu);

  double operator()(double s, double x, double t, double y) const;

  KernelVariant variant() const { return variant_; }
  const ProcessKind& process() const { return kind_; }
  const PointConfiguration& xi() const { return xi_; }  // empty for sine/bessel/lattice/besselzero
  int order() const { return n_; }                       // N for the extended kernels
  const State* state_ptr() const { return state_.get(); }

 private:
  CorrelationKernel(KernelVariant v, ProcessKind kind, PointConfiguration xi, int n);

  KernelVariant variant_;
  ProcessKind kind_;
  PointConfiguration xi_;
  int n_ = 0;
  std::shared_ptr<const State> state_;
};

double kernel_eval(const CorrelationKernel& k, double s, double x, double t, double y);

// Extended Hermite and Laguerre kernels in orthonormal-function form together
// with the gauges g(s,x)/g(t,y) for which gauge * K_H equals the N delta_0 kernel.
double kernel_extended_hermite(int N, double s, double x, double t, double y);
double kernel_extended_laguerre(int N, double nu, double s, double x, double t, double y);
double hermite_gauge(double s, double x, double t, double y);
double laguerre_gauge(double nu, double s, double x, double t, double y);

// orthonormal Hermite functions phi_0..phi_{n-1} and Laguerre functions phi^{(nu)}_0..
Eigen::VectorXd hermite_functions(int n, double x);
Eigen::VectorXd laguerre_functions(int n, double nu, double x);

double kernel_sine(double t, double x);
double kernel_bessel(double nu, double t, double y, double x);

struct TruncatedValue {
  double value = 0.0;
  int window = 0;          // images |m| <= window, or zeros k <= window
  double doubling_change = 0.0;  // |value(window) - value(window / 2)|
};

// noncolliding BM from Z: Poisson-resummed form with |m| <= window images
TruncatedValue lattice_kernel(double s, double x, double t, double y, double tol = 1e-10);
// direct form sum_{|k| <= L} p(s,x|k) M^k(t,y); only sensible for small t
double lattice_kernel_direct(int L, double s, double x, double t, double y);
// noncolliding BESQ(nu) from {j_{nu,k}^2}, zeros k <= window
TruncatedValue besselzero_kernel(double nu, double s, double x, double t, double y, double tol = 1e-10);
double besselzero_kernel_direct(const specfun::BesselZeroTable& table, double s, double x, double t, double y);

struct SpaceTimeQuery {
  std::vector<double> times;                // strictly increasing, positive
  std::vector<std::vector<double>> points;  // points[m] at times[m]

  Eigen::Index size() const;
  void validate() const;
};

using KernelFunction = std::function<double(double s, double x, double t, double y)>;

// det of the block matrix [K(t_m, x_j^(m); t_n, x_k^(n))]
double correlation(const CorrelationKernel& k, const SpaceTimeQuery& q);
double correlation(const KernelFunction& k, const SpaceTimeQuery& q);
Eigen::MatrixXd correlation_matrix(const KernelFunction& k, const SpaceTimeQuery& q);

// eigenvalue density of GUE with variance t
double gue_density(int N, double t, const Eigen::VectorXd& x);
// det[p(t, y_j | x_k)]
double karlin_mcgregor(const ProcessKind& kind, double t, const Eigen::VectorXd& y, const Eigen::VectorXd& x);
// h(y)/h(x) det[p(t, y_j | x_k)] for distinct x
double noncolliding_density(const ProcessKind& kind, double t, const Eigen::VectorXd& y, const Eigen::VectorXd& x);

enum class RelaxationVariant { sine, bessel };

struct RelaxationStep {
  double tau = 0.0;
  double kernel = 0.0;
  double limit = 0.0;
  double discrepancy = 0.0;
  int window = 0;
  double doubling_change = 0.0;
};

// |K_xi(s+tau, x; t+tau, y) - limit| along the tau ladder; the limit is
// K_sin(t-s, y-x) for the lattice and (x/y)^{nu/2} K_J(t-s, y|x) for Bessel zeros.
std::vector<RelaxationStep> relaxation_probe(RelaxationVariant variant, double nu, double s, double x, double t,
                                             double y, const std::vector<double>& taus);

// rows (s, x, t, y, value)
void write_kernel_csv(std::ostream& out, const CorrelationKernel& k,
                      const std::vector<std::array<double, 4>>& points);

}  // namespace detmart
