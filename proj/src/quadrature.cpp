#include "detmart/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "detmart/specfun.hpp"

namespace detmart::quad {

template <typename Real>
Rule<Real> gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  Rule<Real> r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const Real pi = std::numbers::pi_v<Real>;
  const Real eps = std::numeric_limits<Real>::epsilon();
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    Real z = std::cos(pi * (Real(i) + Real(0.75)) / (Real(n) + Real(0.5)));
    Real pp = 0;
    for (int it = 0; it < 100; ++it) {
      Real p1 = 1, p2 = 0;
      for (int j = 0; j < n; ++j) {
        const Real p3 = p2;
        p2 = p1;
        p1 = ((2 * Real(j) + 1) * z * p2 - Real(j) * p3) / Real(j + 1);
      }
      pp = Real(n) * (z * p1 - p2) / (z * z - 1);
      const Real z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 2 * eps) break;
    }
    r.nodes[i] = -z;
    r.nodes[n - 1 - i] = z;
    r.weights[i] = r.weights[n - 1 - i] = 2 / ((1 - z * z) * pp * pp);
  }
  return r;
}

template Rule<double> gauss_legendre<double>(int);
template Rule<long double> gauss_legendre<long double>(int);

Rule<double> gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be positive");
  const double pim4 = 0.7511255444649425;  // pi^{-1/4}
  // Golub-Welsch nodes as starting points, then Newton on the orthonormal recurrence
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) jac(i, i - 1) = jac(i - 1, i) = std::sqrt(i / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac, Eigen::EigenvaluesOnly);
  Rule<double> r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = es.eigenvalues()(i), pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(double(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    r.nodes[i] = z;
    r.weights[i] = 2.0 / (pp * pp);
  }
  return r;
}

Rule<double> gauss_laguerre(int n, double alpha) {
  if (n < 1) throw std::invalid_argument("gauss_laguerre: n must be positive");
  if (!(alpha > -1)) throw std::domain_error("gauss_laguerre: alpha must exceed -1");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    jac(i, i) = 2.0 * i + alpha + 1.0;
    if (i > 0) jac(i, i - 1) = jac(i - 1, i) = std::sqrt(i * (i + alpha));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  const double mu0 = specfun::gamma(alpha + 1.0);
  Rule<double> r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    r.weights[i] = mu0 * v0 * v0;
  }
  return r;
}

namespace {

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error, abs_value;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = (a + b) / 2, h = (b - a) / 2;
  const double fc = f(c);
  double kron = fc * kWgk[7], gauss = fc * kWg[3], kabs = std::abs(fc) * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx), f2 = f(c + dx);
    kron += kWgk[j] * (f1 + f2);
    kabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  kron *= h;
  gauss *= h;
  kabs *= std::abs(h);
  // error below the roundoff level of int |f| cannot be resolved
  const double err = std::max(std::abs(kron - gauss), 50 * std::numeric_limits<double>::epsilon() * kabs);
  return {a, b, kron, err, kabs};
}

}  // namespace

Result integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 double rel_tol, int max_depth) {
  if (a == b) return {};
  std::priority_queue<Segment> queue;
  Segment first = gk15(f, a, b);
  queue.push(first);
  double value = first.value, error = first.error, abs_value = first.abs_value;
  const int max_segments = 1 << std::min(max_depth, 14);
  int segments = 1;
  while (error > std::max(abs_tol, rel_tol * std::abs(value))) {
    if (segments >= max_segments)
      {
      char msg[128];
      std::snprintf(msg, sizeof msg, "integrate: tolerance not reached on [%g, %g], value %.6g, error estimate %.3g", a,
                    b, value, error);
      throw NumericError(msg);
    }
    Segment worst = queue.top();
    queue.pop();
    const double mid = (worst.a + worst.b) / 2;
    const Segment left = gk15(f, worst.a, mid), right = gk15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    abs_value += left.abs_value + right.abs_value - worst.abs_value;
    queue.push(left);
    queue.push(right);
    ++segments;
    if (error <= 64 * std::numeric_limits<double>::epsilon() * std::max(std::abs(value), abs_value)) break;
  }
  // recompute from the leaves to avoid drift in the running sums
  double v = 0.0, e = 0.0;
  while (!queue.empty()) {
    v += queue.top().value;
    e += queue.top().error;
    queue.pop();
  }
  return {v, e};
}

}  // namespace detmart::quad
