#include "detmart/martingales.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "detmart/quadrature.hpp"

namespace detmart {

using cplx = std::complex<double>;
using Tag = ProcessKind::Tag;

Eigen::VectorXd poly_martingales(const ProcessKind& kind, int nmax, double t, double x) {
  if (nmax < 0) throw std::invalid_argument("poly_martingales: negative degree");
  if (t < 0) throw std::domain_error("poly_martingales: t must be non-negative");
  Eigen::VectorXd m(nmax + 1);
  m(0) = 1.0;
  switch (kind.tag) {
    case Tag::BM:
      if (nmax >= 1) m(1) = x;
      for (int n = 1; n < nmax; ++n) m(n + 1) = x * m(n) - n * t * m(n - 1);
      break;
    case Tag::BESQ: {
      const double nu = kind.nu;
      if (nmax >= 1) m(1) = x - 2.0 * t * (nu + 1.0);
      for (int n = 1; n < nmax; ++n)
        m(n + 1) = (x - 2.0 * t * (2.0 * n + 1.0 + nu)) * m(n) - 4.0 * t * t * n * (n + nu) * m(n - 1);
      break;
    }
    case Tag::RW: {
      // extended precision: the monomial sum cancels heavily for large t
      const auto s = specfun::cosh_neg_power_coeffs<long double>(t, nmax);
      for (int n = 1; n <= nmax; ++n) {
        // sum_k n!/(n-k)! s_k x^{n-k}, odd s_k vanish
        long double sum = 0, falling = 1;
        for (int k = 0; k <= n; ++k) {
          if (k > 0) falling *= (n - k + 1);
          if (k % 2 == 0) sum += falling * s[k] * std::pow((long double)x, n - k);
        }
        m(n) = double(sum);
      }
      break;
    }
    case Tag::BES: throw std::invalid_argument("poly_martingales: BES has no polynomial martingales here");
  }
  return m;
}

double poly_martingale(const ProcessKind& kind, int n, double t, double x) {
  return poly_martingales(kind, n, t, x)(n);
}

cplx generating_function(const ProcessKind& kind, cplx alpha, double t, double x) {
  switch (kind.tag) {
    case Tag::BM: return std::exp(alpha * x - t * alpha * alpha / 2.0);
    case Tag::BESQ: {
      const cplx d = 1.0 + 2.0 * t * alpha;
      return std::exp(alpha * x / d) / std::pow(d, kind.nu + 1.0);
    }
    case Tag::RW: return std::exp(alpha * x) / std::pow(std::cosh(alpha), t);
    case Tag::BES: break;
  }
  throw std::invalid_argument("generating_function: unsupported process");
}

MartingaleTransform::MartingaleTransform(const ProcessKind& kind, const PointConfiguration& xi, double u,
                                         TransformRoute route)
    : kind_(kind), support_(xi.support()), route_(route) {
  if (kind.tag == Tag::BES) throw std::invalid_argument("martingale transform: use BESQ coordinates for BES");
  if (!xi.simple()) throw std::invalid_argument("martingale transform requires a simple configuration");
  index_ = xi.index_of(u);
  coeffs_ = phi_coeffs(xi, u);
  if (route == TransformRoute::quadrature && kind.tag == Tag::RW)
    throw std::invalid_argument("quadrature route is only available for BM and BESQ");
}

double MartingaleTransform::operator()(double t, double y) const {
  if (t < 0) throw std::domain_error("martingale transform: t must be non-negative");
  if (route_ == TransformRoute::quadrature && t > 0) return quadrature(t, y);
  const Eigen::VectorXd m = poly_martingales(kind_, int(coeffs_.size()) - 1, t, y);
  return coeffs_.dot(m);
}

double MartingaleTransform::quadrature(double t, double y) const {
  const int deg = int(coeffs_.size()) - 1;
  if (kind_.tag == Tag::BM) {
    // E[Phi(y + i sqrt(t) G)]
    static const quad::Rule<double> rule = quad::gauss_hermite(48);
    if (deg >= 2 * 48) throw std::invalid_argument("quadrature route: configuration too large");
    double sum = 0.0;
    const double sc = std::sqrt(2.0 * t);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      sum += rule.weights[i] * phi_simple(support_, index_, cplx(y, sc * rule.nodes[i])).real();
    return sum / std::sqrt(std::numbers::pi);
  }
  // BESQ: e^Y int_0^inf v^nu e^{-v} E_nu(-Y v) Phi(-2 t v) dv with Y = y / 2t
  const quad::Rule<double> rule = quad::gauss_laguerre(128, kind_.nu);
  const double Y = y / (2.0 * t);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double v = rule.nodes[i];
    sum += rule.weights[i] * specfun::bessel_j_reduced(kind_.nu, Y * v) * phi_simple(support_, index_, -2.0 * t * v);
  }
  return std::exp(Y) * sum;
}

double martingale_transform(const ProcessKind& kind, const PointConfiguration& xi, double u, double t, double y,
                            TransformRoute route) {
  return MartingaleTransform(kind, xi, u, route)(t, y);
}

double martingale_transform_twotime(const ProcessKind& kind, const PointConfiguration& xi, double u, double s,
                                    double x, double t, double y) {
  const Eigen::VectorXd a = phi_twotime_coeffs(kind, xi, u, s, x);
  const Eigen::VectorXd m = poly_martingales(kind, int(a.size()) - 1, t, y);
  return a.dot(m);
}

double sample_ctime(double t, RandomStream& rng, int L) {
  if (t < 0) throw std::domain_error("sample_ctime: t must be non-negative");
  if (L < 1) throw std::invalid_argument("sample_ctime: L must be positive");
  if (t == 0) return 0.0;
  constexpr double pi2 = std::numbers::pi * std::numbers::pi;
  double sum = 0.0, head = 0.0;
  for (int l = 1; l <= L; ++l) {
    const double w = 1.0 / ((l - 0.5) * (l - 0.5));
    head += w;
    sum += rng.gamma(t) * w;
  }
  const double tail = pi2 / 2.0 - head;
  return 2.0 / pi2 * (sum + t * tail);
}

namespace {

double central_ratio(int n, int k) {
  // (2n-k)! / ((n-k)! k!)
  return std::exp(std::lgamma(2.0 * n - k + 1.0) - std::lgamma(n - k + 1.0) - std::lgamma(k + 1.0));
}

}  // namespace

cplx bes_q_factor(int n, double t, cplx z) {
  if (n < 0) throw std::invalid_argument("bes_q_factor: n must be non-negative");
  if (!(t > 0)) throw std::domain_error("bes_q_factor: t must be positive");
  const double r = z.real();
  if (!(r > 0)) throw std::domain_error("bes_q_factor: Re z must be positive");
  cplx sum = 0.0, pw = 1.0;
  const cplx q = 2.0 * r * z / t;
  for (int k = 0; k <= n; ++k) {
    sum += std::round(central_ratio(n, k)) * pw;
    pw *= q;
  }
  return std::pow(t / 2.0, n) * z / std::pow(r, 2 * n + 1) * sum;
}

double bes_transform_monomial(int n, int l, double t, double x) {
  if (n < 0 || l < 0) throw std::invalid_argument("bes_transform_monomial: negative index");
  if (!(t > 0) || !(x > 0)) throw std::domain_error("bes_transform_monomial: t and x must be positive");
  const double X = x / std::sqrt(2.0 * t);
  const Eigen::VectorXd h = specfun::hermite_all(2 * l + n + 1, X);
  double sum = 0.0;
  for (int k = 0; k <= n; ++k) sum += std::round(central_ratio(n, k)) * std::pow(2.0 * X, k) * h(2 * l + k + 1);
  return std::ldexp(1.0, -(2 * n + 1)) * std::pow(t / 2.0, l) * std::pow(X, -(2 * n + 1)) * sum;
}

double lattice_martingale(double k, double t, double x) {
  if (t < 0) throw std::domain_error("lattice_martingale: t must be non-negative");
  const double d = x - k;
  if (t == 0) return d == 0 ? 1.0 : std::sin(std::numbers::pi * d) / (std::numbers::pi * d);
  auto f = [&](double lam) { return std::exp(lam * lam * t / 2.0) * std::cos(lam * d); };
  return quad::integrate(f, 0.0, std::numbers::pi, 1e-14, 1e-12).value / std::numbers::pi;
}

double besselzero_martingale(const specfun::BesselZeroTable& table, int k, double t, double x) {
  if (k < 1 || k > int(table.zeros.size())) throw std::out_of_range("besselzero_martingale: zero index");
  if (t < 0 || x < 0) throw std::domain_error("besselzero_martingale: t and x must be non-negative");
  const double nu = table.nu, j = table.zeros[k - 1];
  const double jp = specfun::bessel_j(nu + 1.0, j);
  // lambda = r^2
  auto f = [&](double r) {
    return 2.0 * r * std::exp(r * r * t / 2.0) * std::pow(r * j / 2.0, nu) *
           specfun::bessel_j_reduced(nu, r * r * x / 4.0) * specfun::bessel_j(nu, r * j);
  };
  return quad::integrate(f, 0.0, 1.0, 1e-14, 1e-12).value / (jp * jp);
}

}  // namespace detmart
