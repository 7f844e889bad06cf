#include "detmart/kernels.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <Eigen/LU>

#include "detmart/errors.hpp"
#include "detmart/quadrature.hpp"
#include "detmart/specfun.hpp"

namespace detmart {

using Tag = ProcessKind::Tag;
namespace sf = specfun;

std::string to_string(KernelVariant v) {
  switch (v) {
    case KernelVariant::general: return "general";
    case KernelVariant::rw: return "rw";
    case KernelVariant::multipoint: return "multipoint";
    case KernelVariant::extended_hermite: return "extended_hermite";
    case KernelVariant::extended_laguerre: return "extended_laguerre";
    case KernelVariant::sine: return "sine";
    case KernelVariant::bessel: return "bessel";
    case KernelVariant::lattice: return "lattice";
    case KernelVariant::besselzero: return "besselzero";
  }
  return "unknown";
}

struct CorrelationKernel::State {
  // general / rw: one transform per atom, in BESQ coordinates for BES
  ProcessKind inner = ProcessKind::bm();
  PointConfiguration inner_xi;
  Eigen::VectorXd support;
  std::vector<MartingaleTransform> transforms;
  int parity = 0;
};

namespace {

bool is_integer(double v) { return std::isfinite(v) && v == std::round(v); }

void require_positive_times(double s, double t) {
  if (!(s > 0) || !(t > 0)) throw std::domain_error("kernel: times must be positive");
}

}  // namespace

CorrelationKernel::CorrelationKernel(KernelVariant v, ProcessKind kind, PointConfiguration xi, int n)
    : variant_(v), kind_(kind), xi_(std::move(xi)), n_(n) {}

CorrelationKernel CorrelationKernel::make(const ProcessKind& kind, const PointConfiguration& xi) {
  if (kind.tag == Tag::RW) return rw(xi);
  return xi.simple() ? general(kind, xi) : multipoint(kind, xi);
}

CorrelationKernel CorrelationKernel::general(const ProcessKind& kind, const PointConfiguration& xi) {
  if (kind.tag == Tag::RW) return rw(xi);
  if (xi.empty()) throw std::invalid_argument("kernel: empty configuration");
  if (!xi.simple()) throw std::invalid_argument("general kernel requires a simple configuration; use multipoint");
  CorrelationKernel k(KernelVariant::general, kind, xi, xi.total());
  auto st = std::make_shared<State>();
  if (kind.tag == Tag::BES) {
    st->inner = ProcessKind::besq(kind.nu);
    st->inner_xi = square(xi);
  } else {
    st->inner = kind;
    st->inner_xi = xi;
  }
  st->support = st->inner_xi.support();
  for (Eigen::Index i = 0; i < st->support.size(); ++i)
    st->transforms.emplace_back(st->inner, st->inner_xi, st->support(i));
  k.state_ = std::move(st);
  return k;
}

CorrelationKernel CorrelationKernel::rw(const PointConfiguration& xi) {
  if (xi.empty()) throw std::invalid_argument("kernel: empty configuration");
  if (!xi.simple()) throw std::invalid_argument("rw kernel requires a simple configuration");
  const Eigen::VectorXd u = xi.support();
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (!is_integer(u(i))) throw std::invalid_argument("rw kernel: atoms must be integers");
    if ((std::llround(u(i) - u(0)) & 1) != 0) throw std::invalid_argument("rw kernel: atoms must share parity");
  }
  CorrelationKernel k(KernelVariant::rw, ProcessKind::rw(), xi, xi.total());
  auto st = std::make_shared<State>();
  st->inner = ProcessKind::rw();
  st->inner_xi = xi;
  st->support = u;
  st->parity = int(std::llround(u(0)) & 1);
  for (Eigen::Index i = 0; i < u.size(); ++i) st->transforms.emplace_back(st->inner, xi, u(i));
  k.state_ = std::move(st);
  return k;
}

CorrelationKernel CorrelationKernel::multipoint(const ProcessKind& kind, const PointConfiguration& xi) {
  if (kind.tag == Tag::RW) throw std::invalid_argument("multipoint kernel: RW is not supported");
  if (xi.empty()) throw std::invalid_argument("kernel: empty configuration");
  CorrelationKernel k(KernelVariant::multipoint, kind, xi, xi.total());
  auto st = std::make_shared<State>();
  if (kind.tag == Tag::BES) {
    st->inner = ProcessKind::besq(kind.nu);
    st->inner_xi = square(xi);
  } else {
    st->inner = kind;
    st->inner_xi = xi;
  }
  st->support = st->inner_xi.support();
  k.state_ = std::move(st);
  return k;
}

CorrelationKernel CorrelationKernel::extended_hermite(int N) {
  if (N < 1) throw std::invalid_argument("extended_hermite: N must be positive");
  return CorrelationKernel(KernelVariant::extended_hermite, ProcessKind::bm(), {}, N);
}

CorrelationKernel CorrelationKernel::extended_laguerre(int N, double nu) {
  if (N < 1) throw std::invalid_argument("extended_laguerre: N must be positive");
  return CorrelationKernel(KernelVariant::extended_laguerre, ProcessKind::besq(nu), {}, N);
}

CorrelationKernel CorrelationKernel::sine() { return CorrelationKernel(KernelVariant::sine, ProcessKind::bm(), {}, 0); }

CorrelationKernel CorrelationKernel::bessel(double nu) {
  return CorrelationKernel(KernelVariant::bessel, ProcessKind::besq(nu), {}, 0);
}

CorrelationKernel CorrelationKernel::lattice() {
  return CorrelationKernel(KernelVariant::lattice, ProcessKind::bm(), {}, 0);
}

CorrelationKernel CorrelationKernel::besselzero(double nu) {
  return CorrelationKernel(KernelVariant::besselzero, ProcessKind::besq(nu), {}, 0);
}

double CorrelationKernel::operator()(double s, double x, double t, double y) const {
  switch (variant_) {
    case KernelVariant::general: {
      require_positive_times(s, t);
      const State& st = *state_;
      double xs = x, ys = y, jac = 1.0;
      if (kind_.tag == Tag::BES) {
        if (x < 0 || y < 0) return 0.0;
        xs = x * x;
        ys = y * y;
        jac = 2.0 * x;
      }
      double sum = 0.0;
      for (std::size_t i = 0; i < st.transforms.size(); ++i)
        sum += sf::transition_density(st.inner, s, xs, st.support(Eigen::Index(i))) * st.transforms[i](t, ys);
      if (s > t) sum -= sf::transition_density(st.inner, s - t, xs, ys);
      return jac * sum;
    }
    case KernelVariant::rw: {
      const State& st = *state_;
      if (s < 0 || t < 0 || !is_integer(s) || !is_integer(t) || !is_integer(x) || !is_integer(y)) return 0.0;
      if ((std::llround(s + x) & 1) != st.parity || (std::llround(t + y) & 1) != st.parity) return 0.0;
      double sum = 0.0;
      for (std::size_t i = 0; i < st.transforms.size(); ++i)
        sum += sf::transition_density(kind_, s, x, st.support(Eigen::Index(i))) * st.transforms[i](t, y);
      if (s > t) sum -= sf::transition_density(kind_, s - t, x, y);
      return sum;
    }
    case KernelVariant::multipoint: {
      require_positive_times(s, t);
      const State& st = *state_;
      double xs = x, ys = y, jac = 1.0;
      if (kind_.tag == Tag::BES) {
        if (x < 0 || y < 0) return 0.0;
        xs = x * x;
        ys = y * y;
        jac = 2.0 * x;
      }
      double sum = 0.0;
      for (Eigen::Index i = 0; i < st.support.size(); ++i) {
        const double v = st.support(i);
        const double p = sf::transition_density(st.inner, s, xs, v);
        if (p == 0.0) continue;
        const Eigen::VectorXd a = phi_twotime_coeffs(st.inner, st.inner_xi, v, s, xs);
        const Eigen::VectorXd m = poly_martingales(st.inner, int(a.size()) - 1, t, ys);
        sum += p * a.dot(m);
      }
      if (s > t) sum -= sf::transition_density(st.inner, s - t, xs, ys);
      return jac * sum;
    }
    case KernelVariant::extended_hermite: return kernel_extended_hermite(n_, s, x, t, y);
    case KernelVariant::extended_laguerre: return kernel_extended_laguerre(n_, kind_.nu, s, x, t, y);
    case KernelVariant::sine: return kernel_sine(t - s, y - x);
    case KernelVariant::bessel: return kernel_bessel(kind_.nu, t - s, y, x);
    case KernelVariant::lattice: return lattice_kernel(s, x, t, y).value;
    case KernelVariant::besselzero: return besselzero_kernel(kind_.nu, s, x, t, y).value;
  }
  return 0.0;
}

double kernel_eval(const CorrelationKernel& k, double s, double x, double t, double y) { return k(s, x, t, y); }

Eigen::VectorXd hermite_functions(int n, double x) {
  if (n < 0) throw std::invalid_argument("hermite_functions: negative count");
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(n);
  if (n == 0) return phi;
  phi(0) = std::exp(-x * x / 2.0) / std::sqrt(std::sqrt(std::numbers::pi));
  if (n > 1) phi(1) = std::sqrt(2.0) * x * phi(0);
  for (int k = 1; k + 1 < n; ++k)
    phi(k + 1) = std::sqrt(2.0 / (k + 1)) * x * phi(k) - std::sqrt(double(k) / (k + 1)) * phi(k - 1);
  return phi;
}

Eigen::VectorXd laguerre_functions(int n, double nu, double x) {
  if (n < 0) throw std::invalid_argument("laguerre_functions: negative count");
  if (x < 0) throw std::domain_error("laguerre_functions: x must be non-negative");
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(n);
  if (n == 0) return phi;
  // normalized Laguerre polynomials sqrt(k!/Gamma(k+nu+1)) L_k, then the common weight
  const double w = std::exp(nu / 2.0 * std::log(x) - x / 2.0 - sf::log_gamma(nu + 1.0) / 2.0);
  Eigen::VectorXd l(n);
  l(0) = 1.0;
  if (n > 1) l(1) = (nu + 1.0 - x) / std::sqrt(nu + 1.0);
  for (int k = 1; k + 1 < n; ++k)
    l(k + 1) = ((2.0 * k + nu + 1.0 - x) * l(k) - std::sqrt(k * (k + nu)) * l(k - 1)) / std::sqrt((k + 1.0) * (k + nu + 1.0));
  phi = (x == 0.0 && nu == 0.0 ? 1.0 / std::sqrt(sf::gamma(nu + 1.0)) : w) * l;
  return phi;
}

double hermite_gauge(double s, double x, double t, double y) { return std::exp(-x * x / (4 * s) + y * y / (4 * t)); }

double laguerre_gauge(double nu, double s, double x, double t, double y) {
  const double X = x / (2 * s), Y = y / (2 * t);
  return std::pow(X / Y, nu / 2.0) * std::exp(-X / 2.0 + Y / 2.0);
}

double kernel_extended_hermite(int N, double s, double x, double t, double y) {
  require_positive_times(s, t);
  const Eigen::VectorXd a = hermite_functions(N, x / std::sqrt(2 * s));
  const Eigen::VectorXd b = hermite_functions(N, y / std::sqrt(2 * t));
  double sum = 0.0;
  for (int n = 0; n < N; ++n) sum += std::pow(t / s, n / 2.0) * a(n) * b(n);
  sum /= std::sqrt(2 * s);
  if (s > t) {
    // p(s-t, x|y) divided by the gauge
    const double d = s - t;
    sum -= std::exp(-(x - y) * (x - y) / (2 * d) + x * x / (4 * s) - y * y / (4 * t)) / std::sqrt(2 * std::numbers::pi * d);
  }
  return sum;
}

double kernel_extended_laguerre(int N, double nu, double s, double x, double t, double y) {
  require_positive_times(s, t);
  if (x < 0 || y < 0) throw std::domain_error("extended Laguerre kernel: x, y must be non-negative");
  const Eigen::VectorXd a = laguerre_functions(N, nu, x / (2 * s));
  const Eigen::VectorXd b = laguerre_functions(N, nu, y / (2 * t));
  double sum = 0.0;
  for (int n = 0; n < N; ++n) sum += std::pow(t / s, n) * a(n) * b(n);
  sum /= 2 * s;
  if (s > t) {
    // (1/2d)(s/t)^{nu/2} e^{-(x+y)/2d + X/2 - Y/2} I_nu(sqrt(xy)/d)
    const double d = s - t, z = std::sqrt(x * y) / d;
    const double e = -(x + y) / (2 * d) + z + x / (4 * s) - y / (4 * t);
    sum -= std::pow(s / t, nu / 2.0) / (2 * d) * std::exp(e) * sf::bessel_i_scaled(nu, z);
  }
  return sum;
}

double kernel_sine(double t, double x) {
  constexpr double pi = std::numbers::pi;
  if (t == 0) {
    const double a = pi * x;
    return std::abs(a) < 1e-8 ? 1.0 - a * a / 6.0 : std::sin(a) / a;
  }
  auto f = [&](double lam) { return std::exp(pi * pi * lam * lam * t / 2.0) * std::cos(pi * lam * x); };
  const double head = quad::integrate(f, 0.0, 1.0, 1e-14, 1e-12).value;
  if (t > 0) return head;
  // -int_1^inf = int_0^1 - int_0^inf, the latter a Gaussian
  return head - std::exp(-x * x / (2 * -t)) / std::sqrt(2 * pi * -t);
}

double kernel_bessel(double nu, double t, double y, double x) {
  if (x < 0 || y < 0) throw std::domain_error("kernel_bessel: x, y must be non-negative");
  const double sx = std::sqrt(x), sy = std::sqrt(y);
  auto integral = [&] {
    // (1/4) int_0^1 e^{lambda t/2} J(sqrt(lambda x)) J(sqrt(lambda y)) d lambda, lambda = r^2
    auto f = [&](double r) {
      return r * std::exp(r * r * t / 2.0) * sf::bessel_j(nu, r * sx) * sf::bessel_j(nu, r * sy);
    };
    return 0.5 * quad::integrate(f, 0.0, 1.0, 1e-15, 1e-12).value;
  };
  if (t > 0) return integral();
  if (t < 0) {
    const double d = -t, z = sx * sy / d;
    return integral() - std::exp(-(x + y) / (2 * d) + z) * sf::bessel_i_scaled(nu, z) / (2 * d);
  }
  if (x == y) {
    if (x == 0) return 0.0;
    const double j = sf::bessel_j(nu, sx), jd = sf::bessel_j_derivative(nu, sx);
    return 0.25 * (jd * jd + (1.0 - nu * nu / x) * j * j);
  }
  if (std::abs(x - y) <= 1e-3 * std::max({1.0, x, y})) return integral();
  const double jx = sf::bessel_j(nu, sx), jy = sf::bessel_j(nu, sy);
  const double dx = sx > 0 ? sf::bessel_j_derivative(nu, sx) : 0.0;
  const double dy = sy > 0 ? sf::bessel_j_derivative(nu, sy) : 0.0;
  return (jx * sy * dy - sx * dx * jy) / (2 * (x - y));
}

TruncatedValue lattice_kernel(double s, double x, double t, double y, double tol) {
  require_positive_times(s, t);
  constexpr double pi = std::numbers::pi;
  auto image = [&](int m) {
    auto f = [&](double lam) {
      const double w = lam + 2 * pi * m;
      return std::exp(lam * lam * t / 2.0 - w * w * s / 2.0) * std::cos(lam * y - w * x);
    };
    return quad::integrate(f, -pi, pi, 1e-14, 1e-12).value / (2 * pi);
  };
  double value = image(0) + image(1) + image(-1);
  TruncatedValue out;
  int window = 1;
  for (;;) {
    double shell = 0.0;
    for (int m = window + 1; m <= 2 * window; ++m) shell += image(m) + image(-m);
    value += shell;
    window *= 2;
    if (std::abs(shell) <= tol * std::max(1.0, std::abs(value))) {
      out.doubling_change = std::abs(shell);
      break;
    }
    if (window >= 1024) throw NumericError("lattice_kernel: image sum did not converge");
  }
  if (s > t) value -= sf::transition_density(ProcessKind::bm(), s - t, x, y);
  out.value = value;
  out.window = window;
  return out;
}

double lattice_kernel_direct(int L, double s, double x, double t, double y) {
  require_positive_times(s, t);
  double sum = 0.0;
  for (int k = -L; k <= L; ++k)
    sum += sf::transition_density(ProcessKind::bm(), s, x, k) * lattice_martingale(k, t, y);
  if (s > t) sum -= sf::transition_density(ProcessKind::bm(), s - t, x, y);
  return sum;
}

namespace {

using ld = long double;

struct ZeroSum {
  double value;
  double noise;
};

// int_0^1 2r e^{r^2 t/2} (r/2)^nu E_nu(-r^2 y/4) sum_k w_k J_nu(r j_k) dr, in long double
ZeroSum besselzero_sum(double nu, double s, double x, double t, double y, const std::vector<ld>& zeros) {
  const ld lnu = nu;
  const int K = int(zeros.size());
  std::vector<ld> w(K);
  for (int k = 0; k < K; ++k) {
    const ld j = zeros[k], jp = sf::bessel_j<ld>(lnu + 1, j);
    w[k] = sf::besq_density<ld>(lnu, ld(s), ld(x), j * j) * std::pow(j, lnu) / (jp * jp);
  }
  const int n = 2 * K + 64;
  const quad::Rule<ld> rule = quad::gauss_legendre<ld>(n);
  ld sum = 0, abs_sum = 0;
  for (int i = 0; i < n; ++i) {
    const ld r = (rule.nodes[i] + 1) / 2;
    ld S = 0, Sabs = 0;
    for (int k = 0; k < K; ++k) {
      const ld term = w[k] * sf::bessel_j<ld>(lnu, r * zeros[k]);
      S += term;
      Sabs += std::abs(term);
    }
    const ld pre = 2 * r * std::exp(r * r * ld(t) / 2) * std::pow(r / 2, lnu) *
                   sf::bessel_j_reduced<ld>(lnu, r * r * ld(y) / 4) * rule.weights[i] / 2;
    sum += pre * S;
    abs_sum += std::abs(pre) * Sabs;
  }
  return {double(sum), double(64 * std::numeric_limits<ld>::epsilon() * abs_sum)};
}

}  // namespace

TruncatedValue besselzero_kernel(double nu, double s, double x, double t, double y, double tol) {
  require_positive_times(s, t);
  if (x < 0 || y < 0) throw std::domain_error("besselzero_kernel: x, y must be non-negative");
  int K = 8;
  ZeroSum prev = besselzero_sum(nu, s, x, t, y, sf::bessel_zeros_t<ld>(nu, K));
  TruncatedValue out;
  for (;;) {
    K *= 2;
    const ZeroSum cur = besselzero_sum(nu, s, x, t, y, sf::bessel_zeros_t<ld>(nu, K));
    const double change = std::abs(cur.value - prev.value);
    prev = cur;
    if (change <= std::max(tol * std::max(1.0, std::abs(cur.value)), cur.noise)) {
      out.doubling_change = change;
      break;
    }
    if (K >= 2048) throw NumericError("besselzero_kernel: zero sum did not converge");
  }
  out.value = prev.value;
  if (s > t) out.value -= sf::besq_density(nu, s - t, x, y);
  out.window = K;
  return out;
}

double besselzero_kernel_direct(const sf::BesselZeroTable& table, double s, double x, double t, double y) {
  require_positive_times(s, t);
  const ProcessKind q = ProcessKind::besq(table.nu);
  double sum = 0.0;
  for (std::size_t k = 0; k < table.zeros.size(); ++k) {
    const double j = table.zeros[k];
    sum += sf::transition_density(q, s, x, j * j) * besselzero_martingale(table, int(k) + 1, t, y);
  }
  if (s > t) sum -= sf::transition_density(q, s - t, x, y);
  return sum;
}

Eigen::Index SpaceTimeQuery::size() const {
  Eigen::Index n = 0;
  for (const auto& p : points) n += Eigen::Index(p.size());
  return n;
}

void SpaceTimeQuery::validate() const {
  if (times.size() != points.size()) throw std::invalid_argument("query: one point list per time");
  for (std::size_t m = 0; m < times.size(); ++m) {
    if (!(times[m] > 0)) throw std::invalid_argument("query: times must be positive");
    if (m > 0 && !(times[m] > times[m - 1])) throw std::invalid_argument("query: times must increase");
  }
  if (size() > 64) throw CapacityError("query: at most 64 points");
}

Eigen::MatrixXd correlation_matrix(const KernelFunction& k, const SpaceTimeQuery& q) {
  q.validate();
  const Eigen::Index n = q.size();
  std::vector<std::pair<double, double>> pts;
  pts.reserve(n);
  for (std::size_t m = 0; m < q.times.size(); ++m)
    for (double x : q.points[m]) pts.emplace_back(q.times[m], x);
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = k(pts[i].first, pts[i].second, pts[j].first, pts[j].second);
  return a;
}

double correlation(const KernelFunction& k, const SpaceTimeQuery& q) {
  const Eigen::MatrixXd a = correlation_matrix(k, q);
  if (a.size() == 0) return 1.0;
  return a.partialPivLu().determinant();
}

namespace {

// K = A B - E with A (n x r), B (r x n) the finite-rank factors and E_ij = 1(s_i > t_j) p(s_i - t_j, x_i | y_j).
// det(AB - E) = (-1)^n det [[I, B], [A, E]]; the bordered matrix is balanced by powers of two and
// factored with full pivoting, which keeps relative accuracy where AB itself cancels.
double factored_correlation(const CorrelationKernel& k, const SpaceTimeQuery& q) {
  const auto& st = *k.state_ptr();
  const ProcessKind& kind = k.process();
  const bool bes = kind.tag == Tag::BES;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t m = 0; m < q.times.size(); ++m)
    for (double x : q.points[m]) {
      if (bes && x < 0) return 0.0;
      pts.emplace_back(q.times[m], bes ? x * x : x);
    }
  const Eigen::Index n = Eigen::Index(pts.size());
  if (n == 0) return 1.0;
  const Eigen::Index r = k.variant() == KernelVariant::multipoint ? k.xi().total() : st.support.size();
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(r + n, r + n);
  big.topLeftCorner(r, r).setIdentity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto [s, x] = pts[std::size_t(i)];
    if (!(s > 0) && k.variant() != KernelVariant::rw) throw std::domain_error("kernel: times must be positive");
    if (k.variant() == KernelVariant::multipoint) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(r);
      for (Eigen::Index v = 0; v < st.support.size(); ++v) {
        const double p = sf::transition_density(st.inner, s, x, st.support(v));
        if (p != 0.0) a += p * phi_twotime_coeffs(st.inner, st.inner_xi, st.support(v), s, x);
      }
      big.block(r + i, 0, 1, r) = a.transpose();
      big.block(0, r + i, r, 1) = poly_martingales(st.inner, int(r) - 1, s, x);
    } else {
      for (Eigen::Index v = 0; v < r; ++v) {
        big(r + i, v) = sf::transition_density(st.inner, s, x, st.support(v));
        big(v, r + i) = st.transforms[std::size_t(v)](s, x);
      }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto [t, y] = pts[std::size_t(j)];
      if (s > t) big(r + i, r + j) = sf::transition_density(st.inner, s - t, x, y);
    }
  }
  double scale = (n % 2) ? -1.0 : 1.0;
  if (bes)
    for (const auto& p : pts) scale *= 2.0 * std::sqrt(p.second);
  int exponent = 0;
  for (int pass = 0; pass < 2; ++pass)
    for (Eigen::Index i = 0; i < r + n; ++i) {
      const double m = pass == 0 ? big.row(i).cwiseAbs().maxCoeff() : big.col(i).cwiseAbs().maxCoeff();
      if (m == 0.0) return 0.0;
      int e;
      std::frexp(m, &e);
      if (pass == 0)
        big.row(i) *= std::ldexp(1.0, -e);
      else
        big.col(i) *= std::ldexp(1.0, -e);
      exponent += e;
    }
  // pivoting on the identity block would form E - AB explicitly; push those rows down
  constexpr int kDemote = 64;
  big.topRows(r) *= std::ldexp(1.0, -kDemote);
  exponent += int(r) * kDemote;
  return std::ldexp(scale * big.fullPivLu().determinant(), exponent);
}

}  // namespace

double correlation(const CorrelationKernel& k, const SpaceTimeQuery& q) {
  if (k.variant() == KernelVariant::general || k.variant() == KernelVariant::multipoint) {
    q.validate();
    return factored_correlation(k, q);
  }
  if (k.variant() == KernelVariant::rw) {
    q.validate();
    const int parity = int(std::llround(k.xi().support()(0)) & 1);
    for (std::size_t m = 0; m < q.times.size(); ++m)
      for (double x : q.points[m]) {
        if (!is_integer(q.times[m]) || !is_integer(x)) return 0.0;
        if ((std::llround(q.times[m] + x) & 1) != parity) return 0.0;
      }
    return factored_correlation(k, q);
  }
  return correlation(KernelFunction([&k](double s, double x, double t, double y) { return k(s, x, t, y); }), q);
}

double gue_density(int N, double t, const Eigen::VectorXd& x) {
  if (N < 1 || x.size() != N) throw std::invalid_argument("gue_density: x must have N entries");
  if (!(t > 0)) throw std::domain_error("gue_density: t must be positive");
  double logc = -N * N / 2.0 * std::log(t) - N / 2.0 * std::log(2 * std::numbers::pi);
  for (int j = 1; j <= N; ++j) logc -= sf::log_gamma(double(j));
  const double h = vandermonde(x);
  return std::exp(logc - x.squaredNorm() / (2 * t)) * h * h;
}

double karlin_mcgregor(const ProcessKind& kind, double t, const Eigen::VectorXd& y, const Eigen::VectorXd& x) {
  if (x.size() != y.size()) throw std::invalid_argument("karlin_mcgregor: size mismatch");
  const Eigen::Index n = x.size();
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) a(j, k) = sf::transition_density(kind, t, y(j), x(k));
  return n == 0 ? 1.0 : a.partialPivLu().determinant();
}

double noncolliding_density(const ProcessKind& kind, double t, const Eigen::VectorXd& y, const Eigen::VectorXd& x) {
  double hx, hy;
  if (kind.tag == Tag::BES) {
    hx = vandermonde(x.array().square().matrix());
    hy = vandermonde(y.array().square().matrix());
  } else {
    hx = vandermonde(x);
    hy = vandermonde(y);
  }
  if (hx == 0.0) throw std::domain_error("noncolliding_density: starting points must be distinct");
  return hy / hx * karlin_mcgregor(kind, t, y, x);
}

std::vector<RelaxationStep> relaxation_probe(RelaxationVariant variant, double nu, double s, double x, double t,
                                             double y, const std::vector<double>& taus) {
  std::vector<RelaxationStep> out;
  double limit;
  if (variant == RelaxationVariant::sine) {
    limit = kernel_sine(t - s, y - x);
  } else {
    if (!(x > 0) || !(y > 0)) throw std::domain_error("relaxation_probe: Bessel probe needs x, y > 0");
    limit = std::pow(x / y, nu / 2.0) * kernel_bessel(nu, t - s, y, x);
  }
  for (double tau : taus) {
    const TruncatedValue v = variant == RelaxationVariant::sine ? lattice_kernel(s + tau, x, t + tau, y)
                                                                 : besselzero_kernel(nu, s + tau, x, t + tau, y);
    out.push_back({tau, v.value, limit, std::abs(v.value - limit), v.window, v.doubling_change});
  }
  return out;
}

void write_kernel_csv(std::ostream& out, const CorrelationKernel& k, const std::vector<std::array<double, 4>>& points) {
  out << "s,x,t,y,value\n" << std::setprecision(17);
  for (const auto& p : points) out << p[0] << ',' << p[1] << ',' << p[2] << ',' << p[3] << ',' << k(p[0], p[1], p[2], p[3]) << '\n';
}

}  // namespace detmart
