#include "detmart/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "detmart/errors.hpp"

namespace detmart::specfun {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// Lanczos approximation, g = 7, n = 9
constexpr double kLanczosG = 7.0;
constexpr double kLanczos[9] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                                771.32342877765313,   -176.61502916214059,   12.507343278686905,
                                -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

template <typename T>
T lanczos_series(const T& zm1) {
  T s(kLanczos[0]);
  for (int i = 1; i < 9; ++i) s += kLanczos[i] / (zm1 + double(i));
  return s;
}

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

[[noreturn]] void pole_error(double x) {
  throw std::domain_error("gamma: pole at x = " + std::to_string(static_cast<long long>(x)));
}

template <typename Real>
Real lgamma_t(Real x) {
  return std::lgamma(x);
}

}  // namespace

double sin_pi(double x) {
  double r = std::fmod(x, 2.0);
  if (r < 0) r += 2.0;
  double sign = 1.0;
  if (r >= 1.0) {
    r -= 1.0;
    sign = -1.0;
  }
  if (r > 0.5) r = 1.0 - r;
  return sign * std::sin(kPi * r);
}

cplx sin_pi(cplx z) {
  const double a = z.real(), b = z.imag();
  return {sin_pi(a) * std::cosh(kPi * b), sin_pi(a + 0.5) * std::sinh(kPi * b)};
}

double gamma(double x) {
  if (is_nonpositive_integer(x)) pole_error(x);
  if (x < 0.5) return kPi / (sin_pi(x) * gamma(1.0 - x));
  if (x > 171.7) return std::numeric_limits<double>::infinity();
  const double z = x - 1.0;
  const double t = z + kLanczosG + 0.5;
  const double half = std::pow(t, (z + 0.5) / 2.0);
  return std::sqrt(2.0 * kPi) * half * std::exp(-t) * half * lanczos_series(z);
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: argument must be positive");
  if (x < 0.5) return std::log(kPi / (sin_pi(x) * gamma(1.0 - x)));
  const double z = x - 1.0;
  const double t = z + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * kPi) + (z + 0.5) * std::log(t) - t + std::log(lanczos_series(z));
}

cplx log_gamma(cplx z) {
  if (z.imag() == 0.0 && is_nonpositive_integer(z.real())) pole_error(z.real());
  if (z.real() < 0.5) return std::log(kPi) - std::log(sin_pi(z)) - log_gamma(1.0 - z);
  const cplx zm1 = z - 1.0;
  const cplx t = zm1 + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * kPi) + (zm1 + 0.5) * std::log(t) - t + std::log(lanczos_series(zm1));
}

cplx gamma(cplx z) {
  if (z.imag() == 0.0) {
    if (is_nonpositive_integer(z.real())) pole_error(z.real());
    return gamma(z.real());
  }
  if (z.real() < 0.5) return kPi / (sin_pi(z) * gamma(1.0 - z));
  return std::exp(log_gamma(z));
}

cplx rgamma(cplx z) {
  if (z.imag() == 0.0 && is_nonpositive_integer(z.real())) return 0.0;
  if (z.real() < 0.5) return sin_pi(z) * gamma(1.0 - z) / kPi;
  return std::exp(-log_gamma(z));
}

Eigen::VectorXd hermite_all(int n, double x) {
  Eigen::VectorXd h(n + 1);
  h(0) = 1.0;
  if (n >= 1) h(1) = 2.0 * x;
  for (int k = 1; k < n; ++k) h(k + 1) = 2.0 * x * h(k) - 2.0 * k * h(k - 1);
  return h;
}

// ---- Bessel functions ----

namespace {

template <typename Real>
Real bessel_j_series(Real nu, Real x) {
  const Real eps = std::numeric_limits<Real>::epsilon();
  const Real q = -x * x / 4;
  Real term = std::exp(nu * std::log(x / 2) - lgamma_t(nu + 1));
  Real sum = term;
  for (int k = 0; k < 500; ++k) {
    term *= q / (Real(k + 1) * (Real(k + 1) + nu));
    sum += term;
    if (std::abs(term) <= eps * std::abs(sum) && Real(k) > x / 2) break;
  }
  return sum;
}

// Steed's method (CF1 + CF2) for x >= 2; returns J_nu(x).
template <typename Real>
Real bessel_j_steed(Real nu, Real x) {
  const int kMaxIt = 100000;
  const Real eps = std::numeric_limits<Real>::epsilon();
  const Real fpmin = std::numeric_limits<Real>::min() / eps;
  const Real pi = std::numbers::pi_v<Real>;

  const int nl = std::max(0, static_cast<int>(nu - x + Real(1.5)));
  const Real xmu = nu - nl;
  const Real xmu2 = xmu * xmu;
  const Real xi = 1 / x, xi2 = 2 * xi, w = xi2 / pi;

  int isign = 1;
  Real h = nu * xi;
  if (h < fpmin) h = fpmin;
  Real b = xi2 * nu, d = 0, c = h;
  int i = 0;
  for (; i < kMaxIt; ++i) {
    b += xi2;
    d = b - d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = b - 1 / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1 / d;
    const Real del = c * d;
    h *= del;
    if (d < 0) isign = -isign;
    if (std::abs(del - 1) <= eps) break;
  }
  if (i >= kMaxIt) throw NumericError("bessel_j: continued fraction CF1 did not converge");

  Real rjl = isign * fpmin;
  Real rjpl = h * rjl;
  const Real rjl1 = rjl;
  Real fact = nu * xi;
  for (int l = nl - 1; l >= 0; --l) {
    const Real rjtemp = fact * rjl + rjpl;
    fact -= xi;
    rjpl = fact * rjtemp - rjl;
    rjl = rjtemp;
  }
  if (rjl == 0) rjl = eps;
  const Real f = rjpl / rjl;

  Real a = Real(0.25) - xmu2, p = -xi / 2, q = 1;
  const Real br = 2 * x;
  Real bi = 2;
  fact = a * xi / (p * p + q * q);
  Real cr = br + q * fact, ci = bi + p * fact;
  Real den = br * br + bi * bi;
  Real dr = br / den, di = -bi / den;
  Real dlr = cr * dr - ci * di, dli = cr * di + ci * dr;
  Real temp = p * dlr - q * dli;
  q = p * dli + q * dlr;
  p = temp;
  for (i = 1; i < kMaxIt; ++i) {
    a += 2 * i;
    bi += 2;
    dr = a * dr + br;
    di = a * di + bi;
    if (std::abs(dr) + std::abs(di) < fpmin) dr = fpmin;
    fact = a / (cr * cr + ci * ci);
    cr = br + cr * fact;
    ci = bi - ci * fact;
    if (std::abs(cr) + std::abs(ci) < fpmin) cr = fpmin;
    den = dr * dr + di * di;
    dr /= den;
    di /= -den;
    dlr = cr * dr - ci * di;
    dli = cr * di + ci * dr;
    temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    if (std::abs(dlr - 1) + std::abs(dli) <= eps) break;
  }
  if (i >= kMaxIt) throw NumericError("bessel_j: continued fraction CF2 did not converge");

  const Real gam = (p - f) / q;
  Real rjmu = std::sqrt(w / ((p - f) * gam + q));
  rjmu = std::copysign(rjmu, rjl);
  return rjl1 * (rjmu / rjl);
}

template <typename Real>
Real entire_real(Real nu, Real w) {
  // sum_n w^n / (n! Gamma(n+nu+1)) for real w; alternating when w < 0
  const Real eps = std::numeric_limits<Real>::epsilon();
  Real term = std::exp(-lgamma_t(nu + 1));
  if (nu + 1 <= 0) throw std::domain_error("entire series: nu must exceed -1");
  Real sum = term;
  const Real aw = std::abs(w);
  for (int n = 0; n < 100000; ++n) {
    term *= w / (Real(n + 1) * (Real(n + 1) + nu));
    sum += term;
    if (std::abs(term) <= eps * std::abs(sum) && Real(n) * Real(n) > aw) return sum;
  }
  throw NumericError("entire Bessel series did not converge");
}

}  // namespace

template <typename Real>
Real bessel_j(Real nu, Real x) {
  if (!(nu > -1)) throw std::domain_error("bessel_j: order must exceed -1");
  if (x < 0) throw std::domain_error("bessel_j: argument must be non-negative");
  if (x == 0) {
    if (nu == 0) return 1;
    return nu > 0 ? Real(0) : std::numeric_limits<Real>::infinity();
  }
  if (x <= 8) return bessel_j_series(nu, x);
  if (nu < 0) return 2 * (nu + 1) / x * bessel_j_steed(nu + 1, x) - bessel_j_steed(nu + 2, x);
  return bessel_j_steed(nu, x);
}

template <typename Real>
Real bessel_j_derivative(Real nu, Real x) {
  return nu / x * bessel_j(nu, x) - bessel_j(nu + 1, x);
}

template <typename Real>
Real bessel_j_reduced(Real nu, Real w) {
  if (w < 0) throw std::domain_error("bessel_j_reduced: argument must be non-negative");
  if (w <= 16) return entire_real(nu, -w);
  return bessel_j(nu, 2 * std::sqrt(w)) / std::pow(w, nu / 2);
}

template <typename Real>
Real bessel_i_scaled(Real nu, Real x) {
  if (!(nu > -1)) throw std::domain_error("bessel_i: order must exceed -1");
  if (x < 0) throw std::domain_error("bessel_i: argument must be non-negative");
  if (x == 0) {
    if (nu == 0) return 1;
    return nu > 0 ? Real(0) : std::numeric_limits<Real>::infinity();
  }
  const Real eps = std::numeric_limits<Real>::epsilon();
  if (x > 50 + 2 * nu * nu) {
    const Real mu = 4 * nu * nu;
    Real term = 1, sum = 1;
    for (int k = 1; k < 200; ++k) {
      const Real next = -term * (mu - Real(2 * k - 1) * Real(2 * k - 1)) / (Real(k) * 8 * x);
      if (std::abs(next) > std::abs(term)) break;
      term = next;
      sum += term;
      if (std::abs(term) <= eps * std::abs(sum)) break;
    }
    return sum / std::sqrt(2 * std::numbers::pi_v<Real> * x);
  }
  // log-space power series
  const Real lq = 2 * std::log(x / 2);
  Real lt = nu * std::log(x / 2) - lgamma_t(nu + 1) - x;
  Real sum = std::exp(lt);
  for (int k = 0; k < 100000; ++k) {
    lt += lq - std::log(Real(k + 1)) - std::log(Real(k + 1) + nu);
    const Real term = std::exp(lt);
    sum += term;
    if (Real(k) > x && term <= eps * sum) return sum;
  }
  throw NumericError("bessel_i: series did not converge");
}

double bessel_i(double nu, double x) { return bessel_i_scaled(nu, x) * std::exp(x); }

cplx bessel_entire(double nu, cplx w) {
  if (!(nu > -1)) throw std::domain_error("bessel_entire: order must exceed -1");
  const double eps = std::numeric_limits<double>::epsilon();
  cplx term = 1.0 / gamma(nu + 1.0);
  cplx sum = term;
  const double aw = std::abs(w);
  for (int n = 0; n < 100000; ++n) {
    term *= w / ((n + 1.0) * (n + 1.0 + nu));
    sum += term;
    if (std::abs(term) <= eps * std::abs(sum) && double(n) * n > aw) return sum;
  }
  throw NumericError("bessel_entire: series did not converge");
}

template <typename Real>
std::vector<Real> bessel_zeros_t(Real nu, int count) {
  if (!(nu > -1)) throw std::domain_error("bessel_zeros: order must exceed -1");
  if (count < 0) throw std::invalid_argument("bessel_zeros: negative count");
  const Real pi = std::numbers::pi_v<Real>;
  const Real eps = std::numeric_limits<Real>::epsilon();
  const Real step = Real(0.1);
  std::vector<Real> zeros;
  zeros.reserve(count);
  Real lo = Real(1e-6);
  // sign of J_nu near 0+ equals the sign of the leading series term: positive
  Real flo = 1;
  for (int k = 1; k <= count; ++k) {
    Real hi = lo, fhi = flo;
    for (;;) {
      hi = lo + step;
      fhi = bessel_j(nu, hi);
      if ((fhi < 0) != (flo < 0) || fhi == 0) break;
      lo = hi;
      flo = fhi;
    }
    // polish from the McMahon-type guess when it falls inside the bracket
    Real x = (Real(k) + nu / 2 - Real(0.25)) * pi;
    if (!(x > lo && x < hi)) x = (lo + hi) / 2;
    Real a = lo, b = hi, fa = flo;
    for (int it = 0; it < 200; ++it) {
      const Real fx = bessel_j(nu, x);
      if (fx == 0) break;
      if ((fx < 0) == (fa < 0)) {
        a = x;
        fa = fx;
      } else {
        b = x;
      }
      const Real dfx = nu / x * fx - bessel_j(nu + 1, x);
      Real xn = x - fx / dfx;
      if (!(xn > a && xn < b)) xn = (a + b) / 2;
      const Real dx = std::abs(xn - x);
      x = xn;
      if (dx <= 4 * eps * x || b - a <= 4 * eps * x) break;
    }
    zeros.push_back(x);
    lo = x + Real(1e-3);
    flo = bessel_j(nu, lo);
  }
  return zeros;
}

BesselZeroTable bessel_zeros(double nu, int count) {
  BesselZeroTable table;
  table.nu = nu;
  table.zeros = bessel_zeros_t<double>(nu, count);
  for (double z : table.zeros)
    if (std::abs(bessel_j(nu, z)) > 1e-12)
      throw NumericError("bessel_zeros: polished zero fails the residual check");
  return table;
}

// ---- transition densities ----

template <typename Real>
Real besq_density(Real nu, Real t, Real y, Real x) {
  if (!(t > 0)) throw std::domain_error("transition density requires t > 0");
  if (x < 0) throw std::domain_error("BESQ start point must be non-negative");
  if (y < 0) return 0;
  const Real w = x * y / (4 * t * t);
  if (x == 0 || y == 0 || w <= 1) {
    Real pref;
    if (y == 0)
      pref = nu == 0 ? Real(1) : (nu > 0 ? Real(0) : std::numeric_limits<Real>::infinity());
    else
      pref = std::pow(y / (2 * t), nu);
    return pref / (2 * t) * std::exp(-(x + y) / (2 * t)) * entire_real(nu, w);
  }
  const Real z = std::sqrt(x * y) / t;
  const Real d = std::sqrt(x) - std::sqrt(y);
  return std::pow(y / x, nu / 2) / (2 * t) * std::exp(-d * d / (2 * t)) * bessel_i_scaled(nu, z);
}

namespace {

double rw_density(double t, double y, double x) {
  const double tn = std::round(t);
  if (std::abs(t - tn) > 1e-9 || tn < 0) throw std::domain_error("random walk time must be a non-negative integer");
  const double d = y - x;
  const double dn = std::round(d);
  if (std::abs(d - dn) > 1e-9) return 0.0;
  const long long n = static_cast<long long>(tn);
  const long long up2 = n + static_cast<long long>(dn);
  if (up2 < 0 || up2 > 2 * n || up2 % 2 != 0) return 0.0;
  const long long k = up2 / 2;
  if (n <= 60) {
    const long long kk = std::min(k, n - k);
    double c = 1.0;
    for (long long i = 1; i <= kk; ++i) c = c * double(n - kk + i) / double(i);
    return std::ldexp(c, -static_cast<int>(n));
  }
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
}

}  // namespace

double transition_density(const ProcessKind& kind, double t, double y, double x) {
  using Tag = ProcessKind::Tag;
  switch (kind.tag) {
    case Tag::BM: {
      if (!(t > 0)) throw std::domain_error("transition density requires t > 0");
      const double d = y - x;
      return std::exp(-d * d / (2.0 * t)) / std::sqrt(2.0 * kPi * t);
    }
    case Tag::BESQ: return besq_density<double>(kind.nu, t, y, x);
    case Tag::BES:
      if (x < 0) throw std::domain_error("BES start point must be non-negative");
      if (y < 0) return 0.0;
      return besq_density<double>(kind.nu, t, y * y, x * x) * 2.0 * y;
    case Tag::RW: return rw_density(t, y, x);
  }
  return 0.0;
}

cplx density_ratio(const ProcessKind& kind, double s, double x, cplx zeta, double u) {
  if (!(s > 0)) throw std::domain_error("density_ratio requires s > 0");
  switch (kind.tag) {
    case ProcessKind::Tag::BM: {
      const cplx dz = x - zeta;
      return std::exp(((x - u) * (x - u) - dz * dz) / (2.0 * s));
    }
    case ProcessKind::Tag::BESQ: {
      const double c = x / (4.0 * s * s);
      return std::exp(-(zeta - u) / (2.0 * s)) * bessel_entire(kind.nu, c * zeta) /
             bessel_entire(kind.nu, cplx(c * u));
    }
    default: throw std::invalid_argument("density_ratio: only BM and BESQ have entire densities");
  }
}

double theta_soften(double a, double x) {
  if (!(a > 0)) throw std::domain_error("theta_soften: a must be positive");
  return std::exp(-std::exp(-x / a));
}

template <typename Real>
std::vector<Real> cosh_neg_power_coeffs(Real t, int order) {
  if (order < 0) throw std::invalid_argument("cosh_neg_power_series: negative order");
  const int n = order + 1;
  std::vector<Real> c(n, Real(0));
  Real f = 1;
  for (int k = 0; k < n; ++k) {
    if (k > 0) f /= k;
    if (k % 2 == 0) c[k] = f;
  }
  // g = log cosh
  std::vector<Real> g(n, Real(0));
  for (int k = 1; k < n; ++k) {
    Real s = 0;
    for (int j = 1; j < k; ++j) s += j * g[j] * c[k - j];
    g[k] = c[k] - s / k;
  }
  // exp(-t g)
  std::vector<Real> e(n, Real(0));
  e[0] = 1;
  for (int k = 1; k < n; ++k) {
    Real s = 0;
    for (int j = 1; j <= k; ++j) s += j * (-t * g[j]) * e[k - j];
    e[k] = s / k;
  }
  return e;
}

Eigen::VectorXd cosh_neg_power_series(double t, int order) {
  const std::vector<double> e = cosh_neg_power_coeffs<double>(t, order);
  return Eigen::Map<const Eigen::VectorXd>(e.data(), Eigen::Index(e.size()));
}

template std::vector<double> cosh_neg_power_coeffs<double>(double, int);
template std::vector<long double> cosh_neg_power_coeffs<long double>(long double, int);
template double bessel_j<double>(double, double);
template long double bessel_j<long double>(long double, long double);
template double bessel_j_derivative<double>(double, double);
template long double bessel_j_derivative<long double>(long double, long double);
template double bessel_j_reduced<double>(double, double);
template long double bessel_j_reduced<long double>(long double, long double);
template double bessel_i_scaled<double>(double, double);
template long double bessel_i_scaled<long double>(long double, long double);
template std::vector<double> bessel_zeros_t<double>(double, int);
template std::vector<long double> bessel_zeros_t<long double>(long double, int);
template double besq_density<double>(double, double, double, double);
template long double besq_density<long double>(long double, long double, long double, long double);

}  // namespace detmart::specfun
