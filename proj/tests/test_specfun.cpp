#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "detmart/quadrature.hpp"
#include "detmart/specfun.hpp"
#include "support.hpp"

using namespace detmart;
using cplx = std::complex<double>;
namespace sf = detmart::specfun;
constexpr double kPi = std::numbers::pi;

TEST_CASE("gamma at simple points") {
  CHECK(sf::gamma(1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sf::gamma(0.5) == doctest::Approx(std::sqrt(kPi)).epsilon(1e-14));
  CHECK(sf::gamma(5.0) == doctest::Approx(24.0).epsilon(1e-14));
}

TEST_CASE("gamma matches libm on [0.5, 30]") {
  for (double x = 0.5; x <= 30.0; x += 0.173) CHECK(rel_err(sf::gamma(x), std::tgamma(x)) / std::tgamma(x) < 1e-12);
}

TEST_CASE("gamma recurrence on random arguments") {
  Gen g(11);
  for (int i = 0; i < 100; ++i) {
    double x = g.uniform(-10.0, 30.0);
    if (std::abs(x - std::round(x)) < 1e-3) x += 0.01;
    const double lhs = sf::gamma(x + 1.0), rhs = x * sf::gamma(x);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
  }
}

TEST_CASE("gamma poles raise domain errors") {
  CHECK_THROWS_AS(sf::gamma(0.0), std::domain_error);
  CHECK_THROWS_AS(sf::gamma(-3.0), std::domain_error);
  CHECK_THROWS_AS(sf::gamma(cplx(-2.0, 0.0)), std::domain_error);
  CHECK(sf::rgamma(cplx(-2.0, 0.0)) == cplx(0.0));
}

TEST_CASE("complex gamma identities") {
  Gen g(12);
  for (int i = 0; i < 100; ++i) {
    const cplx z(g.uniform(-6.0, 8.0), g.uniform(-5.0, 5.0));
    const cplx a = sf::gamma(z + 1.0), b = z * sf::gamma(z);
    CHECK(std::abs(a - b) <= 1e-12 * std::abs(b));
    const cplx refl = sf::gamma(z) * sf::gamma(1.0 - z) * std::sin(kPi * z);
    CHECK(std::abs(refl - kPi) <= 1e-11 * kPi);
    CHECK(std::abs(sf::gamma(std::conj(z)) - std::conj(sf::gamma(z))) <= 1e-13 * std::abs(sf::gamma(z)));
    CHECK(std::abs(sf::rgamma(z) * sf::gamma(z) - 1.0) < 1e-12);
  }
  // |Gamma(1/2 + iy)|^2 = pi / cosh(pi y)
  for (double y : {0.3, 1.0, 2.5}) {
    const double m = std::norm(sf::gamma(cplx(0.5, y)));
    CHECK(m == doctest::Approx(kPi / std::cosh(kPi * y)).epsilon(1e-12));
  }
}

TEST_CASE("complex log gamma agrees with the real one") {
  for (double x : {0.7, 3.2, 12.5, 90.0})
    CHECK(sf::log_gamma(cplx(x, 0.0)).real() == doctest::Approx(std::lgamma(x)).epsilon(1e-13));
}

TEST_CASE("hermite matches the explicit sum") {
  for (int n = 0; n <= 10; ++n)
    for (double x : {-2.3, -0.4, 0.0, 0.9, 3.1}) {
      double s = 0.0;
      for (int m = 0; 2 * m <= n; ++m)
        s += std::pow(-1.0, m) * std::pow(2.0 * x, n - 2 * m) / (std::tgamma(m + 1.0) * std::tgamma(n - 2 * m + 1.0));
      s *= std::tgamma(n + 1.0);
      CHECK(rel_err(sf::hermite(n, x), s) < 1e-10);
      CHECK(sf::hermite_all(n, x)(n) == doctest::Approx(s).epsilon(1e-12));
    }
}

TEST_CASE("hermite integral representation") {
  // H_n(x) = 2^n / sqrt(pi) int e^{-u^2} (x + iu)^n du
  for (int n : {3, 6}) {
    const double x = 0.7;
    auto f = [&](double u) { return (std::exp(-u * u) * std::pow(cplx(x, u), n)).real(); };
    const double v = quad::integrate(f, -12.0, 12.0, 1e-14, 1e-13).value * std::pow(2.0, n) / std::sqrt(kPi);
    CHECK(rel_err(v, sf::hermite(n, x)) < 1e-10);
  }
}

TEST_CASE("laguerre matches the explicit sum") {
  for (double nu : {-0.5, 0.0, 0.5, 2.3})
    for (int n = 0; n <= 10; ++n)
      for (double x : {0.0, 0.4, 2.2, 7.5}) {
        double s = 0.0;
        for (int k = 0; k <= n; ++k)
          s += std::pow(-x, k) * std::tgamma(n + nu + 1.0) /
               (std::tgamma(n - k + 1.0) * std::tgamma(nu + k + 1.0) * std::tgamma(k + 1.0));
        CHECK(rel_err(sf::laguerre(n, nu, x), s) < 1e-10);
      }
}

TEST_CASE("laguerre orthogonality") {
  const double nu = 0.5;
  for (int m = 0; m <= 4; ++m)
    for (int n = 0; n <= 4; ++n) {
      auto f = [&](double x) { return std::pow(x, nu) * std::exp(-x) * sf::laguerre(m, nu, x) * sf::laguerre(n, nu, x); };
      const double v = quad::integrate(f, 0.0, 80.0, 1e-13, 1e-12).value;
      const double expect = m == n ? std::tgamma(n + nu + 1.0) / std::tgamma(n + 1.0) : 0.0;
      CHECK(std::abs(v - expect) < 1e-8);
    }
}

TEST_CASE("bessel J against libstdc++ on a grid") {
  for (double nu : {0.0, 0.3, 0.5, 1.0, 2.5, 7.0, 20.0})
    for (double x = 0.0; x <= 50.0; x += 0.37) {
      const double a = sf::bessel_j(nu, x), b = std::cyl_bessel_j(nu, x);
      CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)));
    }
}

TEST_CASE("bessel J half-integer closed forms") {
  for (double x = 0.1; x < 60.0; x += 0.71) {
    const double c = std::sqrt(2.0 / (kPi * x));
    CHECK(sf::bessel_j(0.5, x) == doctest::Approx(c * std::sin(x)).epsilon(1e-12).scale(1.0));
    CHECK(sf::bessel_j(-0.5, x) == doctest::Approx(c * std::cos(x)).epsilon(1e-12).scale(1.0));
    CHECK(sf::bessel_j(1.5, x) == doctest::Approx(c * (std::sin(x) / x - std::cos(x))).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("bessel J long double agrees with double") {
  for (long double nu : {0.0L, 0.5L, 3.7L})
    for (long double x = 0.05L; x < 120.0L; x += 1.37L)
      CHECK(std::abs(double(sf::bessel_j<long double>(nu, x)) - sf::bessel_j<double>(double(nu), double(x))) < 1e-13);
  // J_{1/2}(k pi) vanishes to extended precision
  const long double pi = std::numbers::pi_v<long double>;
  for (int k = 1; k < 40; ++k) CHECK(std::abs(double(sf::bessel_j<long double>(0.5L, k * pi))) < 1e-17);
}

TEST_CASE("bessel I against libstdc++") {
  for (double nu : {0.0, 0.5, 1.0, 3.0, 10.0})
    for (double x : {0.001, 0.3, 2.0, 9.0, 30.0, 55.0, 80.0, 140.0, 300.0}) {
      const double ref = std::cyl_bessel_i(nu, x) * std::exp(-x);
      CHECK(std::abs(sf::bessel_i_scaled(nu, x) - ref) <= 1e-12 * ref);
    }
  CHECK(sf::bessel_i(0.0, 0.0) == 1.0);
  CHECK(sf::bessel_i(1.0, 0.0) == 0.0);
}

TEST_CASE("entire series reproduces I and J") {
  for (double nu : {0.0, 0.5, 2.0})
    for (double x : {0.5, 3.0, 9.0}) {
      const double pre = std::pow(x / 2.0, nu);
      CHECK(rel_err(pre * sf::bessel_entire(nu, x * x / 4.0).real(), std::cyl_bessel_i(nu, x)) < 1e-12);
      CHECK(std::abs(pre * sf::bessel_entire(nu, -x * x / 4.0).real() - std::cyl_bessel_j(nu, x)) < 1e-11);
      CHECK(std::abs(sf::bessel_j_reduced(nu, x * x / 4.0) * pre - std::cyl_bessel_j(nu, x)) < 1e-12);
    }
  CHECK(std::abs(sf::bessel_j_reduced(0.5, 400.0) * std::pow(400.0, 0.25) - std::cyl_bessel_j(0.5, 40.0)) < 1e-12);
}

TEST_CASE("bessel zeros") {
  const auto half = sf::bessel_zeros(0.5, 60);
  for (int k = 0; k < 60; ++k) CHECK(half.zeros[k] == doctest::Approx((k + 1) * kPi).epsilon(1e-13));
  for (double nu : {-0.7, 0.0, 1.0, 20.0}) {
    const auto t = sf::bessel_zeros(nu, 40);
    for (std::size_t k = 0; k < t.zeros.size(); ++k) {
      CHECK(std::abs(sf::bessel_j(nu, t.zeros[k])) <= 1e-12);
      if (k > 0) CHECK(t.zeros[k] > t.zeros[k - 1]);
      if (nu >= 0) CHECK(std::abs(std::cyl_bessel_j(nu, t.zeros[k])) <= 1e-12);
    }
    // no zero skipped: count sign changes of an independent J on a fine grid
    if (nu >= 0) {
      int changes = 0;
      double prev = std::cyl_bessel_j(nu, 1e-3);
      for (double x = 1e-3 + 0.01; x < t.zeros.back() + 0.02; x += 0.01) {
        const double cur = std::cyl_bessel_j(nu, x);
        if ((cur < 0) != (prev < 0)) ++changes;
        prev = cur;
      }
      CHECK(changes == int(t.zeros.size()));
    }
  }
  CHECK(sf::bessel_zeros(0.0, 1).zeros[0] == doctest::Approx(2.404825557695773).epsilon(1e-14));
}

TEST_CASE("random walk transition density") {
  CHECK(sf::transition_density(ProcessKind::rw(), 2, 0, 0) == 0.5);
  CHECK(sf::transition_density(ProcessKind::rw(), 2, 1, 0) == 0.0);
  CHECK(sf::transition_density(ProcessKind::rw(), 0, 3, 3) == 1.0);
  for (int t = 0; t <= 20; ++t) {
    double s = 0.0;
    for (int y = -t - 2; y <= t + 2; ++y) {
      const double p = sf::transition_density(ProcessKind::rw(), t, y, 0);
      CHECK(p >= 0.0);
      if ((y + t) % 2 != 0) CHECK(p == 0.0);
      s += p;
    }
    CHECK(std::abs(s - 1.0) < 1e-14);
  }
  CHECK_THROWS_AS(sf::transition_density(ProcessKind::rw(), 1.5, 0, 0), std::domain_error);
}

TEST_CASE("continuous densities integrate to one") {
  auto mass = [](const ProcessKind& k, double t, double x, double a, double b) {
    return quad::integrate([&](double y) { return sf::transition_density(k, t, y, x); }, a, b, 1e-13, 1e-12).value;
  };
  CHECK(mass(ProcessKind::bm(), 0.7, 0.3, -20, 20) == doctest::Approx(1.0).epsilon(1e-10));
  for (double nu : {0.0, 0.5, 3.0})
    for (double x : {0.0, 0.7, 5.0}) {
      CHECK(mass(ProcessKind::besq(nu), 1.3, x, 0, 150) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(mass(ProcessKind::bes(nu), 1.3, std::sqrt(x), 0, 15) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("BESQ density closed forms at half-integer index") {
  // BES(1/2) from a: (b/a)(phi(b-a) - phi(b+a)); BES(-1/2): phi(b-a) + phi(b+a)
  const double t = 0.8;
  auto phi = [&](double d) { return std::exp(-d * d / (2 * t)) / std::sqrt(2 * kPi * t); };
  for (double a : {0.2, 1.0, 3.0})
    for (double b : {0.1, 0.9, 2.5, 4.0}) {
      const double up = b / a * (phi(b - a) - phi(b + a)), refl = phi(b - a) + phi(b + a);
      CHECK(sf::transition_density(ProcessKind::bes(0.5), t, b, a) == doctest::Approx(up).epsilon(1e-12));
      CHECK(sf::transition_density(ProcessKind::bes(-0.5), t, b, a) == doctest::Approx(refl).epsilon(1e-12));
    }
}

TEST_CASE("BESQ density is continuous across evaluation branches") {
  const ProcessKind k = ProcessKind::besq(0.7);
  const double t = 0.5;
  // xy / 4t^2 = 1 switches formulas
  const double x = 1.0, y = 1.0;
  const double below = sf::transition_density(k, t, y * (1 - 1e-12), x);
  const double above = sf::transition_density(k, t, y * (1 + 1e-12), x);
  CHECK(std::abs(below - above) < 1e-11 * above);
  CHECK(sf::transition_density(k, t, 0.6, 1e-13) == doctest::Approx(sf::transition_density(k, t, 0.6, 0.0)).epsilon(1e-9));
}

TEST_CASE("BESQ Chapman-Kolmogorov") {
  const ProcessKind k = ProcessKind::besq(1.5);
  const double s = 0.4, t = 0.9, x = 1.2, y = 2.0;
  auto f = [&](double z) { return sf::transition_density(k, s, z, x) * sf::transition_density(k, t, y, z); };
  const double v = quad::integrate(f, 0.0, 80.0, 1e-14, 1e-12).value;
  CHECK(v == doctest::Approx(sf::transition_density(k, s + t, y, x)).epsilon(1e-9));
}

TEST_CASE("density ratio is entire and consistent with the real density") {
  for (const ProcessKind& k : {ProcessKind::bm(), ProcessKind::besq(0.5)}) {
    const double s = 0.7, x = 1.3, u = 0.4;
    for (double z : {0.1, 0.9, 2.0}) {
      const double ratio = sf::transition_density(k, s, x, z) / sf::transition_density(k, s, x, u);
      CHECK(std::abs(sf::density_ratio(k, s, x, z, u) - ratio) < 1e-12 * ratio);
    }
  }
}

TEST_CASE("theta soften") {
  CHECK(sf::theta_soften(0.01, -1.0) == 0.0);
  CHECK(sf::theta_soften(1.0, 0.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(sf::theta_soften(0.01, 1.0) == doctest::Approx(1.0).epsilon(1e-40));
}

TEST_CASE("series of (cosh a)^{-t}") {
  const Eigen::VectorXd s1 = sf::cosh_neg_power_series(1.0, 6);
  CHECK(s1(0) == 1.0);
  CHECK(s1(1) == 0.0);
  CHECK(s1(2) == doctest::Approx(-0.5));
  CHECK(s1(4) == doctest::Approx(5.0 / 24.0));
  CHECK(s1(6) == doctest::Approx(-61.0 / 720.0));
  const Eigen::VectorXd s2 = sf::cosh_neg_power_series(2.0, 6);
  CHECK(s2(2) == doctest::Approx(-1.0));
  CHECK(s2(4) == doctest::Approx(2.0 / 3.0));
  CHECK(s2(6) == doctest::Approx(-17.0 / 45.0));
}

TEST_CASE("quadrature rules") {
  const auto gl = quad::gauss_legendre<double>(10);
  double s = 0.0;
  for (int i = 0; i < 10; ++i) s += gl.weights[i] * std::pow(gl.nodes[i], 18);
  CHECK(s == doctest::Approx(2.0 / 19.0).epsilon(1e-14));
  const auto gll = quad::gauss_legendre<long double>(64);
  long double w = 0;
  for (auto x : gll.weights) w += x;
  CHECK(std::abs(double(w - 2.0L)) < 1e-17);
  const auto gh = quad::gauss_hermite(20);
  for (int k = 0; k <= 19; ++k) {
    double m = 0.0;
    for (int i = 0; i < 20; ++i) m += gh.weights[i] * std::pow(gh.nodes[i], 2 * k);
    CHECK(m == doctest::Approx(std::tgamma(k + 0.5)).epsilon(1e-12));
  }
  const auto gh256 = quad::gauss_hermite(256);
  double z = 0.0;
  for (double x : gh256.weights) z += x;
  MESSAGE("gauss-hermite 256 weight sum error " << z - std::sqrt(kPi));
  CHECK(z == doctest::Approx(std::sqrt(kPi)).epsilon(1e-12));
  const auto lag = quad::gauss_laguerre(30, 0.5);
  for (int k = 0; k < 20; ++k) {
    double m = 0.0;
    for (int i = 0; i < 30; ++i) m += lag.weights[i] * std::pow(lag.nodes[i], k);
    CHECK(m == doctest::Approx(std::tgamma(k + 1.5)).epsilon(1e-10));
  }
}
