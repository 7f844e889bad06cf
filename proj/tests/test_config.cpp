#include <doctest.h>

#include <cmath>
#include <complex>

#include "detmart/config.hpp"
#include "detmart/specfun.hpp"
#include "support.hpp"

using namespace detmart;
using cplx = std::complex<double>;

namespace {

PointConfiguration random_simple(Gen& g, int n) {
  std::vector<double> loc;
  double x = g.uniform(-3.0, 0.0);
  for (int i = 0; i < n; ++i) {
    loc.push_back(x);
    x += g.uniform(0.3, 2.0);
  }
  return PointConfiguration::from_locations(loc);
}

double horner(const Eigen::VectorXd& c, double z) {
  double v = 0.0;
  for (Eigen::Index i = c.size() - 1; i >= 0; --i) v = v * z + c(i);
  return v;
}

}  // namespace

TEST_CASE("configuration construction merges and sorts") {
  PointConfiguration xi({{2.0, 1}, {0.0, 1}, {1e-12, 2}});
  REQUIRE(xi.size() == 2);
  CHECK(xi.atoms()[0].location == 0.0);
  CHECK(xi.atoms()[0].multiplicity == 3);
  CHECK(xi.total() == 4);
  CHECK(!xi.simple());
  CHECK(xi.simple_part().total() == 2);
  CHECK(xi.expanded().size() == 4);
  CHECK_THROWS_AS(PointConfiguration({{0.0, 0}}), std::invalid_argument);
}

TEST_CASE("shift, dilate and square") {
  const auto xi = PointConfiguration::from_locations({0.0, 2.0});
  CHECK(shift(xi, 1.0) == PointConfiguration::from_locations({1.0, 3.0}));
  CHECK(dilate(xi, 0.5) == PointConfiguration::from_locations({0.0, 1.0}));
  CHECK(square(PointConfiguration::from_locations({1.0, 3.0})) == PointConfiguration::from_locations({1.0, 9.0}));
  CHECK_THROWS_AS(square(PointConfiguration::from_locations({-1.0})), std::domain_error);
  CHECK_THROWS_AS(dilate(xi, 0.0), std::domain_error);
}

TEST_CASE("vandermonde") {
  Eigen::Vector3d x(0.0, 1.0, 3.0);
  CHECK(vandermonde(x) == 6.0);
  Eigen::Vector3cd z(cplx(0, 1), cplx(1, 0), cplx(0, 0));
  const cplx expect = (cplx(1, 0) - cplx(0, 1)) * (cplx(0, 0) - cplx(0, 1)) * (cplx(0, 0) - cplx(1, 0));
  CHECK(std::abs(vandermonde(z) - expect) < 1e-15);
  // expression input
  CHECK(vandermonde(2.0 * x) == 48.0);
}

TEST_CASE("phi_simple examples and Kronecker property") {
  const auto xi = PointConfiguration::from_locations({0.0, 1.0});
  CHECK(phi_simple(xi, 0.0, 0.5) == doctest::Approx(0.5));
  CHECK_THROWS_AS(phi_simple(xi, 0.3, 0.5), std::domain_error);
  Gen g(21);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = random_simple(g, g.integer(1, 8));
    const Eigen::VectorXd u = c.support();
    for (Eigen::Index k = 0; k < u.size(); ++k)
      for (Eigen::Index j = 0; j < u.size(); ++j)
        CHECK(std::abs(phi_simple(u, k, u(j)) - (j == k ? 1.0 : 0.0)) <= 1e-12);
  }
}

TEST_CASE("phi_coeffs reproduce phi_simple") {
  const Eigen::VectorXd c = phi_coeffs(PointConfiguration::from_locations({0.0, 1.0}), 0.0);
  REQUIRE(c.size() == 2);
  CHECK(c(0) == doctest::Approx(1.0));
  CHECK(c(1) == doctest::Approx(-1.0));
  Gen g(22);
  for (int trial = 0; trial < 50; ++trial) {
    const auto xi = random_simple(g, g.integer(1, 7));
    const Eigen::VectorXd u = xi.support();
    const Eigen::Index k = g.integer(0, int(u.size()) - 1);
    const Eigen::VectorXd a = phi_coeffs(xi, u(k));
    for (int i = 0; i < 5; ++i) {
      const double z = g.uniform(-4.0, 8.0);
      const double ref = phi_simple(u, k, z);
      CHECK(std::abs(horner(a, z) - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST_CASE("determinant identity on random configurations") {
  Gen g(23);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = g.integer(1, 6);
    const auto xi = random_simple(g, n);
    Eigen::VectorXd x(n);
    for (int j = 0; j < n; ++j) x(j) = g.uniform(-5.0, 5.0);
    const IdentityCheck c = det_phi_identity_check(xi, x);
    CHECK(c.discrepancy <= 1e-10);
  }
}

TEST_CASE("determinant identity detects a corrupted phi") {
  const auto xi = PointConfiguration::from_locations({0.0, 1.0, 2.5});
  const Eigen::Vector3d x(0.3, 1.7, -0.8);
  auto flipped = [](const Eigen::VectorXd& s, Eigen::Index k, double z) {
    const double v = phi_simple(s, k, z);
    return k == 0 ? -v : v;
  };
  CHECK(det_phi_identity_check(xi, x, flipped).discrepancy > 1e-3);
}

TEST_CASE("two-time phi reduces to phi for simple configurations") {
  Gen g(24);
  for (const ProcessKind& kind : {ProcessKind::bm(), ProcessKind::besq(0.5)})
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> loc;
      double x0 = g.uniform(0.1, 1.0);
      for (int i = 0, n = g.integer(1, 5); i < n; ++i) {
        loc.push_back(x0);
        x0 += g.uniform(0.5, 2.0);
      }
      const auto xi = PointConfiguration::from_locations(loc);
      const double u = loc[g.integer(0, int(loc.size()) - 1)];
      const Eigen::VectorXd a = phi_twotime_coeffs(kind, xi, u, g.uniform(0.2, 2.0), g.uniform(0.1, 3.0));
      const Eigen::VectorXd b = phi_coeffs(xi, u);
      CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, b.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("two-time phi for N delta_0 matches the Hermite and Laguerre sums") {
  const int N = 4;
  PointConfiguration xi({{0.0, N}});
  for (double s : {0.3, 1.0, 2.5})
    for (double x : {0.2, 1.4, 3.0})
      for (double z : {-1.3, 0.4, 2.2}) {
        // Hermite: sum_n (z / sqrt(2s))^n H_n(x / sqrt(2s)) / n!
        double h = 0.0;
        for (int n = 0; n < N; ++n)
          h += std::pow(z / std::sqrt(2 * s), n) * specfun::hermite(n, x / std::sqrt(2 * s)) / std::tgamma(n + 1.0);
        const double hb = phi_twotime(ProcessKind::bm(), xi, 0.0, s, x, z).real();
        CHECK(std::abs(hb - h) <= 1e-9 * std::max(1.0, std::abs(h)));
        // Laguerre: Gamma(nu+1) sum_n (-z/2s)^n L_n^{(nu)}(x/2s) / Gamma(n+nu+1)
        const double nu = 0.5;
        double l = 0.0;
        for (int n = 0; n < N; ++n)
          l += std::pow(-z / (2 * s), n) * specfun::laguerre(n, nu, x / (2 * s)) / std::tgamma(n + nu + 1.0);
        l *= std::tgamma(nu + 1.0);
        const double lb = phi_twotime(ProcessKind::besq(nu), xi, 0.0, s, x, z).real();
        CHECK(std::abs(lb - l) <= 1e-9 * std::max(1.0, std::abs(l)));
      }
}

TEST_CASE("two-time phi with mixed multiplicities matches the derivative formula") {
  // xi = 2 delta_0 + delta_a, BM: the residue at 0 of a double pole is
  // F(0) (x/s + 1/z + 1/a) with F(0) = -z (z - a) / a
  const double a = 1.5;
  PointConfiguration xi({{0.0, 2}, {a, 1}});
  for (double s : {0.4, 1.3})
    for (double x : {-0.7, 0.5, 2.0})
      for (double z : {-1.0, 0.6, 2.4}) {
        const double f0 = -z * (z - a) / a;
        const double expect = f0 * (x / s + 1.0 / z + 1.0 / a);
        const double got = phi_twotime(ProcessKind::bm(), xi, 0.0, s, x, z).real();
        CHECK(std::abs(got - expect) <= 1e-10 * std::max(1.0, std::abs(expect)));
      }
  // the residue at the simple atom is the plain ratio-weighted Lagrange factor
  for (double z : {-1.0, 0.6, 2.4}) {
    const double s = 0.8, x = 0.9;
    const double expect = z * z / (a * a);
    CHECK(phi_twotime(ProcessKind::bm(), xi, a, s, x, z).real() == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("two-time phi is a polynomial of degree below total(xi)") {
  PointConfiguration xi({{0.0, 2}, {1.0, 1}, {2.5, 2}});
  const Eigen::VectorXd a = phi_twotime_coeffs(ProcessKind::bm(), xi, 2.5, 0.7, 1.1);
  CHECK(a.size() == xi.total());
  CHECK_THROWS_AS(phi_twotime_coeffs(ProcessKind::rw(), xi, 0.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("lattice and Bessel zero configurations") {
  const auto l = lattice_config(2);
  CHECK(l.total() == 5);
  CHECK(l.support()(0) == -2.0);
  const auto t = specfun::bessel_zeros(0.5, 3);
  const auto b = besselzero_config(t);
  CHECK(b.support()(2) == doctest::Approx(9 * M_PI * M_PI));
}
