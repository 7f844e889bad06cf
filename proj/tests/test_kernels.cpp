#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/LU>

#include "detmart/kernels.hpp"
#include "detmart/quadrature.hpp"
#include "support.hpp"

using namespace detmart;
namespace sf = detmart::specfun;

namespace {

constexpr double pi = std::numbers::pi;

double gauss(double t, double y, double x) { return std::exp(-(y - x) * (y - x) / (2 * t)) / std::sqrt(2 * pi * t); }

// h(y)/h(x) det[p(t, y_j | x_k)], written out for the Brownian case
double bm_noncolliding(double t, const Eigen::VectorXd& y, const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) a(j, k) = gauss(t, y(j), x(k));
  double hx = 1, hy = 1;
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index j = 0; j < k; ++j) {
      hx *= x(k) - x(j);
      hy *= y(k) - y(j);
    }
  return hy / hx * a.determinant();
}

Eigen::VectorXd weyl_point(Gen& g, int n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (int j = 0; j < n; ++j) v(j) = g.uniform(lo, hi);
  std::sort(v.data(), v.data() + n);
  return v;
}

// Exhaustive noncolliding-walk law: weight 2^{-NT} 1(ordered at 1..T) h(V(T))/h(u);
// returns occupation probabilities keyed by the visited (time, site) multiset
struct WalkEnumeration {
  std::vector<std::vector<std::vector<int>>> paths;  // paths[w][time][particle]
  std::vector<double> weights;
};

WalkEnumeration enumerate_walks(const std::vector<int>& u, int T) {
  const int N = int(u.size());
  WalkEnumeration e;
  const long total = 1L << (N * T);
  double hu = 1;
  for (int k = 0; k < N; ++k)
    for (int j = 0; j < k; ++j) hu *= u[k] - u[j];
  for (long code = 0; code < total; ++code) {
    std::vector<std::vector<int>> path(T + 1, std::vector<int>(N));
    path[0] = u;
    bool ok = true;
    for (int t = 1; t <= T && ok; ++t) {
      for (int j = 0; j < N; ++j) path[t][j] = path[t - 1][j] + (((code >> ((t - 1) * N + j)) & 1) ? 1 : -1);
      for (int j = 0; j + 1 < N; ++j)
        if (path[t][j] >= path[t][j + 1]) ok = false;
    }
    if (!ok) continue;
    double h = 1;
    for (int k = 0; k < N; ++k)
      for (int j = 0; j < k; ++j) h *= path[T][k] - path[T][j];
    e.paths.push_back(path);
    e.weights.push_back(std::ldexp(h / hu, -N * T));
  }
  return e;
}

// E[Xi(t1,{x1}) Xi(t2,{x2})] (or the one-point density when t2 < 0)
double occupation(const WalkEnumeration& e, int t1, int x1, int t2, int x2) {
  double p = 0;
  for (std::size_t i = 0; i < e.paths.size(); ++i) {
    int c1 = 0, c2 = 0;
    for (int v : e.paths[i][t1]) c1 += v == x1;
    if (t2 >= 0)
      for (int v : e.paths[i][t2]) c2 += v == x2;
    else
      c2 = 1;
    // equal-time, equal-site pairs are not counted by the factorial moment
    if (t2 == t1 && x2 == x1) c2 = c1 - 1;
    p += e.weights[i] * c1 * c2;
  }
  return p;
}

}  // namespace

TEST_CASE("single particle kernel is the transition density") {
  const auto xi = PointConfiguration::from_locations({0.7});
  const auto k = CorrelationKernel::make(ProcessKind::bm(), xi);
  CHECK(k.variant() == KernelVariant::general);
  for (double x : {-1.0, 0.3, 2.0}) CHECK(k(1.3, x, 1.3, x) == doctest::Approx(gauss(1.3, x, 0.7)).epsilon(1e-14));
  const auto r = CorrelationKernel::make(ProcessKind::rw(), PointConfiguration::from_locations({0.0}));
  CHECK(r.variant() == KernelVariant::rw);
  CHECK(r(1, 1, 1, 1) == doctest::Approx(0.5));
  CHECK(r(1, 1, 1, 0) == 0.0);
  CHECK(r(2, 1, 1, 1) == 0.0);
}

TEST_CASE("kernel plus indicator is a mixture of transition densities") {
  Gen g(41);
  const auto xi = PointConfiguration::from_locations({-1.0, 0.4, 1.5});
  const auto k = CorrelationKernel::general(ProcessKind::bm(), xi);
  const Eigen::VectorXd u = xi.support();
  for (int trial = 0; trial < 5; ++trial) {
    const double t = g.uniform(0.3, 2.0), y = g.uniform(-2.0, 2.0);
    auto f = [&](double s, double x) { return k(s, x, t, y) + (s > t ? gauss(s - t, x, y) : 0.0); };
    Eigen::Matrix3d a;
    Eigen::Vector3d b;
    for (int i = 0; i < 3; ++i) {
      const double s = g.uniform(0.2, 3.0), x = g.uniform(-2.0, 2.0);
      for (int j = 0; j < 3; ++j) a(i, j) = gauss(s, x, u(j));
      b(i) = f(s, x);
    }
    const Eigen::Vector3d c = a.partialPivLu().solve(b);
    for (int i = 0; i < 5; ++i) {
      const double s = g.uniform(0.2, 3.0), x = g.uniform(-2.0, 2.0);
      double pred = 0;
      for (int j = 0; j < 3; ++j) pred += c(j) * gauss(s, x, u(j));
      CHECK(std::abs(pred - f(s, x)) <= 1e-8 * std::max(1.0, std::abs(pred)));
    }
  }
  // random walk: coefficients are the martingale values themselves
  const auto rxi = PointConfiguration::from_locations({0.0, 2.0});
  const auto r = CorrelationKernel::rw(rxi);
  for (int s = 1; s <= 4; ++s)
    for (int x = -s; x <= s + 2; ++x) {
      if ((s + x) % 2 != 0) continue;
      const int t = 2, y = 0;
      const double lhs = r(s, x, t, y) + (s > t ? sf::transition_density(ProcessKind::rw(), s - t, x, y) : 0.0);
      double rhs = 0;
      for (double v : {0.0, 2.0})
        rhs += sf::transition_density(ProcessKind::rw(), s, x, v) * martingale_transform(ProcessKind::rw(), rxi, v, t, y);
      CHECK(std::abs(lhs - rhs) < 1e-14);
    }
}

TEST_CASE("multipoint kernel reduces to the general kernel for simple xi") {
  const auto xi = PointConfiguration::from_locations({0.2, 1.0, 2.6});
  for (const ProcessKind& kind : {ProcessKind::bm(), ProcessKind::besq(0.5)}) {
    const auto a = CorrelationKernel::general(kind, xi);
    const auto b = CorrelationKernel::multipoint(kind, xi);
    for (double s : {0.4, 1.2})
      for (double t : {0.6, 1.2})
        for (double x : {0.3, 1.7})
          for (double y : {0.5, 2.0})
            CHECK(std::abs(a(s, x, t, y) - b(s, x, t, y)) <= 1e-10 * std::max(1.0, std::abs(a(s, x, t, y))));
  }
}

TEST_CASE("extended Hermite kernel is the gauge transform of the N delta_0 kernel") {
  Gen g(42);
  const int N = 3;
  const auto k = CorrelationKernel::multipoint(ProcessKind::bm(), PointConfiguration({{0.0, N}}));
  for (int i = 0; i < 30; ++i) {
    const double s = g.uniform(0.2, 2.0), t = g.uniform(0.2, 2.0), x = g.uniform(-2.0, 2.0), y = g.uniform(-2.0, 2.0);
    const double a = hermite_gauge(s, x, t, y) * kernel_extended_hermite(N, s, x, t, y);
    const double b = k(s, x, t, y);
    CHECK(std::abs(a - b) <= 1e-8 * std::max(1.0, std::abs(b)));
  }
}

TEST_CASE("extended Laguerre kernel is the gauge transform of the N delta_0 kernel") {
  Gen g(43);
  const int N = 2;
  const double nu = 0.5;
  const auto k = CorrelationKernel::multipoint(ProcessKind::besq(nu), PointConfiguration({{0.0, N}}));
  for (int i = 0; i < 30; ++i) {
    const double s = g.uniform(0.2, 2.0), t = g.uniform(0.2, 2.0), x = g.uniform(0.05, 3.0), y = g.uniform(0.05, 3.0);
    const double a = laguerre_gauge(nu, s, x, t, y) * kernel_extended_laguerre(N, nu, s, x, t, y);
    const double b = k(s, x, t, y);
    CHECK(std::abs(a - b) <= 1e-7 * std::max(1.0, std::abs(b)));
  }
}

TEST_CASE("orthonormal function families") {
  // int phi_m phi_n = delta_mn
  for (int m = 0; m < 5; ++m)
    for (int n = 0; n < 5; ++n) {
      auto f = [&](double x) {
        const Eigen::VectorXd h = hermite_functions(5, x);
        return h(m) * h(n);
      };
      CHECK(std::abs(quad::integrate(f, -15.0, 15.0, 1e-13, 1e-12).value - (m == n)) < 1e-10);
      auto l = [&](double x) {
        const Eigen::VectorXd v = laguerre_functions(5, 0.5, x);
        return v(m) * v(n);
      };
      CHECK(std::abs(quad::integrate(l, 0.0, 80.0, 1e-13, 1e-12).value - (m == n)) < 1e-9);
    }
  const Eigen::VectorXd h = hermite_functions(4, 0.7);
  for (int n = 0; n < 4; ++n)
    CHECK(h(n) == doctest::Approx(std::exp(-0.245) * sf::hermite(n, 0.7) /
                                  std::sqrt(std::sqrt(pi) * std::pow(2.0, n) * std::tgamma(n + 1.0))));
}

TEST_CASE("extended Hermite kernel: diagonal integrates to N, equal-time symmetry") {
  auto f = [](double x) { return kernel_extended_hermite(2, 1.0, x, 1.0, x); };
  CHECK(std::abs(quad::integrate(f, -20.0, 20.0, 1e-12, 1e-12).value - 2.0) < 1e-6);
  Gen g(44);
  for (int i = 0; i < 20; ++i) {
    const double t = g.uniform(0.2, 3.0), x = g.uniform(-3.0, 3.0), y = g.uniform(-3.0, 3.0);
    CHECK(std::abs(kernel_extended_hermite(4, t, x, t, y) - kernel_extended_hermite(4, t, y, t, x)) < 1e-12);
  }
}

TEST_CASE("sine kernel branches") {
  CHECK(kernel_sine(0.0, 0.0) == 1.0);
  for (double x : {0.3, 1.0, -2.5}) CHECK(kernel_sine(0.0, x) == doctest::Approx(std::sin(pi * x) / (pi * x)).epsilon(1e-15));
  // continuity at t = 0; from below only off the diagonal, where the Gaussian term vanishes
  for (double x : {0.0, 0.4, 1.7}) CHECK(kernel_sine(1e-9, x) == doctest::Approx(kernel_sine(0.0, x)).epsilon(1e-7));
  for (double x : {0.4, 1.7}) CHECK(kernel_sine(-1e-4, x) == doctest::Approx(kernel_sine(0.0, x)).epsilon(1e-3));
  // t < 0 branch against direct quadrature of -int_1^L
  for (double t : {-0.3, -1.0})
    for (double x : {0.0, 0.6}) {
      auto f = [&](double l) { return -std::exp(pi * pi * l * l * t / 2) * std::cos(pi * l * x); };
      const double direct = quad::integrate(f, 1.0, 12.0, 1e-14, 1e-12).value;
      CHECK(std::abs(kernel_sine(t, x) - direct) < 1e-10);
    }
  // t > 0 branch, x = 0 against the error-function-free series sum_n (pi^2 t/2)^n / (n! (2n+1))
  double series = 0, term = 1;
  for (int n = 0; n < 60; ++n) {
    series += term / (2 * n + 1);
    term *= pi * pi * 0.5 / 2 / (n + 1);
  }
  CHECK(kernel_sine(0.5, 0.0) == doctest::Approx(series).epsilon(1e-12));
}

TEST_CASE("Bessel kernel branches") {
  const double nu = 0.5;
  auto J = [](double z) { return std::sqrt(2 / (pi * z)) * std::sin(z); };
  auto Jd = [](double z) { return std::sqrt(2 / (pi * z)) * (std::cos(z) - std::sin(z) / (2 * z)); };
  for (double x : {0.5, 2.0, 7.0})
    for (double y : {0.3, 4.0}) {
      const double sx = std::sqrt(x), sy = std::sqrt(y);
      const double direct = (J(sx) * sy * Jd(sy) - sx * Jd(sx) * J(sy)) / (2 * (x - y));
      CHECK(std::abs(kernel_bessel(nu, 0.0, y, x) - direct) < 1e-9);
    }
  // diagonal limit and its neighbourhood
  for (double x : {0.5, 3.0, 20.0}) {
    const double d = kernel_bessel(nu, 0.0, x, x);
    CHECK(kernel_bessel(nu, 0.0, x * (1 + 1e-4), x) == doctest::Approx(d).epsilon(1e-3));
    CHECK(kernel_bessel(nu, 0.0, x * (1 + 1e-2), x) == doctest::Approx(d).epsilon(5e-2));
    CHECK(kernel_bessel(nu, 1e-9, x, x) == doctest::Approx(d).epsilon(1e-7));
  }
  // t < 0 against direct quadrature
  for (double t : {-0.5, -2.0}) {
    const double x = 1.3, y = 0.8;
    auto f = [&](double l) {
      return -0.25 * std::exp(l * t / 2) * std::cyl_bessel_j(nu, std::sqrt(l * x)) * std::cyl_bessel_j(nu, std::sqrt(l * y));
    };
    const double direct = quad::integrate(f, 1.0, 200.0, 1e-14, 1e-11).value;
    CHECK(std::abs(kernel_bessel(nu, t, y, x) - direct) < 1e-9);
  }
  CHECK(kernel_bessel(nu, 0.7, 1.1, 0.4) == doctest::Approx(kernel_bessel(nu, 0.7, 0.4, 1.1)).epsilon(1e-13));
}

TEST_CASE("correlations: one point and Karlin-McGregor densities") {
  const auto xi = PointConfiguration::from_locations({0.0, 2.0});
  const auto k = CorrelationKernel::make(ProcessKind::bm(), xi);
  SpaceTimeQuery one{{0.8}, {{0.3}}};
  CHECK(correlation(k, one) == doctest::Approx(k(0.8, 0.3, 0.8, 0.3)).epsilon(1e-15));
  Gen g(45);
  for (const auto& locs : {std::vector<double>{0.0, 2.0}, std::vector<double>{0.0, 1.0, 3.0}}) {
    const auto c = PointConfiguration::from_locations(locs);
    const auto kc = CorrelationKernel::make(ProcessKind::bm(), c);
    const Eigen::VectorXd u = c.support();
    for (int i = 0; i < 20; ++i) {
      const double t = g.uniform(0.2, 2.0);
      const Eigen::VectorXd x = weyl_point(g, int(u.size()), -2.0, 4.0);
      SpaceTimeQuery q{{t}, {std::vector<double>(x.data(), x.data() + x.size())}};
      const double expect = bm_noncolliding(t, x, u);
      CHECK(std::abs(correlation(kc, q) - expect) <= 1e-8 * std::max(expect, 1e-300));
      CHECK(noncolliding_density(ProcessKind::bm(), t, x, u) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("two-time full-size correlation is a Chapman-Kolmogorov product") {
  Gen g(46);
  const auto xi = PointConfiguration::from_locations({0.0, 2.0});
  const auto k = CorrelationKernel::make(ProcessKind::bm(), xi);
  const Eigen::VectorXd u = xi.support();
  for (int i = 0; i < 20; ++i) {
    const double t1 = g.uniform(0.2, 1.5), t2 = t1 + g.uniform(0.1, 1.5);
    const Eigen::VectorXd x1 = weyl_point(g, 2, -2.0, 4.0), x2 = weyl_point(g, 2, -2.0, 4.0);
    SpaceTimeQuery q{{t1, t2}, {{x1(0), x1(1)}, {x2(0), x2(1)}}};
    const double expect = bm_noncolliding(t2 - t1, x2, x1) * bm_noncolliding(t1, x1, u);
    CHECK(std::abs(correlation(k, q) - expect) <= 1e-7 * std::max(1.0, expect));
  }
}

TEST_CASE("gauge invariance and nonnegativity of correlations") {
  Gen g(47);
  const int N = 3;
  const auto k = CorrelationKernel::multipoint(ProcessKind::bm(), PointConfiguration({{0.0, N}}));
  const KernelFunction kf = [&](double s, double x, double t, double y) { return k(s, x, t, y); };
  const KernelFunction kg = [&](double s, double x, double t, double y) {
    return k(s, x, t, y) / hermite_gauge(s, x, t, y);
  };
  for (int i = 0; i < 10; ++i) {
    const double t1 = g.uniform(0.3, 1.0), t2 = t1 + g.uniform(0.2, 1.0);
    SpaceTimeQuery q{{t1, t2}, {{g.uniform(-2, 2), g.uniform(-2, 2)}, {g.uniform(-2, 2)}}};
    const double a = correlation(kf, q), b = correlation(kg, q);
    CHECK(std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(a)));
    CHECK(a >= -1e-10);
  }
  const auto k2 = CorrelationKernel::make(ProcessKind::besq(1.0), PointConfiguration::from_locations({0.5, 1.5, 4.0}));
  for (int i = 0; i < 10; ++i) {
    SpaceTimeQuery q{{g.uniform(0.2, 1.0), 1.5}, {{g.uniform(0, 5)}, {g.uniform(0, 5), g.uniform(0, 5)}}};
    CHECK(correlation(k2, q) >= -1e-10);
  }
}

TEST_CASE("Bessel process kernel is the squared Bessel kernel in square-root coordinates") {
  const auto xi = PointConfiguration::from_locations({0.5, 1.2});
  const auto a = CorrelationKernel::make(ProcessKind::bes(0.5), xi);
  const auto b = CorrelationKernel::make(ProcessKind::besq(0.5), square(xi));
  for (double x : {0.3, 1.1})
    for (double y : {0.6, 1.4})
      CHECK(a(0.9, x, 0.7, y) == doctest::Approx(2 * x * b(0.9, x * x, 0.7, y * y)).epsilon(1e-13));
  // full-size equal-time correlation vs Karlin-McGregor in BES coordinates
  const Eigen::Vector2d y(0.4, 1.3);
  SpaceTimeQuery q{{0.8}, {{0.4, 1.3}}};
  CHECK(correlation(a, q) == doctest::Approx(noncolliding_density(ProcessKind::bes(0.5), 0.8, y, xi.support())).epsilon(1e-8));
}

TEST_CASE("random walk correlations equal enumeration probabilities") {
  const auto xi = PointConfiguration::from_locations({0.0, 2.0});
  const auto k = CorrelationKernel::rw(xi);
  const auto e = enumerate_walks({0, 2}, 4);
  for (int t1 : {1, 2, 3, 4})
    for (int x1 = -5; x1 <= 7; ++x1) {
      SpaceTimeQuery q{{double(t1)}, {{double(x1)}}};
      CHECK(std::abs(correlation(k, q) - occupation(e, t1, x1, -1, 0)) < 1e-12);
      for (int x2 = -5; x2 <= 7; ++x2) {
        if (x2 != x1) {
          SpaceTimeQuery same{{double(t1)}, {{double(x1), double(x2)}}};
          CHECK(std::abs(correlation(k, same) - occupation(e, t1, x1, t1, x2)) < 1e-12);
        }
        for (int t2 = t1 + 1; t2 <= 4; ++t2) {
          SpaceTimeQuery two{{double(t1), double(t2)}, {{double(x1)}, {double(x2)}}};
          CHECK(std::abs(correlation(k, two) - occupation(e, t1, x1, t2, x2)) < 1e-12);
        }
      }
    }
}

TEST_CASE("GUE density") {
  for (double x : {-1.0, 0.0, 2.0}) {
    Eigen::VectorXd v(1);
    v << x;
    CHECK(gue_density(1, 1.7, v) == doctest::Approx(gauss(1.7, x, 0.0)).epsilon(1e-14));
  }
  // integrates to one over the chamber
  auto inner = [](double x1) {
    auto f = [&](double x2) {
      Eigen::Vector2d v(x1, x2);
      return gue_density(2, 1.0, v);
    };
    return quad::integrate(f, x1, 15.0, 1e-12, 1e-10).value;
  };
  CHECK(std::abs(quad::integrate(inner, -15.0, 15.0, 1e-11, 1e-10).value - 1.0) < 1e-4);
  // full-size single-time correlation of the 2 delta_0 kernel
  const auto k = CorrelationKernel::make(ProcessKind::bm(), PointConfiguration({{0.0, 2}}));
  Gen g(48);
  for (int i = 0; i < 10; ++i) {
    const double t = g.uniform(0.3, 2.0);
    const Eigen::VectorXd x = weyl_point(g, 2, -2.0, 2.0);
    SpaceTimeQuery q{{t}, {{x(0), x(1)}}};
    const double expect = gue_density(2, t, x);
    CHECK(std::abs(correlation(k, q) - expect) <= 1e-8 * std::max(1.0, expect));
  }
}

TEST_CASE("lattice kernel: image form against the direct sum") {
  for (double s : {0.2, 0.5})
    for (double t : {0.3, 0.5})
      for (double x : {-0.4, 0.2})
        for (double y : {0.0, 0.7}) {
          const TruncatedValue v = lattice_kernel(s, x, t, y);
          CHECK(std::abs(v.value - lattice_kernel_direct(40, s, x, t, y)) < 1e-9);
          CHECK(v.doubling_change < 1e-8);
        }
}

TEST_CASE("Bessel zero kernel: exchanged form against the direct sum") {
  const auto table = sf::bessel_zeros(0.5, 60);
  for (double s : {0.3, 0.6})
    for (double x : {0.2, 1.5}) {
      const TruncatedValue v = besselzero_kernel(0.5, s, x, 0.4, 0.7);
      CHECK(std::abs(v.value - besselzero_kernel_direct(table, s, x, 0.4, 0.7)) < 1e-8);
      CHECK(v.doubling_change < 1e-8);
    }
}

TEST_CASE("relaxation towards the sine and Bessel kernels") {
  const std::vector<double> taus{1, 4, 16, 64};
  const auto sine = relaxation_probe(RelaxationVariant::sine, 0.0, 0.5, 0.3, 1.0, -0.2, taus);
  const auto bes = relaxation_probe(RelaxationVariant::bessel, 0.5, 0.5, 0.3, 1.0, 0.8, taus);
  for (const auto* probe : {&sine, &bes}) {
    for (std::size_t i = 1; i < probe->size(); ++i) CHECK((*probe)[i].discrepancy < (*probe)[i - 1].discrepancy);
    CHECK(probe->back().discrepancy <= 5e-2);
    for (const auto& st : *probe) CHECK(st.doubling_change < 1e-8);
  }
  CHECK(sine.back().limit == doctest::Approx(kernel_sine(0.5, -0.5)));
}

TEST_CASE("kernel CSV export") {
  std::ostringstream out;
  write_kernel_csv(out, CorrelationKernel::sine(), {{0, 0, 0, 0}, {0, 0, 0, 1}});
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "s,x,t,y,value");
  std::getline(in, line);
  CHECK(line == "0,0,0,0,1");
  std::getline(in, line);
  CHECK(line.substr(0, 8) == "0,0,0,1,");
}

TEST_CASE("query validation") {
  const auto k = CorrelationKernel::sine();
  CHECK_THROWS_AS(correlation(k, SpaceTimeQuery{{1.0, 0.5}, {{0.0}, {0.0}}}), std::invalid_argument);
  CHECK_THROWS_AS(correlation(k, SpaceTimeQuery{{0.0}, {{0.0}}}), std::invalid_argument);
  SpaceTimeQuery big{{1.0}, {std::vector<double>(65, 0.0)}};
  CHECK_THROWS_AS(correlation(k, big), CapacityError);
  // RW parity zeros
  const auto r = CorrelationKernel::rw(PointConfiguration::from_locations({0.0, 2.0}));
  CHECK(correlation(r, SpaceTimeQuery{{2.0}, {{1.0}}}) == 0.0);
}
