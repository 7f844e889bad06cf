#include <doctest.h>

#include <cmath>
#include <numbers>

#include "detmart/errors.hpp"
#include "detmart/fredholm.hpp"
#include "detmart/quadrature.hpp"
#include "support.hpp"

using namespace detmart;

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

TestFunctionSpec single(double t, ChiFunction c) { return {{t}, {std::move(c)}}; }

// E[prod_j (1 + chi(X_j(t)))] under the Doob law by direct enumeration, N = 2 walkers
double doob_product(double u1, double u2, const std::vector<int>& times, const std::vector<ChiFunction>& chi) {
  const int T = times.back();
  double total = 0;
  for (int code = 0; code < (1 << (2 * T)); ++code) {
    double a = u1, b = u2, w = std::ldexp(1.0, -2 * T), f = 1;
    bool alive = true;
    std::size_t next = 0;
    for (int s = 1; s <= T; ++s) {
      a += (code >> (s - 1)) & 1 ? 1 : -1;
      b += (code >> (T + s - 1)) & 1 ? 1 : -1;
      alive = alive && a < b;
      while (next < times.size() && times[next] == s) {
        f *= (1 + chi[next](a)) * (1 + chi[next](b));
        ++next;
      }
    }
    if (alive) total += w * f * (b - a) / (u2 - u1);
  }
  return total;
}

}  // namespace

TEST_CASE("zero chi gives one") {
  const auto k = CorrelationKernel::make(ProcessKind::bm(), PointConfiguration::from_locations({0.0, 1.0}));
  CHECK(fredholm_series(k, single(1.0, ChiFunction::zero())) == 1.0);
  CHECK(fredholm_series(k, single(1.0, ChiFunction::callable(-2, 2, [](double) { return 0.0; }))) == 1.0);
  CHECK(finite_rank_det(k, single(1.0, ChiFunction::zero())) == 1.0);
  const Estimate e = mgf_monte_carlo(ProcessKind::bm(), PointConfiguration::from_locations({0.0, 1.0}),
                                     single(1.0, ChiFunction::zero()), {20000, 3, 0});
  CHECK(z_score(e, 1.0) < 4);
}

TEST_CASE("one particle") {
  const auto xi = PointConfiguration::from_locations({0.0});
  const auto k = CorrelationKernel::make(ProcessKind::bm(), xi);
  for (double t : {0.5, 2.0})
    for (double lam : {0.3, 0.9}) {
      const double a = -0.4, b = 1.1;
      const double exact = 1 - lam * (normal_cdf(b / std::sqrt(t)) - normal_cdf(a / std::sqrt(t)));
      const auto spec = single(t, ChiFunction::indicator(a, b, -lam));
      CHECK(fredholm_series(k, spec) == doctest::Approx(exact).epsilon(1e-12));
      CHECK(finite_rank_det(k, spec) == doctest::Approx(exact).epsilon(1e-12));
    }
}

TEST_CASE("BM, N = 2, one time: the three routes") {
  const auto xi = PointConfiguration::from_locations({0.0, 2.0});
  const auto k = CorrelationKernel::make(ProcessKind::bm(), xi);
  const auto spec = single(1.0, ChiFunction::callable(-1.0, 2.5, [](double y) { return -0.6 * std::exp(-y * y / 3); }));
  FredholmOptions o;
  o.excess_block = true;
  const FredholmResult r = fredholm_expansion(k, spec, o);
  CHECK(r.truncation == 2);
  CHECK(std::abs(r.excess) <= 1e-10);
  CHECK(r.order_change <= 1e-6);
  CHECK(std::abs(r.value - finite_rank_det(k, spec)) <= 1e-8);
  const Estimate e = mgf_monte_carlo(ProcessKind::bm(), xi, spec, {40000, 5, 0});
  CHECK(z_score(e, r.value) < 4);
}

TEST_CASE("BM, N = 2, two times, with a gauge") {
  const auto xi = PointConfiguration::from_locations({-0.5, 1.0});
  const auto k = CorrelationKernel::make(ProcessKind::bm(), xi);
  TestFunctionSpec spec{{0.5, 1.2},
                        {ChiFunction::indicator(-1.0, 0.5, -0.5),
                         ChiFunction::callable(-2.0, 2.0, [](double y) { return 0.4 * std::cos(y); })}};
  KernelFunction plain = [&](double s, double x, double t, double y) { return k(s, x, t, y); };
  KernelFunction gauged = [&](double s, double x, double t, double y) {
    return std::exp(0.3 * x + 0.2 * s - 0.3 * y - 0.2 * t) * k(s, x, t, y);
  };
  const double a = fredholm_series(plain, 2, spec, 32);
  const double b = fredholm_series(gauged, 2, spec, 32);
  CHECK(std::abs(a - b) <= 1e-9);
  const Estimate e = mgf_monte_carlo(ProcessKind::bm(), xi, spec, {40000, 6, 0});
  CHECK(z_score(e, a) < 4);
}

TEST_CASE("RW routes against enumeration") {
  const auto xi = PointConfiguration::from_locations({0.0, 2.0});
  const auto k = CorrelationKernel::make(ProcessKind::rw(), xi);
  Gen g(9);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::pair<double, double>> v;
    for (int site : {-2, 0, 2, 4}) v.push_back({double(site), g.uniform(-0.9, 1.5)});
    const auto c = ChiFunction::sites(v);
    const double exact = doob_product(0, 2, {2}, {c});
    const auto spec = single(2.0, c);
    CHECK(std::abs(finite_rank_det(k, spec) - exact) <= 1e-12);
    FredholmOptions o;
    o.excess_block = true;
    const auto r = fredholm_expansion(k, spec, o);
    CHECK(std::abs(r.value - exact) <= 1e-12);
    CHECK(std::abs(r.excess) <= 1e-10);
  }
  // two times
  std::vector<std::pair<double, double>> v1, v2;
  for (int site = -2; site <= 4; site += 2) v1.push_back({double(site), g.uniform(-0.5, 0.5)});
  for (int site = -4; site <= 6; site += 2) v2.push_back({double(site), g.uniform(-0.5, 0.5)});
  TestFunctionSpec spec{{2, 4}, {ChiFunction::sites(v1), ChiFunction::sites(v2)}};
  const double exact = doob_product(0, 2, {2, 4}, spec.chi);
  CHECK(std::abs(fredholm_series(k, spec) - exact) <= 1e-10);
  CHECK(std::abs(brute_force_rw(xi, mgf_functional(spec), 4).free_dmr - exact) <= 1e-10);
  const Estimate e = mgf_monte_carlo(ProcessKind::rw(), xi, spec, {40000, 7, 0});
  CHECK(z_score(e, exact) < 4);
}

TEST_CASE("repeated time collapses to one time") {
  const auto xi = PointConfiguration::from_locations({0.0, 2.0});
  const auto k = CorrelationKernel::make(ProcessKind::rw(), xi);
  Gen g(10);
  std::vector<std::pair<double, double>> a, b, ab;
  for (int site = -3; site <= 5; ++site) {
    const double x = g.uniform(-0.5, 0.8), y = g.uniform(-0.5, 0.8);
    a.push_back({double(site), x});
    b.push_back({double(site), y});
    ab.push_back({double(site), (1 + x) * (1 + y) - 1});
  }
  TestFunctionSpec twice{{3, 3}, {ChiFunction::sites(a), ChiFunction::sites(b)}};
  const double v2 = fredholm_series(k, twice);
  const double v1 = fredholm_series(k, single(3, ChiFunction::sites(ab)));
  CHECK(std::abs(v2 - v1) <= 1e-12);
  CHECK(std::abs(v1 - doob_product(0, 2, {3}, {ChiFunction::sites(ab)})) <= 1e-12);
}

TEST_CASE("avoidance probabilities lie in (0, 1]") {
  const auto xi = PointConfiguration::from_locations({-1.0, 0.0, 1.5});
  const auto k = CorrelationKernel::make(ProcessKind::bm(), xi);
  double prev = 1.0;
  for (double lam : {0.2, 0.5, 0.9, 0.99}) {
    const double v = fredholm_series(k, single(0.8, ChiFunction::indicator(-0.5, 0.7, -lam)));
    CHECK(v > 0);
    CHECK(v <= 1);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("extended Hermite kernel against the GUE density") {
  const double t = 1.3;
  auto chi = [](double y) { return -0.5 * std::exp(-y * y); };
  // E[prod (1 + chi)] under the N = 2 eigenvalue density, normalized in the test
  auto w = [&](double x1, double x2) { return (x2 - x1) * (x2 - x1) * std::exp(-(x1 * x1 + x2 * x2) / (2 * t)); };
  auto outer = [&](bool with_chi) {
    return quad::integrate(
               [&](double x2) {
                 return quad::integrate(
                            [&](double x1) {
                              return w(x1, x2) * (with_chi ? (1 + chi(x1)) * (1 + chi(x2)) : 1.0);
                            },
                            -12, 12, 1e-13, 1e-11)
                     .value;
               },
               -12, 12, 1e-12, 1e-11)
        .value;
  };
  const double exact = outer(true) / outer(false);
  const auto k = CorrelationKernel::extended_hermite(2);
  const double v = fredholm_series(k, single(t, ChiFunction::callable(-8, 8, chi)), 96);
  CHECK(v == doctest::Approx(exact).epsilon(1e-9));
}

TEST_CASE("fredholm errors") {
  const auto xi = PointConfiguration::from_locations({0.0, 2.0});
  const auto k = CorrelationKernel::make(ProcessKind::bm(), xi);
  auto wiggly = ChiFunction::callable(-6, 6, [](double y) { return 0.5 * std::sin(5 * y); });
  CHECK_THROWS_AS(fredholm_series(k, single(1.0, wiggly), 4), NumericError);
  TestFunctionSpec rep{{1, 1}, {ChiFunction::indicator(0, 1, 0.1), ChiFunction::indicator(0, 1, 0.1)}};
  CHECK_THROWS_AS(fredholm_series(k, rep), std::invalid_argument);
  CHECK_THROWS_AS(ChiFunction::indicator(0, 1, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(ChiFunction::sites({{0.0, -2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(fredholm_series(CorrelationKernel::sine(), single(1.0, ChiFunction::zero())),
                  std::invalid_argument);
  TestFunctionSpec two{{1, 2}, {ChiFunction::zero(), ChiFunction::zero()}};
  CHECK_THROWS_AS(finite_rank_det(k, two), std::invalid_argument);
}
