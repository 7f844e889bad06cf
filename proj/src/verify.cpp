#include "detmart/verify.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <complex>
#include <random>
#include <tuple>
#include <stdexcept>

#include <Eigen/LU>

#include "detmart/fredholm.hpp"
#include "detmart/kernels.hpp"
#include "detmart/martingales.hpp"
#include "detmart/oconnell.hpp"
#include "detmart/quadrature.hpp"
#include "detmart/simulate.hpp"

namespace detmart::verify {

namespace {

using Checks = std::vector<Check>;

Check at_most(std::string name, double measured, double tol) {
  return {std::move(name), measured, tol, measured <= tol};
}
Check below(std::string name, double measured, double tol) {
  return {std::move(name), measured, tol, measured < tol};
}

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(eng); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(eng); }
};

Eigen::VectorXd sorted_uniform(Rng& g, int n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (int j = 0; j < n; ++j) v(j) = g.uniform(lo, hi);
  std::sort(v.data(), v.data() + n);
  return v;
}

PointConfiguration config(std::initializer_list<double> v) { return PointConfiguration::from_locations(v); }

PathFunctional one(double T) {
  return {{T}, [](const Eigen::MatrixXd&) { return 1.0; }};
}

int occupation(const Eigen::MatrixXd& x, Eigen::Index row, long site) {
  int c = 0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) c += std::lround(x(row, j)) == site;
  return c;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// ---- 1: determinant identity

Checks identities(const Options& o) {
  Rng g(101);
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = g.integer(1, 6);
    std::vector<double> loc;
    while (int(loc.size()) < n) {
      const double u = g.uniform(-3, 3);
      if (std::none_of(loc.begin(), loc.end(), [&](double v) { return std::abs(u - v) < 0.05; })) loc.push_back(u);
    }
    const auto xi = PointConfiguration::from_locations(std::span<const double>(loc));
    Eigen::VectorXd x(n);
    for (int j = 0; j < n; ++j) x(j) = g.uniform(-3, 3);
    const IdentityCheck c = o.phi ? det_phi_identity_check(xi, x, o.phi) : det_phi_identity_check(xi, x);
    worst = std::max(worst, std::isfinite(c.discrepancy) ? c.discrepancy : INFINITY);
  }
  return {at_most("det_phi_identity_check", worst, 1e-10)};
}

// ---- 2, 3: random walk

Checks rw_dmr_exact() {
  Rng g(202);
  const auto xi = config({0.0, 2.0});
  double worst = 0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> times;
    for (int t = 1; t <= 4; ++t)
      if (t == 4 || g.uniform(0, 1) < 0.5) times.push_back(t);
    std::vector<std::array<double, 3>> c(times.size());
    for (auto& r : c) r = {g.uniform(-1, 1), g.uniform(0.2, 2), g.uniform(-0.5, 0.5)};
    PathFunctional F{times, [c](const Eigen::MatrixXd& x) {
                       double s = 0;
                       for (Eigen::Index m = 0; m < x.rows(); ++m)
                         for (Eigen::Index j = 0; j < x.cols(); ++j)
                           s += c[std::size_t(m)][0] * std::cos(c[std::size_t(m)][1] * x(m, j)) +
                                c[std::size_t(m)][2] * x(m, j);
                       return std::tanh(s);
                     }};
    const BruteForceResult r = brute_force_rw(xi, F, 4);
    worst = std::max(worst, std::abs(r.free_dmr - r.doob));
  }
  return {at_most("rw_dmr_equals_doob_law", worst, 1e-12)};
}

Checks rw_kernel_correlations() {
  const auto xi = config({0.0, 2.0});
  const auto k = CorrelationKernel::rw(xi);
  const int T = 4;
  double one_pt = 0, equal_time = 0, two_time = 0;
  auto law = [&](std::vector<double> times, std::function<double(const Eigen::MatrixXd&)> f) {
    return brute_force_rw(xi, {std::move(times), std::move(f)}, T).doob;
  };
  for (int t : {2, 4})
    for (long a = -6; a <= 8; ++a) {
      const double p1 = law({double(t)}, [a](const Eigen::MatrixXd& x) { return occupation(x, 0, a); });
      one_pt = std::max(one_pt, std::abs(correlation(k, {{double(t)}, {{double(a)}}}) - p1));
      for (long b = -6; b <= 8; ++b) {
        if (b == a) continue;
        const double p2 = law({double(t)}, [a, b](const Eigen::MatrixXd& x) {
          return double(occupation(x, 0, a) * occupation(x, 0, b));
        });
        equal_time = std::max(equal_time, std::abs(correlation(k, {{double(t)}, {{double(a), double(b)}}}) - p2));
      }
    }
  for (long a = -6; a <= 8; ++a)
    for (long b = -6; b <= 8; ++b) {
      const double p = law({2.0, 4.0}, [a, b](const Eigen::MatrixXd& x) {
        return double(occupation(x, 0, a) * occupation(x, 1, b));
      });
      two_time = std::max(two_time, std::abs(correlation(k, {{2.0, 4.0}, {{double(a)}, {double(b)}}}) - p));
    }
  return {at_most("rw_one_point_correlations", one_pt, 1e-12),
          at_most("rw_equal_time_two_point_correlations", equal_time, 1e-12),
          at_most("rw_two_time_correlations", two_time, 1e-12)};
}

// ---- 4, 5: Brownian kernels

Checks bm_karlin_mcgregor() {
  Rng g(404);
  Checks out;
  for (const auto& xi : {config({0.0, 2.0}), config({0.0, 1.0, 3.0})}) {
    const auto k = CorrelationKernel::make(ProcessKind::bm(), xi);
    const Eigen::VectorXd u = xi.support();
    double worst = 0;
    for (int i = 0; i < 50; ++i) {
      const double t = g.uniform(0.2, 2.0);
      const Eigen::VectorXd x = sorted_uniform(g, int(u.size()), -2.0, 4.0);
      const double expect = noncolliding_density(ProcessKind::bm(), t, x, u);
      const double c = correlation(k, {{t}, {std::vector<double>(x.data(), x.data() + x.size())}});
      worst = std::max(worst, std::abs(c - expect) / expect);
    }
    out.push_back(at_most("km_single_time_n" + std::to_string(u.size()), worst, 1e-8));
  }
  const auto xi = config({0.0, 2.0});
  const auto k = CorrelationKernel::make(ProcessKind::bm(), xi);
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const double t1 = g.uniform(0.2, 1.5), t2 = t1 + g.uniform(0.1, 1.5);
    const Eigen::VectorXd x1 = sorted_uniform(g, 2, -2.0, 4.0), x2 = sorted_uniform(g, 2, -2.0, 4.0);
    const double expect = noncolliding_density(ProcessKind::bm(), t2 - t1, x2, x1) *
                          noncolliding_density(ProcessKind::bm(), t1, x1, xi.support());
    const double c = correlation(k, {{t1, t2}, {{x1(0), x1(1)}, {x2(0), x2(1)}}});
    worst = std::max(worst, std::abs(c - expect) / expect);
  }
  out.push_back(at_most("km_two_time_n2", worst, 1e-7));
  return out;
}

Checks delta_zero_closed_forms() {
  Rng g(505);
  Checks out;
  {
    const auto k = CorrelationKernel::multipoint(ProcessKind::bm(), PointConfiguration({{0.0, 3}}));
    double worst = 0;
    for (int i = 0; i < 50; ++i) {
      const double s = g.uniform(0.2, 2), t = g.uniform(0.2, 2), x = g.uniform(-2, 2), y = g.uniform(-2, 2);
      worst = std::max(worst, rel(k(s, x, t, y), hermite_gauge(s, x, t, y) * kernel_extended_hermite(3, s, x, t, y)));
    }
    out.push_back(at_most("hermite_residue_vs_closed_form", worst, 1e-8));
  }
  {
    const double nu = 0.5;
    const auto k = CorrelationKernel::multipoint(ProcessKind::besq(nu), PointConfiguration({{0.0, 3}}));
    double worst = 0;
    for (int i = 0; i < 50; ++i) {
      const double s = g.uniform(0.2, 2), t = g.uniform(0.2, 2), x = g.uniform(0.05, 3), y = g.uniform(0.05, 3);
      worst = std::max(worst, rel(k(s, x, t, y),
                                  laguerre_gauge(nu, s, x, t, y) * kernel_extended_laguerre(3, nu, s, x, t, y)));
    }
    out.push_back(at_most("laguerre_residue_vs_closed_form", worst, 1e-8));
  }
  {
    const KernelFunction plain = [](double s, double x, double t, double y) {
      return kernel_extended_hermite(3, s, x, t, y);
    };
    const KernelFunction gauged = [](double s, double x, double t, double y) {
      return hermite_gauge(s, x, t, y) * kernel_extended_hermite(3, s, x, t, y);
    };
    double worst = 0;
    for (int i = 0; i < 30; ++i) {
      const double t1 = g.uniform(0.3, 1), t2 = t1 + g.uniform(0.2, 1);
      SpaceTimeQuery q{{t1, t2}, {{g.uniform(-2, 2), g.uniform(-2, 2)}, {g.uniform(-2, 2)}}};
      const double a = correlation(plain, q), b = correlation(gauged, q);
      worst = std::max(worst, rel(b, a));
    }
    out.push_back(at_most("gauge_conjugated_correlations", worst, 1e-10));
  }
  {
    const auto k = CorrelationKernel::multipoint(ProcessKind::bm(), PointConfiguration({{0.0, 2}}));
    double worst = 0;
    for (int i = 0; i < 30; ++i) {
      const double t = g.uniform(0.3, 2);
      const Eigen::VectorXd x = sorted_uniform(g, 2, -2, 2);
      worst = std::max(worst, rel(correlation(k, {{t}, {{x(0), x(1)}}}), gue_density(2, t, x)));
    }
    out.push_back(at_most("gue_density_n2", worst, 1e-8));
    const double mass =
        quad::integrate([&](double x) { return k(1.0, x, 1.0, x); }, -20.0, 20.0, 1e-12, 1e-12).value;
    out.push_back(at_most("one_point_density_integrates_to_n", std::abs(mass - 2.0), 1e-5));
  }
  return out;
}

// ---- 6: martingales

Checks martingale_normalizations(const Options& o) {
  struct Case {
    ProcessKind kind;
    PointConfiguration xi;
    double T;
  };
  const std::vector<std::pair<std::string, std::vector<Case>>> groups = {
      {"bm",
       {{ProcessKind::bm(), config({0.0}), 1.0},
        {ProcessKind::bm(), config({-1.0, 0.5}), 1.0},
        {ProcessKind::bm(), config({-1.0, 0.5, 2.0}), 0.7},
        {ProcessKind::bm(), config({-1.5, -0.2, 0.6, 2.0}), 0.5}}},
      {"besq",
       {{ProcessKind::besq(0.3), config({0.5, 1.5}), 1.0},
        {ProcessKind::besq(-0.4), config({0.2, 1.1, 2.5}), 0.8},
        {ProcessKind::besq(1.0), config({0.4, 1.0, 2.2, 3.5}), 0.5}}},
      {"rw",
       {{ProcessKind::rw(), config({0, 2}), 3.0},
        {ProcessKind::rw(), config({-3, 1, 2}), 2.0},
        {ProcessKind::rw(), config({-2, 0, 2, 4}), 4.0}}},
  };
  Checks out;
  std::uint64_t seed = 600;
  for (const auto& [name, cases] : groups) {
    double worst = 0;
    for (const Case& c : cases)
      worst = std::max(worst, z_score(dmr_expectation(c.kind, c.xi, one(c.T), {100000, ++seed, o.workers}), 1.0));
    out.push_back(at_most("dmr_mean_one_" + name + "_z", worst, 4.0));
  }

  // m_n(t, x) = (m_n(t+1, x+1) + m_n(t+1, x-1)) / 2, relative to the term size
  const ProcessKind rw = ProcessKind::rw();
  double worst = 0;
  for (int n = 0; n <= 12; ++n)
    for (int t = 0; t <= 8; ++t)
      for (int x = -6; x <= 6; ++x) {
        const double a = poly_martingale(rw, n, t + 1, x + 1), b = poly_martingale(rw, n, t + 1, x - 1);
        const double scale = std::max({1.0, std::abs(a), std::abs(b)});
        worst = std::max(worst, std::abs(poly_martingale(rw, n, t, x) - 0.5 * (a + b)) / scale);
      }
  out.push_back(at_most("fujita_recurrence", worst, 1e-9));

  // E[(y + i sqrt(C(t)) G)^n] = m_n(t, y)
  double zmax = 0;
  for (auto [t, y] : {std::pair{2, 0.5}, std::pair{5, -1.0}}) {
    const long n_paths = 40000;
    std::vector<double> w(static_cast<std::size_t>(n_paths));
    parallel_for(n_paths, o.workers, [&](long p) {
      RandomStream rng(6060, std::uint64_t(p));
      w[std::size_t(p)] = std::sqrt(sample_ctime(t, rng)) * rng.normal();
    });
    for (int n = 1; n <= 5; ++n) {
      std::vector<std::complex<double>> z(w.size());
      for (std::size_t i = 0; i < w.size(); ++i) z[i] = std::pow(std::complex<double>(y, w[i]), n);
      const ComplexEstimate e = make_estimate(z);
      zmax = std::max({zmax, z_score(e.real(), poly_martingale(rw, n, t, y)), z_score(e.imag(), 0.0)});
    }
  }
  out.push_back(at_most("rw_cpr_moments_z", zmax, 4.0));
  return out;
}

// ---- 7: Fredholm

Checks fredholm_routes(const Options& o) {
  Checks out;
  {
    const auto xi = config({0.0, 2.0});
    const auto k = CorrelationKernel::make(ProcessKind::bm(), xi);
    const TestFunctionSpec spec{
        {1.0}, {ChiFunction::callable(-1.0, 2.5, [](double y) { return -0.6 * std::exp(-y * y / 3); })}};
    const double series = fredholm_series(k, spec);
    out.push_back(at_most("bm_series_vs_finite_rank", std::abs(series - finite_rank_det(k, spec)), 1e-8));
    const Estimate mc = mgf_monte_carlo(ProcessKind::bm(), xi, spec, {100000, 701, o.workers});
    out.push_back(at_most("bm_series_vs_monte_carlo_z", z_score(mc, series), 4.0));
  }
  {
    Rng g(702);
    const auto xi = config({0.0, 2.0});
    const auto k = CorrelationKernel::rw(xi);
    std::vector<std::pair<double, double>> v1, v2;
    for (int site = -2; site <= 4; site += 2) v1.push_back({double(site), g.uniform(-0.5, 0.5)});
    for (int site = -4; site <= 6; site += 2) v2.push_back({double(site), g.uniform(-0.5, 0.5)});
    const TestFunctionSpec spec{{2, 4}, {ChiFunction::sites(v1), ChiFunction::sites(v2)}};
    const double series = fredholm_series(k, spec);
    const double exact = brute_force_rw(xi, mgf_functional(spec), 4).doob;
    out.push_back(at_most("rw_series_vs_enumeration", std::abs(series - exact), 1e-10));
    const Estimate mc = mgf_monte_carlo(ProcessKind::rw(), xi, spec, {100000, 703, o.workers});
    out.push_back(at_most("rw_series_vs_monte_carlo_z", z_score(mc, exact), 4.0));
  }
  return out;
}

// ---- 8: relaxation

Checks relaxation() {
  const std::vector<double> taus{1, 4, 16, 64};
  Checks out;
  for (auto [name, variant, nu, y] :
       {std::tuple{"sine", RelaxationVariant::sine, 0.0, -0.2}, std::tuple{"bessel", RelaxationVariant::bessel, 0.5, 0.8}}) {
    const auto probe = relaxation_probe(variant, nu, 0.5, 0.3, 1.0, y, taus);
    double rise = -INFINITY, window = 0;
    for (std::size_t i = 1; i < probe.size(); ++i) rise = std::max(rise, probe[i].discrepancy - probe[i - 1].discrepancy);
    for (const auto& st : probe) window = std::max(window, st.doubling_change);
    out.push_back(below(std::string(name) + "_discrepancy_increment", rise, 0.0));
    out.push_back(at_most(std::string(name) + "_final_discrepancy", probe.back().discrepancy, 5e-2));
    out.push_back(below(std::string(name) + "_window_doubling", window, 1e-8));
  }
  return out;
}

// ---- 9: lifted observable

Checks lifted(const Options& o) {
  Checks out;
  Rng g(909);
  double kron = 0;
  for (double a : {0.1, 1.0})
    for (int n = 1; n <= 4; ++n)
      for (int trial = 0; trial < 3; ++trial) {
        std::vector<double> loc;
        double x = g.uniform(-2, 0);
        for (int i = 0; i < n; ++i) {
          loc.push_back(x);
          x += g.uniform(0.35, 1.45) + 0.013;
        }
        const auto nu = PointConfiguration::from_locations(std::span<const double>(loc));
        for (double u : loc)
          for (double v : loc) kron = std::max(kron, std::abs(phi_lift(nu, u, a, v) - (u == v ? 1.0 : 0.0)));
      }
  out.push_back(at_most("phi_lift_kronecker", kron, 1e-10));

  const auto nu3 = config({-0.7, 0.3, 1.6});
  const Eigen::VectorXd sup = nu3.support();
  double scaling = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::complex<double> x(g.uniform(-2, 3), g.uniform(-1.5, 1.5));
    const Eigen::Index k = g.integer(0, 2);
    const std::complex<double> lim = phi_simple(sup, k, x);
    const double e3 = std::abs(phi_lift(nu3, sup(k), 1e-3, x) - lim);
    const double e4 = std::abs(phi_lift(nu3, sup(k), 1e-4, x) - lim);
    scaling = std::max(scaling, std::abs(e3 / e4 / 10.0 - 1.0));
  }
  out.push_back(at_most("combinatorial_limit_linear_in_a", scaling, 0.2));

  const auto nu = config({0.0, 1.0});
  const long n = 200000;
  const Estimate ref = reciprocal_reference(nu, 1.0, 0.0, {n, 910, o.workers});
  const OconnellResult small = oconnell_theta_cpr({1e-3, nu, 1.0, 0.0}, {n, 911, o.workers});
  out.push_back(at_most("cpr_small_a_vs_reciprocal_reference_z", z_score(small.estimate.real(), ref), 4.0));
  const OconnellResult c = oconnell_theta_cpr({0.1, nu, 1.0, 0.0}, {n, 912, o.workers});
  const OconnellResult d = oconnell_theta_dmr({0.1, nu, 1.0, 0.0}, {n, 913, o.workers});
  out.push_back(at_most("cpr_vs_dmr_z", z_score(c.estimate.real(), d.estimate.real()), 4.0));
  out.push_back(at_most("cpr_imaginary_part_z",
                        std::max(z_score(small.estimate.imag(), 0.0), z_score(c.estimate.imag(), 0.0)), 4.0));
  out.push_back(at_most("pole_rejections", double(small.rejections + c.rejections), 0.0));
  return out;
}

// ---- 10: reducibility

Checks reducibility_rw() {
  const auto xi = config({0.0, 2.0});
  double worst = 0;
  for (int T : {2, 3, 4})
    for (double w : {0.4, 0.9}) {
      std::vector<double> times;
      for (int t = 1; t <= T; ++t) times.push_back(t);
      PathFunctional F{times, [w](const Eigen::MatrixXd& x) {
                         double s = 0;
                         for (Eigen::Index m = 0; m < x.rows(); ++m) s += std::cos(w * x(m, 0) + m);
                         return s;
                       }};
      const auto [lhs, rhs] = reducibility_exact_rw(xi, 1, F, T);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  return {at_most("reducibility_rw_exact", worst, 1e-12)};
}

Checks reducibility_bm(const Options& o) {
  const auto xi = config({-1.0, 0.2, 1.5});
  PathFunctional F{{0.5, 1.0}, [](const Eigen::MatrixXd& x) {
                     return std::exp(-x.row(1).squaredNorm() / 6) * std::cos(x(0, 0) - x(0, 1));
                   }};
  const ReducibilityResult r = reducibility_check(ProcessKind::bm(), xi, 2, F, {100000, 1010, o.workers});
  return {at_most("reducibility_bm_monte_carlo_z", z_score(r.lhs, r.rhs), 4.0)};
}

Checks concat(std::initializer_list<Checks> parts) {
  Checks out;
  for (const Checks& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> c = {
      {1, "determinant identity", 1},
      {2, "exact random-walk determinantal-martingale representation", 5},
      {3, "exact random-walk kernel correlations", 10},
      {4, "Brownian kernel against Karlin-McGregor", 5},
      {5, "N delta_0 closed forms", 30},
      {6, "martingale normalizations", 60},
      {7, "Fredholm equivalence", 60},
      {8, "relaxation to sine and Bessel kernels", 30},
      {9, "lifted observable", 120},
      {10, "reducibility", 60},
  };
  return c;
}

std::vector<Check> run_criterion(int id, const Options& opts) {
  switch (id) {
    case 1: return identities(opts);
    case 2: return rw_dmr_exact();
    case 3: return rw_kernel_correlations();
    case 4: return bm_karlin_mcgregor();
    case 5: return delta_zero_closed_forms();
    case 6: return martingale_normalizations(opts);
    case 7: return fredholm_routes(opts);
    case 8: return relaxation();
    case 9: return lifted(opts);
    case 10: return concat({reducibility_rw(), reducibility_bm(opts)});
  }
  throw std::invalid_argument("verify: no criterion " + std::to_string(id));
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> s = {"identities", "martingales", "dmr_rw",   "dmr_bm",
                                             "fredholm",   "relaxation",  "oconnell"};
  return s;
}

std::vector<Check> run_suite(const std::string& suite, const Options& opts) {
  if (suite == "identities") return identities(opts);
  if (suite == "martingales") return martingale_normalizations(opts);
  if (suite == "dmr_rw") return concat({rw_dmr_exact(), rw_kernel_correlations(), reducibility_rw()});
  if (suite == "dmr_bm") return concat({bm_karlin_mcgregor(), delta_zero_closed_forms(), reducibility_bm(opts)});
  if (suite == "fredholm") return fredholm_routes(opts);
  if (suite == "relaxation") return relaxation();
  if (suite == "oconnell") return lifted(opts);
  throw std::invalid_argument("verify: unknown suite '" + suite + "'");
}

bool all_pass(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

}  // namespace detmart::verify
