#include "detmart/oconnell.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/LU>

#include "detmart/errors.hpp"
#include "detmart/quadrature.hpp"
#include "detmart/specfun.hpp"

namespace detmart {

using cplx = std::complex<double>;

namespace {

constexpr double kRejectionBudget = 1e-4;
// CPR imaginary parts come from their own stream family, as in simulate
constexpr std::uint64_t kImagStream = std::uint64_t(1) << 62;

cplx phi_lift_unchecked(const Eigen::VectorXd& sup, Eigen::Index k, double a, cplx x) {
  const double u = sup(k);
  cplx v = specfun::gamma(1.0 - a * (u - x));
  for (Eigen::Index r = 0; r < sup.size(); ++r)
    if (r != k) v *= specfun::gamma(cplx(a * (sup(r) - u))) * specfun::rgamma(a * (sup(r) - x));
  return v;
}

// Gamma(a(r - u)) is infinite when a times a gap is a non-positive integer
void check_gaps(const Eigen::VectorXd& sup, double a) {
  for (Eigen::Index i = 0; i < sup.size(); ++i)
    for (Eigen::Index j = 0; j < sup.size(); ++j) {
      const double g = a * (sup(i) - sup(j));
      if (i != j && g < 0 && std::abs(g - std::round(g)) < 1e-12)
        throw std::invalid_argument("lift: a times a gap of nu_hat is an integer, the lifted functions are undefined");
    }
}

bool near_any_pole(const Eigen::VectorXd& sup, double a, cplx x) {
  for (double u : sup)
    if (phi_lift_pole_distance(u, a, x) < kPoleTolerance) return true;
  return false;
}

const quad::Rule<double>& hermite_rule(int order) {
  thread_local int cached = -1;
  thread_local quad::Rule<double> rule;
  if (cached != order) {
    rule = quad::gauss_hermite(order);
    cached = order;
  }
  return rule;
}

double transform(const Eigen::VectorXd& sup, Eigen::Index k, double a, double tau, double x, int order) {
  const quad::Rule<double>& rule = hermite_rule(order);
  const double sc = std::sqrt(2.0 * tau);
  // conjugate symmetry: only the real part survives the symmetric node pairs
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    if (rule.nodes[i] < 0) continue;
    const double w = rule.nodes[i] == 0 ? rule.weights[i] : 2.0 * rule.weights[i];
    sum += w * phi_lift_unchecked(sup, k, a, cplx(x, sc * rule.nodes[i])).real();
  }
  return sum / std::sqrt(std::numbers::pi);
}

double indicator_product(const Eigen::VectorXd& v, double level) {
  for (double x : v)
    if (!(x >= level)) return 0.0;
  return 1.0;
}

}  // namespace

void LiftParams::validate() const {
  if (!(a > 0) || !std::isfinite(a)) throw std::invalid_argument("lift: a must be positive");
  if (!(t > 0) || !std::isfinite(t)) throw std::invalid_argument("lift: t must be positive");
  if (std::isnan(h)) throw std::invalid_argument("lift: h must be a number");
  if (nu_hat.empty() || !nu_hat.simple()) throw std::invalid_argument("lift: nu_hat must be simple and non-empty");
  if (nu_hat.total() > 5) throw CapacityError("lift: at most 5 particles");
  check_gaps(nu_hat.support(), a);
}

double phi_lift_pole_distance(double u, double a, cplx x) {
  const double n = std::max(1.0, std::round(a * (u - x.real())));
  return std::abs(x - (u - n / a));
}

cplx phi_lift(const PointConfiguration& nu_hat, double u, double a, cplx x) {
  if (!(a > 0)) throw std::invalid_argument("phi_lift: a must be positive");
  const Eigen::VectorXd sup = nu_hat.support();
  const Eigen::Index k = nu_hat.index_of(u);
  check_gaps(sup, a);
  if (phi_lift_pole_distance(sup(k), a, x) < kPoleTolerance) {
    const long n = std::lround(std::max(1.0, std::round(a * (sup(k) - x.real()))));
    throw std::domain_error("phi_lift: x is within 1e-8 of the pole n = " + std::to_string(n));
  }
  return phi_lift_unchecked(sup, k, a, x);
}

double lift_transform(const PointConfiguration& nu_hat, double u, double a, double tau, double x, int order) {
  if (!(tau > 0)) throw std::domain_error("lift_transform: tau must be positive");
  if (order < 2) throw std::invalid_argument("lift_transform: order too small");
  const Eigen::VectorXd sup = nu_hat.support();
  return transform(sup, nu_hat.index_of(u), a, tau, x, order);
}

OconnellResult oconnell_theta_cpr(const LiftParams& p, const McOptions& opts) {
  p.validate();
  const Eigen::VectorXd sup = p.nu_hat.support();
  const Eigen::Index n = sup.size();
  const double tau = 1.0 / p.t, level = p.h / p.t;
  std::vector<cplx> vals(std::size_t(opts.n_paths));
  std::vector<char> rejected(std::size_t(opts.n_paths), 0);
  parallel_for(opts.n_paths, opts.workers, [&](long q) {
    RandomStream rng(opts.seed, std::uint64_t(q));
    RandomStream irng(opts.seed, std::uint64_t(q) | kImagStream);
    Eigen::VectorXd re(n);
    Eigen::VectorXcd z(n);
    for (Eigen::Index j = 0; j < n; ++j) re(j) = sup(j) + std::sqrt(tau) * rng.normal();
    for (Eigen::Index j = 0; j < n; ++j) z(j) = cplx(re(j), std::sqrt(tau) * irng.normal());
    cplx v = 0.0;
    if (indicator_product(re, level) != 0.0) {
      for (Eigen::Index j = 0; j < n; ++j)
        if (near_any_pole(sup, p.a, z(j))) {
          rejected[std::size_t(q)] = 1;
          return;
        }
      Eigen::MatrixXcd m(n, n);
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) m(j, k) = phi_lift_unchecked(sup, k, p.a, z(j));
      v = m.partialPivLu().determinant();
    }
    vals[std::size_t(q)] = v;
  });
  OconnellResult r;
  std::vector<cplx> kept;
  kept.reserve(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (rejected[i])
      ++r.rejections;
    else
      kept.push_back(vals[i]);
  }
  if (double(r.rejections) > kRejectionBudget * double(opts.n_paths))
    throw NumericError("oconnell_theta_cpr: too many paths near poles (" + std::to_string(r.rejections) + ")");
  r.estimate = make_estimate(kept);
  return r;
}

OconnellResult oconnell_theta_dmr(const LiftParams& p, const McOptions& opts, int quad_order) {
  p.validate();
  if (quad_order < 2) throw std::invalid_argument("oconnell_theta_dmr: order too small");
  const Eigen::VectorXd sup = p.nu_hat.support();
  const Eigen::Index n = sup.size();
  const double tau = 1.0 / p.t, level = p.h / p.t;
  const double sd = std::sqrt(tau);

  // poles sit on the real axis at u - m/a, left of every vertical integration line
  // that can carry weight; keep the nearest one 3 standard deviations away
  const double x_min = std::max(level, sup.minCoeff() - 6.0 * sd);
  if (x_min - (sup.maxCoeff() - 1.0 / p.a) < 3.0 * sd)
    throw std::domain_error("oconnell_theta_dmr: a too large, poles come within 3 sd of the integration lines");

  // order: double until the transform is stable to 1e-8 on probe points covering the sampled range
  int order = quad_order;
  for (;; order *= 2) {
    if (order > 4096) throw NumericError("oconnell_theta_dmr: Gauss-Hermite order did not settle");
    double change = 0.0;
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index j = 0; j < n; ++j)
        for (double d = -6.0; d <= 6.0; d += 1.5) {
          const double x = std::max(sup(j) + d * sd, level);
          change = std::max(change, std::abs(transform(sup, k, p.a, tau, x, order) -
                                             transform(sup, k, p.a, tau, x, 2 * order)));
        }
    if (change <= 1e-8) break;
  }

  std::vector<double> vals(std::size_t(opts.n_paths));
  parallel_for(opts.n_paths, opts.workers, [&](long q) {
    RandomStream rng(opts.seed, std::uint64_t(q));
    Eigen::VectorXd b(n);
    for (Eigen::Index j = 0; j < n; ++j) b(j) = sup(j) + sd * rng.normal();
    double v = 0.0;
    if (indicator_product(b, level) != 0.0) {
      Eigen::MatrixXd m(n, n);
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) m(j, k) = transform(sup, k, p.a, tau, b(j), order);
      v = m.partialPivLu().determinant();
    }
    vals[std::size_t(q)] = v;
  });
  OconnellResult r;
  const Estimate e = make_estimate(vals);
  r.estimate = {cplx(e.mean, 0.0), e.std_error, 0.0, e.n};
  r.quad_order = order;
  return r;
}

Estimate reciprocal_reference(const PointConfiguration& nu_hat, double t, double h, const McOptions& opts,
                              const SdeOptions& sde) {
  if (!(t > 0)) throw std::invalid_argument("reciprocal_reference: t must be positive");
  const PathEnsemble ens = sample_noncolliding(ProcessKind::bm(), nu_hat, {t}, opts, sde);
  return ensemble_expectation(ens, {{t}, [h](const Eigen::MatrixXd& x) {
                                      return indicator_product(x.row(0).transpose(), h);
                                    }});
}

ComplexEstimate reciprocal_cpr(const PointConfiguration& nu_hat, double t, double h, const McOptions& opts) {
  if (!(t > 0)) throw std::invalid_argument("reciprocal_cpr: t must be positive");
  const double tau = 1.0 / t, level = h / t;
  return cpr_expectation(ProcessKind::bm(), nu_hat,
                         {{tau}, [level](const Eigen::MatrixXd& x) {
                            return indicator_product(x.row(0).transpose(), level);
                          }},
                         opts);
}

}  // namespace detmart
