#include "detmart/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/LU>

#include "detmart/errors.hpp"

namespace detmart {

using cplx = std::complex<double>;

PointConfiguration::PointConfiguration(std::vector<Atom> atoms) {
  for (const Atom& a : atoms) {
    if (a.multiplicity < 1) throw std::invalid_argument("atom multiplicity must be a positive integer");
    if (!std::isfinite(a.location)) throw std::invalid_argument("atom location must be finite");
  }
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.location < b.location; });
  for (const Atom& a : atoms) {
    if (!atoms_.empty() && a.location - atoms_.back().location < kMergeTolerance)
      atoms_.back().multiplicity += a.multiplicity;
    else
      atoms_.push_back(a);
  }
}

PointConfiguration PointConfiguration::from_locations(std::span<const double> locations) {
  std::vector<Atom> atoms;
  atoms.reserve(locations.size());
  for (double x : locations) atoms.push_back({x, 1});
  return PointConfiguration(std::move(atoms));
}

int PointConfiguration::total() const {
  int n = 0;
  for (const Atom& a : atoms_) n += a.multiplicity;
  return n;
}

bool PointConfiguration::simple() const {
  return std::all_of(atoms_.begin(), atoms_.end(), [](const Atom& a) { return a.multiplicity == 1; });
}

Eigen::VectorXd PointConfiguration::support() const {
  Eigen::VectorXd s(atoms_.size());
  for (std::size_t i = 0; i < atoms_.size(); ++i) s(i) = atoms_[i].location;
  return s;
}

Eigen::VectorXi PointConfiguration::multiplicities() const {
  Eigen::VectorXi m(atoms_.size());
  for (std::size_t i = 0; i < atoms_.size(); ++i) m(i) = atoms_[i].multiplicity;
  return m;
}

Eigen::VectorXd PointConfiguration::expanded() const {
  Eigen::VectorXd u(total());
  Eigen::Index i = 0;
  for (const Atom& a : atoms_)
    for (int k = 0; k < a.multiplicity; ++k) u(i++) = a.location;
  return u;
}

Eigen::Index PointConfiguration::find(double u) const {
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    if (std::abs(atoms_[i].location - u) < kMergeTolerance) return static_cast<Eigen::Index>(i);
  return -1;
}

Eigen::Index PointConfiguration::index_of(double u) const {
  const Eigen::Index i = find(u);
  if (i < 0) throw std::domain_error("point " + std::to_string(u) + " is not in the support of xi");
  return i;
}

int PointConfiguration::multiplicity_at(double u) const {
  const Eigen::Index i = find(u);
  return i < 0 ? 0 : atoms_[i].multiplicity;
}

PointConfiguration PointConfiguration::simple_part() const {
  std::vector<Atom> a;
  for (const Atom& x : atoms_) a.push_back({x.location, 1});
  return PointConfiguration(std::move(a));
}

bool operator==(const PointConfiguration& a, const PointConfiguration& b) {
  if (a.atoms_.size() != b.atoms_.size()) return false;
  for (std::size_t i = 0; i < a.atoms_.size(); ++i)
    if (a.atoms_[i].location != b.atoms_[i].location || a.atoms_[i].multiplicity != b.atoms_[i].multiplicity)
      return false;
  return true;
}

PointConfiguration shift(const PointConfiguration& xi, double u) {
  std::vector<Atom> a = xi.atoms();
  for (Atom& x : a) x.location += u;
  return PointConfiguration(std::move(a));
}

PointConfiguration dilate(const PointConfiguration& xi, double c) {
  if (!(c > 0)) throw std::domain_error("dilation factor must be positive");
  std::vector<Atom> a = xi.atoms();
  for (Atom& x : a) x.location *= c;
  return PointConfiguration(std::move(a));
}

PointConfiguration square(const PointConfiguration& xi) {
  std::vector<Atom> a = xi.atoms();
  for (Atom& x : a) {
    if (x.location < 0) throw std::domain_error("square requires a configuration on [0, inf)");
    x.location *= x.location;
  }
  return PointConfiguration(std::move(a));
}

PointConfiguration lattice_config(int L) {
  if (L < 0) throw std::invalid_argument("lattice_config: negative window");
  std::vector<Atom> a;
  for (int k = -L; k <= L; ++k) a.push_back({double(k), 1});
  return PointConfiguration(std::move(a));
}

PointConfiguration besselzero_config(const specfun::BesselZeroTable& table) {
  std::vector<Atom> a;
  for (double j : table.zeros) a.push_back({j * j, 1});
  return PointConfiguration(std::move(a));
}

Eigen::VectorXd phi_coeffs(const PointConfiguration& xi, double u) {
  if (!xi.simple()) throw std::invalid_argument("phi_coeffs requires a simple configuration");
  const Eigen::VectorXd x = xi.support();
  const Eigen::Index k = xi.index_of(u);
  const Eigen::Index n = x.size();
  // divided differences of the Kronecker data e_k
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  c(k) = 1.0;
  for (Eigen::Index j = 1; j < n; ++j)
    for (Eigen::Index i = n - 1; i >= j; --i) c(i) = (c(i) - c(i - 1)) / (x(i) - x(i - j));
  // Newton form to monomials, innermost first
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  p(0) = c(n - 1);
  for (Eigen::Index i = n - 2; i >= 0; --i) {
    // p <- p * (z - x_i) + c_i
    for (Eigen::Index d = n - 1; d >= 1; --d) p(d) = p(d - 1) - x(i) * p(d);
    p(0) = -x(i) * p(0) + c(i);
  }
  return p;
}

namespace {

// ascending coefficients of prod_r (z - r)^{m_r}
Eigen::VectorXd node_polynomial(const PointConfiguration& xi) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(xi.total() + 1);
  p(0) = 1.0;
  int deg = 0;
  for (const Atom& a : xi.atoms())
    for (int m = 0; m < a.multiplicity; ++m) {
      ++deg;
      for (int d = deg; d >= 1; --d) p(d) = p(d - 1) - a.location * p(d);
      p(0) *= -a.location;
    }
  return p;
}

struct ContourPass {
  Eigen::VectorXcd value;
  Eigen::VectorXd scale;  // max |integrand| * rho over the nodes
};

}  // namespace

Eigen::VectorXd phi_twotime_coeffs(const ProcessKind& kind, const PointConfiguration& xi, double u,
                                   double s, double x) {
  if (kind.tag != ProcessKind::Tag::BM && kind.tag != ProcessKind::Tag::BESQ)
    throw std::invalid_argument("two-time transform is only available for BM and BESQ");
  if (!(s > 0)) throw std::domain_error("phi_twotime requires s > 0");
  const Eigen::Index iu = xi.index_of(u);
  const Eigen::VectorXd supp = xi.support();
  const Eigen::VectorXi mult = xi.multiplicities();
  const int n = xi.total();
  const Eigen::VectorXd p = node_polynomial(xi);
  u = supp(iu);

  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index r = 0; r < supp.size(); ++r)
    if (r != iu) gap = std::min(gap, std::abs(supp(r) - u));
  const double rho_max = std::min(0.5 * gap, 1.0);

  auto pass = [&](double rho, int K) {
    ContourPass out{Eigen::VectorXcd::Zero(n), Eigen::VectorXd::Zero(n)};
    Eigen::VectorXcd q(n);
    for (int k = 0; k < K; ++k) {
      const double th = 2.0 * std::numbers::pi * k / K;
      const cplx e(std::cos(th), std::sin(th));
      const cplx zeta = u + rho * e;
      cplx g = specfun::density_ratio(kind, s, x, zeta, u) * rho * e;
      for (Eigen::Index r = 0; r < supp.size(); ++r) g /= std::pow(zeta - supp(r), mult(r));
      // Q_i(zeta) = sum_{j>i} p_j zeta^{j-1-i}, built from the top down
      cplx acc = 0.0;
      for (int i = n - 1; i >= 0; --i) {
        acc = acc * zeta + p(i + 1);
        q(i) = acc;
      }
      for (int i = 0; i < n; ++i) {
        const cplx w = g * q(i);
        out.value(i) += w;
        out.scale(i) = std::max(out.scale(i), std::abs(w));
      }
    }
    out.value /= double(K);
    return out;
  };

  constexpr int kRadii = 13;
  Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd best_scale = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  const double eps = std::numeric_limits<double>::epsilon();
  for (int j = 0; j < kRadii; ++j) {
    const double rho = rho_max * std::ldexp(1.0, -j);
    ContourPass lo = pass(rho, 64);
    ContourPass hi = pass(rho, 128);
    for (int i = 0; i < n; ++i) {
      const double a = hi.value(i).real();
      const double diff = std::abs(hi.value(i) - lo.value(i));
      if (diff > 1e-10 * std::max(1.0, std::abs(a)) + 1e3 * eps * hi.scale(i)) continue;
      if (hi.scale(i) < best_scale(i)) {
        best_scale(i) = hi.scale(i);
        best(i) = a;
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(best_scale(i))) continue;
    // no radius settled at K = 128: keep doubling at the largest radius
    cplx prev = pass(rho_max, 128).value(i);
    bool ok = false;
    for (int K = 256; K <= 1024; K *= 2) {
      const cplx cur = pass(rho_max, K).value(i);
      if (std::abs(cur - prev) <= 1e-8 * std::max(1.0, std::abs(cur))) {
        best(i) = cur.real();
        ok = true;
        break;
      }
      prev = cur;
    }
    if (!ok) throw NumericError("phi_twotime: contour residue did not converge by K = 1024");
  }
  return best;
}

cplx phi_twotime(const ProcessKind& kind, const PointConfiguration& xi, double u, double s, double x, cplx z) {
  const Eigen::VectorXd a = phi_twotime_coeffs(kind, xi, u, s, x);
  cplx v = 0.0;
  for (Eigen::Index i = a.size() - 1; i >= 0; --i) v = v * z + a(i);
  return v;
}

IdentityCheck det_phi_identity_check(const PointConfiguration& xi, const Eigen::VectorXd& x) {
  return det_phi_identity_check(xi, x, [](const Eigen::VectorXd& supp, Eigen::Index k, double z) {
    return phi_simple(supp, k, z);
  });
}

IdentityCheck det_phi_identity_check(const PointConfiguration& xi, const Eigen::VectorXd& x,
                                     const PhiEvaluator& phi) {
  if (!xi.simple()) throw std::invalid_argument("identity check requires a simple configuration");
  const Eigen::VectorXd u = xi.support();
  if (u.size() != x.size()) throw std::invalid_argument("identity check: size of x must equal total(xi)");
  const Eigen::Index n = x.size();
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) a(j, k) = phi(u, k, x(j));
  IdentityCheck c;
  c.lhs = n == 0 ? 1.0 : a.partialPivLu().determinant();
  c.rhs = vandermonde(x) / vandermonde(u);
  c.discrepancy = std::abs(c.lhs - c.rhs) / std::max(1.0, std::abs(c.rhs));
  return c;
}

}  // namespace detmart
