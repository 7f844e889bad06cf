#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "detmart/process.hpp"
#include "detmart/specfun.hpp"

namespace detmart {

struct Atom {
  double location = 0.0;
  int multiplicity = 1;
};

// Finite sum of point masses with positive integer multiplicities, kept
// sorted by location. Locations closer than kMergeTolerance are merged.
class PointConfiguration {
 public:
  static constexpr double kMergeTolerance = 1e-9;

  PointConfiguration() = default;
  explicit PointConfiguration(std::vector<Atom> atoms);
  static PointConfiguration from_locations(std::span<const double> locations);
  static PointConfiguration from_locations(std::initializer_list<double> locations) {
    return from_locations(std::span<const double>(locations.begin(), locations.size()));
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  int total() const;
  bool simple() const;
  bool empty() const { return atoms_.empty(); }

  Eigen::VectorXd support() const;
  Eigen::VectorXi multiplicities() const;
  // locations repeated by multiplicity, i.e. the starting vector u
  Eigen::VectorXd expanded() const;
  // index into support() of the atom within kMergeTolerance of u, or -1
  Eigen::Index find(double u) const;
  Eigen::Index index_of(double u) const;  // throws std::domain_error when absent
  int multiplicity_at(double u) const;
  PointConfiguration simple_part() const;

  friend bool operator==(const PointConfiguration& a, const PointConfiguration& b);

 private:
  std::vector<Atom> atoms_;
};

PointConfiguration shift(const PointConfiguration& xi, double u);
PointConfiguration dilate(const PointConfiguration& xi, double c);
PointConfiguration square(const PointConfiguration& xi);

// sum_{k in [-L, L]} delta_k and sum_{k <= K} delta_{j_{nu,k}^2}
PointConfiguration lattice_config(int L);
PointConfiguration besselzero_config(const specfun::BesselZeroTable& table);

// h(x) = prod_{j<k} (x_k - x_j)
template <typename Derived>
typename Derived::Scalar vandermonde(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  Scalar h(1);
  for (Eigen::Index k = 1; k < x.size(); ++k)
    for (Eigen::Index j = 0; j < k; ++j) h *= x(k) - x(j);
  return h;
}

// Lagrange basis polynomial of node k over the given distinct support
template <typename Scalar>
Scalar phi_simple(const Eigen::VectorXd& support, Eigen::Index k, const Scalar& z) {
  Scalar v(1);
  const double u = support(k);
  for (Eigen::Index r = 0; r < support.size(); ++r)
    if (r != k) v *= (z - support(r)) / (u - support(r));
  return v;
}

template <typename Scalar>
Scalar phi_simple(const PointConfiguration& xi, double u, const Scalar& z) {
  return phi_simple(xi.support(), xi.index_of(u), z);
}

// Monomial coefficients (ascending) of phi_simple(xi, u, .)
Eigen::VectorXd phi_coeffs(const PointConfiguration& xi, double u);

// Monomial coefficients (ascending, length total(xi)) of the two-time
// polynomial Phi^u((s,x); z), the residue at zeta = u of
//   p(s,x|zeta)/p(s,x|u) * 1/(z - zeta) * prod_r ((z - r)/(zeta - r))^{m_r}.
// Only BM and BESQ are supported.
Eigen::VectorXd phi_twotime_coeffs(const ProcessKind& kind, const PointConfiguration& xi, double u,
                                   double s, double x);
std::complex<double> phi_twotime(const ProcessKind& kind, const PointConfiguration& xi, double u,
                                 double s, double x, std::complex<double> z);

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double discrepancy = 0.0;  // |lhs - rhs| / max(1, |rhs|)
};

using PhiEvaluator = std::function<double(const Eigen::VectorXd& support, Eigen::Index k, double z)>;

// det[Phi^{u_k}(x_j)] against h(x)/h(u) for simple xi with total(xi) = x.size()
IdentityCheck det_phi_identity_check(const PointConfiguration& xi, const Eigen::VectorXd& x);
IdentityCheck det_phi_identity_check(const PointConfiguration& xi, const Eigen::VectorXd& x,
                                     const PhiEvaluator& phi);

}  // namespace detmart
