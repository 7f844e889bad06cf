#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "detmart/config.hpp"
#include "detmart/kernels.hpp"
#include "detmart/process.hpp"
#include "detmart/simulate.hpp"

namespace detmart {

// chi_t on a compact interval, or on finitely many lattice sites
class ChiFunction {
 public:
  enum class Kind { indicator, callable, sites };

  // chi = scale on [a, b], 0 elsewhere
  static ChiFunction indicator(double a, double b, double scale);
  static ChiFunction callable(double a, double b, std::function<double(double)> f);
  static ChiFunction sites(std::vector<std::pair<double, double>> values);
  static ChiFunction zero() { return sites({}); }

  double operator()(double y) const;
  Kind kind() const { return kind_; }
  bool discrete() const { return kind_ == Kind::sites; }
  double lower() const { return a_; }
  double upper() const { return b_; }
  double scale() const { return scale_; }
  const std::vector<std::pair<double, double>>& site_values() const { return sites_; }

 private:
  Kind kind_ = Kind::sites;
  double a_ = 0.0, b_ = 0.0, scale_ = 0.0;
  std::function<double(double)> f_;
  std::vector<std::pair<double, double>> sites_;
};

struct TestFunctionSpec {
  std::vector<double> times;
  std::vector<ChiFunction> chi;

  // times non-decreasing (repeats only with lattice chi), supports compact, chi > -1 on sites
  void validate() const;
  bool discrete() const;
};

struct FredholmOptions {
  int quad_order = 64;
  double order_tolerance = 1e-6;  // against the half-order value
  bool excess_block = false;      // also evaluate one N+1 block at the first time
};

struct FredholmResult {
  double value = 0.0;
  double order_change = 0.0;  // |value(q) - value(q/2)|, 0 for lattice chi
  double excess = 0.0;        // sum of (N+1)-point terms at the first time
  int truncation = 0;
  long terms = 0;             // principal minors summed
};

// Multi-sum expansion of Det[delta + K chi] with N_m <= N points per time
FredholmResult fredholm_expansion(const KernelFunction& k, int N, const TestFunctionSpec& spec,
                                  const FredholmOptions& opts = {});
FredholmResult fredholm_expansion(const CorrelationKernel& k, const TestFunctionSpec& spec,
                                  const FredholmOptions& opts = {});
double fredholm_series(const CorrelationKernel& k, const TestFunctionSpec& spec, int quad_order = 64);
double fredholm_series(const KernelFunction& k, int N, const TestFunctionSpec& spec, int quad_order = 64);

// det(I + A), A_jk = int chi(y) M^{u_j}(t, y) p(t, y | u_k) dy, single time
double finite_rank_det(const ProcessKind& kind, const PointConfiguration& xi, const TestFunctionSpec& spec,
                       int quad_order = 64);
double finite_rank_det(const CorrelationKernel& k, const TestFunctionSpec& spec, int quad_order = 64);

// E[prod_m prod_j (1 + chi_{t_m}(V_j(t_m))) D_xi(T, V(T))]
Estimate mgf_monte_carlo(const ProcessKind& kind, const PointConfiguration& xi, const TestFunctionSpec& spec,
                         const McOptions& opts, double T = -1.0);
// the same product as a path functional
PathFunctional mgf_functional(const TestFunctionSpec& spec);

}  // namespace detmart
