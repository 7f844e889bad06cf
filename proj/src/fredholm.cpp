#include "detmart/fredholm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/LU>

#include "detmart/errors.hpp"
#include "detmart/martingales.hpp"
#include "detmart/quadrature.hpp"

namespace detmart {

using Tag = ProcessKind::Tag;

ChiFunction ChiFunction::indicator(double a, double b, double scale) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("chi support must be [a, b], a < b");
  if (!(scale > -1.0)) throw std::invalid_argument("chi must exceed -1");
  ChiFunction c;
  c.kind_ = Kind::indicator;
  c.a_ = a;
  c.b_ = b;
  c.scale_ = scale;
  return c;
}

ChiFunction ChiFunction::callable(double a, double b, std::function<double(double)> f) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("chi support must be [a, b], a < b");
  ChiFunction c;
  c.kind_ = Kind::callable;
  c.a_ = a;
  c.b_ = b;
  c.f_ = std::move(f);
  return c;
}

ChiFunction ChiFunction::sites(std::vector<std::pair<double, double>> values) {
  std::sort(values.begin(), values.end());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i].second > -1.0)) throw std::invalid_argument("chi must exceed -1");
    if (i > 0 && values[i].first == values[i - 1].first) throw std::invalid_argument("repeated chi site");
  }
  ChiFunction c;
  c.kind_ = Kind::sites;
  c.sites_ = std::move(values);
  if (!c.sites_.empty()) {
    c.a_ = c.sites_.front().first;
    c.b_ = c.sites_.back().first;
  }
  return c;
}

double ChiFunction::operator()(double y) const {
  switch (kind_) {
    case Kind::indicator: return (y >= a_ && y <= b_) ? scale_ : 0.0;
    case Kind::callable: return (y >= a_ && y <= b_) ? f_(y) : 0.0;
    case Kind::sites: {
      auto it = std::lower_bound(sites_.begin(), sites_.end(), y,
                                 [](const std::pair<double, double>& p, double v) { return p.first < v; });
      return (it != sites_.end() && it->first == y) ? it->second : 0.0;
    }
  }
  return 0.0;
}

bool TestFunctionSpec::discrete() const {
  return std::all_of(chi.begin(), chi.end(), [](const ChiFunction& c) { return c.discrete(); });
}

void TestFunctionSpec::validate() const {
  if (times.size() != chi.size()) throw std::invalid_argument("test function: one chi per time");
  for (std::size_t m = 0; m < times.size(); ++m) {
    if (!(times[m] > 0) || !std::isfinite(times[m])) throw std::invalid_argument("test function: times must be positive");
    if (m > 0 && times[m] < times[m - 1]) throw std::invalid_argument("test function: times must be non-decreasing");
    if (m > 0 && times[m] == times[m - 1] && !(chi[m].discrete() && chi[m - 1].discrete()))
      throw std::invalid_argument("test function: repeated times need lattice chi");
  }
}

namespace {

struct Node {
  int block;
  double x;
  double weight;  // quadrature weight times chi
};

std::vector<Node> discretize(const TestFunctionSpec& spec, int order) {
  std::vector<Node> nodes;
  const quad::Rule<double> rule = quad::gauss_legendre<double>(order);
  for (std::size_t m = 0; m < spec.chi.size(); ++m) {
    const ChiFunction& c = spec.chi[m];
    if (c.discrete()) {
      for (const auto& [x, v] : c.site_values())
        if (v != 0.0) nodes.push_back({int(m), x, v});
      continue;
    }
    const double h = (c.upper() - c.lower()) / 2, mid = (c.upper() + c.lower()) / 2;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double x = mid + h * rule.nodes[i];
      const double v = c(x);
      if (!(v > -1.0)) throw std::invalid_argument("chi must exceed -1");
      nodes.push_back({int(m), x, h * rule.weights[i] * v});
    }
  }
  return nodes;
}

Eigen::MatrixXd weighted_kernel(const KernelFunction& k, const TestFunctionSpec& spec, const std::vector<Node>& nodes) {
  const Eigen::Index n = Eigen::Index(nodes.size());
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const Node &p = nodes[std::size_t(i)], &q = nodes[std::size_t(j)];
      const double s = spec.times[std::size_t(p.block)], t = spec.times[std::size_t(q.block)];
      double v = k(s, p.x, t, q.x);
      // a repeated time listed later acts as the later copy: -1(s > t) p(0, x|y) = -delta
      if (s == t && p.block > q.block && p.x == q.x) v -= 1.0;
      a(i, j) = v * q.weight;
    }
  return a;
}

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

void subsets_upto(const std::vector<int>& pool, int kmax, std::vector<std::vector<int>>& out) {
  out.clear();
  out.push_back({});
  std::vector<int> cur;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (int(cur.size()) == kmax) return;
    for (std::size_t i = start; i < pool.size(); ++i) {
      cur.push_back(pool[i]);
      out.push_back(cur);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
}

double principal_minor(const Eigen::MatrixXd& a, const std::vector<int>& idx) {
  const Eigen::Index n = Eigen::Index(idx.size());
  if (n == 0) return 1.0;
  if (n == 1) return a(idx[0], idx[0]);
  Eigen::MatrixXd s(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) s(i, j) = a(idx[std::size_t(i)], idx[std::size_t(j)]);
  if (n == 2) return s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
  return s.partialPivLu().determinant();
}

constexpr double kMaxTerms = 5e7;

// sum of principal minors with at most N indices from each block
std::pair<double, long> truncated_sum(const Eigen::MatrixXd& a, const std::vector<Node>& nodes, int blocks, int N) {
  std::vector<std::vector<int>> pools(static_cast<std::size_t>(blocks));
  for (std::size_t i = 0; i < nodes.size(); ++i) pools[std::size_t(nodes[i].block)].push_back(int(i));
  double count = 1.0;
  for (const auto& p : pools) {
    double c = 0.0;
    for (int k = 0; k <= N; ++k) c += binom(int(p.size()), k);
    count *= c;
  }
  if (count > kMaxTerms) throw CapacityError("fredholm expansion: too many terms, lower the quadrature order");

  std::vector<std::vector<std::vector<int>>> subs(static_cast<std::size_t>(blocks));
  for (int m = 0; m < blocks; ++m) subsets_upto(pools[std::size_t(m)], N, subs[std::size_t(m)]);

  long double sum = 0.0L;
  long terms = 0;
  std::vector<std::size_t> pos(static_cast<std::size_t>(blocks), 0);
  std::vector<int> idx;
  while (true) {
    idx.clear();
    for (int m = 0; m < blocks; ++m) {
      const auto& s = subs[std::size_t(m)][pos[std::size_t(m)]];
      idx.insert(idx.end(), s.begin(), s.end());
    }
    sum += principal_minor(a, idx);
    ++terms;
    int m = blocks - 1;
    while (m >= 0 && ++pos[std::size_t(m)] == subs[std::size_t(m)].size()) pos[std::size_t(m--)] = 0;
    if (m < 0) break;
  }
  return {double(sum), terms};
}

double excess_block(const Eigen::MatrixXd& a, const std::vector<Node>& nodes, int N) {
  std::vector<int> pool;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].block == 0) pool.push_back(int(i));
  if (binom(int(pool.size()), N + 1) > kMaxTerms) throw CapacityError("fredholm expansion: excess block too large");
  long double sum = 0.0L;
  std::vector<int> cur;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (int(cur.size()) == N + 1) {
      sum += principal_minor(a, cur);
      return;
    }
    for (std::size_t i = start; i < pool.size(); ++i) {
      cur.push_back(pool[i]);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return double(sum);
}

int kernel_rank(const CorrelationKernel& k) {
  switch (k.variant()) {
    case KernelVariant::general:
    case KernelVariant::rw:
    case KernelVariant::multipoint: return k.xi().total();
    case KernelVariant::extended_hermite:
    case KernelVariant::extended_laguerre: return k.order();
    default: break;
  }
  throw std::invalid_argument("fredholm expansion needs a finite-rank kernel");
}

}  // namespace

FredholmResult fredholm_expansion(const KernelFunction& k, int N, const TestFunctionSpec& spec,
                                  const FredholmOptions& opts) {
  spec.validate();
  if (N < 0) throw std::invalid_argument("fredholm expansion: negative truncation");
  if (opts.quad_order < 2) throw std::invalid_argument("fredholm expansion: quadrature order must be at least 2");
  const int blocks = int(spec.times.size());
  FredholmResult r;
  r.truncation = N;

  const std::vector<Node> nodes = discretize(spec, opts.quad_order);
  const Eigen::MatrixXd a = weighted_kernel(k, spec, nodes);
  std::tie(r.value, r.terms) = truncated_sum(a, nodes, blocks, N);
  if (opts.excess_block && blocks > 0) r.excess = excess_block(a, nodes, N);

  if (!spec.discrete()) {
    const std::vector<Node> coarse = discretize(spec, opts.quad_order / 2);
    const double v2 = truncated_sum(weighted_kernel(k, spec, coarse), coarse, blocks, N).first;
    r.order_change = std::abs(r.value - v2);
    if (r.order_change > opts.order_tolerance)
      throw NumericError("fredholm expansion: quadrature order too low, value moved by " +
                         std::to_string(r.order_change));
  }
  return r;
}

FredholmResult fredholm_expansion(const CorrelationKernel& k, const TestFunctionSpec& spec,
                                  const FredholmOptions& opts) {
  return fredholm_expansion([&](double s, double x, double t, double y) { return k(s, x, t, y); }, kernel_rank(k),
                            spec, opts);
}

double fredholm_series(const CorrelationKernel& k, const TestFunctionSpec& spec, int quad_order) {
  return fredholm_expansion(k, spec, {quad_order}).value;
}

double fredholm_series(const KernelFunction& k, int N, const TestFunctionSpec& spec, int quad_order) {
  return fredholm_expansion(k, N, spec, {quad_order}).value;
}

double finite_rank_det(const ProcessKind& kind, const PointConfiguration& xi, const TestFunctionSpec& spec,
                       int quad_order) {
  spec.validate();
  if (spec.times.size() != 1) throw std::invalid_argument("finite_rank_det: single time only");
  if (xi.empty() || !xi.simple()) throw std::invalid_argument("finite_rank_det: configuration must be simple");
  const double t = spec.times[0];
  const Eigen::VectorXd u = xi.expanded();
  const Eigen::Index n = u.size();

  const bool bes = kind.tag == Tag::BES;
  const ProcessKind inner = bes ? ProcessKind::besq(kind.nu) : kind;
  const PointConfiguration inner_xi = bes ? square(xi) : xi;
  std::vector<MartingaleTransform> tr;
  for (Eigen::Index k = 0; k < n; ++k) tr.emplace_back(inner, inner_xi, bes ? u(k) * u(k) : u(k));

  const std::vector<Node> nodes = discretize(spec, quad_order);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const Node& nd : nodes) {
    const double y = bes ? nd.x * nd.x : nd.x;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double mj = tr[std::size_t(j)](t, y);
      for (Eigen::Index k = 0; k < n; ++k) a(j, k) += nd.weight * mj * specfun::transition_density(kind, t, nd.x, u(k));
    }
  }
  return (Eigen::MatrixXd::Identity(n, n) + a).partialPivLu().determinant();
}

double finite_rank_det(const CorrelationKernel& k, const TestFunctionSpec& spec, int quad_order) {
  if (k.variant() != KernelVariant::general && k.variant() != KernelVariant::rw)
    throw std::invalid_argument("finite_rank_det: general or RW kernel required");
  return finite_rank_det(k.process(), k.xi(), spec, quad_order);
}

PathFunctional mgf_functional(const TestFunctionSpec& spec) {
  spec.validate();
  return {spec.times, [spec](const Eigen::MatrixXd& x) {
            double v = 1.0;
            for (Eigen::Index m = 0; m < x.rows(); ++m)
              for (Eigen::Index j = 0; j < x.cols(); ++j) v *= 1.0 + spec.chi[std::size_t(m)](x(m, j));
            return v;
          }};
}

Estimate mgf_monte_carlo(const ProcessKind& kind, const PointConfiguration& xi, const TestFunctionSpec& spec,
                         const McOptions& opts, double T) {
  return dmr_expectation(kind, xi, mgf_functional(spec), opts, T);
}

}  // namespace detmart
