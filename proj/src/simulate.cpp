#include "detmart/simulate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <Eigen/LU>

#include "detmart/errors.hpp"
#include "detmart/martingales.hpp"

namespace detmart {

using cplx = std::complex<double>;
using Tag = ProcessKind::Tag;

namespace {

// separate stream families per path: paths, CPR imaginary parts
constexpr std::uint64_t kImagStream = std::uint64_t(1) << 62;
constexpr std::uint64_t kSubsetStream = std::uint64_t(1) << 61;

constexpr double kTimeMatch = 1e-12;

bool is_integer(double t) { return std::abs(t - std::round(t)) < kTimeMatch; }

std::vector<double> merged_grid(const std::vector<double>& times, double T) {
  std::vector<double> g = times;
  g.push_back(T);
  std::sort(g.begin(), g.end());
  std::vector<double> out;
  for (double t : g)
    if (out.empty() || t - out.back() > kTimeMatch) out.push_back(t);
  return out;
}

std::vector<std::size_t> locate(const std::vector<double>& grid, const std::vector<double>& times) {
  std::vector<std::size_t> idx;
  idx.reserve(times.size());
  for (double t : times) {
    auto it = std::find_if(grid.begin(), grid.end(), [&](double g) { return std::abs(g - t) <= kTimeMatch; });
    if (it == grid.end()) throw std::invalid_argument("functional time not on the sampling grid");
    idx.push_back(std::size_t(it - grid.begin()));
  }
  return idx;
}

void check_times(const ProcessKind& kind, const std::vector<double>& times) {
  for (std::size_t m = 0; m < times.size(); ++m) {
    if (!(times[m] >= 0)) throw std::invalid_argument("sampling times must be non-negative");
    if (m > 0 && !(times[m] > times[m - 1])) throw std::invalid_argument("sampling times must be increasing");
    if (kind.tag == Tag::RW && !is_integer(times[m])) throw std::invalid_argument("RW times must be integers");
  }
}

void check_start(const ProcessKind& kind, const Eigen::VectorXd& u) {
  for (double x : u) {
    if (!std::isfinite(x)) throw std::invalid_argument("starting point must be finite");
    if ((kind.tag == Tag::BESQ || kind.tag == Tag::BES) && x < 0)
      throw std::invalid_argument("BESQ/BES starting points must be non-negative");
    if (kind.tag == Tag::RW && !is_integer(x)) throw std::invalid_argument("RW starting points must be integers");
  }
}

Eigen::MatrixXd rows_at(const Eigen::MatrixXd& path, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(rows.size(), path.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(Eigen::Index(i)) = path.row(Eigen::Index(rows[i]));
  return out;
}

// martingale maps in the coordinates where polynomial martingales exist
struct DetWeight {
  ProcessKind kind;  // BES replaced by BESQ
  bool squared = false;
  std::vector<MartingaleTransform> transforms;

  DetWeight(const ProcessKind& k, const PointConfiguration& xi, const Eigen::VectorXd& starts) {
    PointConfiguration x = xi;
    kind = k;
    if (k.tag == Tag::BES) {
      for (const Atom& a : xi.atoms())
        if (a.location < 0) throw std::invalid_argument("BES configuration must be non-negative");
      kind = ProcessKind::besq(k.nu);
      x = square(xi);
      squared = true;
    }
    for (double u : starts) transforms.emplace_back(kind, x, squared ? u * u : u);
  }

  double operator()(double T, const Eigen::VectorXd& v) const {
    const Eigen::Index n = v.size();
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double y = squared ? v(j) * v(j) : v(j);
      for (Eigen::Index k = 0; k < n; ++k) m(j, k) = transforms[std::size_t(k)](T, y);
    }
    if (n == 0) return 1.0;
    return m.partialPivLu().determinant();
  }
};

void require_simple(const PointConfiguration& xi, const char* who) {
  if (xi.empty()) throw std::invalid_argument(std::string(who) + ": empty configuration");
  if (!xi.simple()) throw std::invalid_argument(std::string(who) + ": configuration must be simple");
}

double horizon(const PathFunctional& F, double T) {
  const double tl = F.last_time();
  if (T < 0) return tl;
  if (T + kTimeMatch < tl) throw std::invalid_argument("horizon precedes the last observation time");
  return T;
}

void sample_rw_steps(double& x, long steps, RandomStream& rng) {
  while (steps > 0) {
    const int take = int(std::min<long>(steps, 64));
    std::uint64_t bits = rng();
    if (take < 64) bits &= (std::uint64_t(1) << take) - 1;
    const int up = std::popcount(bits);
    x += 2.0 * up - take;
    steps -= take;
  }
}

// combinations of n choose k in lexicographic order
std::vector<std::vector<int>> subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> c(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) c[std::size_t(i)] = i;
  if (k > n) return out;
  while (true) {
    out.push_back(c);
    int i = k - 1;
    while (i >= 0 && c[std::size_t(i)] == n - k + i) --i;
    if (i < 0) break;
    ++c[std::size_t(i)];
    for (int j = i + 1; j < k; ++j) c[std::size_t(j)] = c[std::size_t(j - 1)] + 1;
  }
  return out;
}

Eigen::MatrixXd columns(const Eigen::MatrixXd& x, const std::vector<int>& cols) {
  Eigen::MatrixXd out(x.rows(), Eigen::Index(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(Eigen::Index(c)) = x.col(cols[c]);
  return out;
}

// all free-walk step sequences from u over T steps; visit(path, weight)
template <typename Visit>
void enumerate_rw(const Eigen::VectorXd& u, int T, Visit&& visit) {
  const int n = int(u.size());
  const int bits = n * T;
  if (bits > 24) throw CapacityError("RW enumeration limited to N*T <= 24");
  const double w = std::ldexp(1.0, -bits);
  Eigen::MatrixXd path(T + 1, n);
  const std::uint64_t total = std::uint64_t(1) << bits;
  for (std::uint64_t code = 0; code < total; ++code) {
    for (int j = 0; j < n; ++j) {
      double x = u(j);
      path(0, j) = x;
      for (int s = 0; s < T; ++s) {
        x += ((code >> (j * T + s)) & 1) ? 1.0 : -1.0;
        path(s + 1, j) = x;
      }
    }
    visit(path, w);
  }
}

std::vector<std::size_t> rw_rows(const PathFunctional& F, int T) {
  std::vector<std::size_t> rows;
  for (double t : F.times) {
    if (!is_integer(t) || t < 0 || t > T + kTimeMatch)
      throw std::invalid_argument("RW functional times must be integers in [0, T]");
    rows.push_back(std::size_t(std::lround(t)));
  }
  return rows;
}

}  // namespace

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

Estimate make_estimate(const std::vector<double>& samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("estimate needs at least two samples");
  const double mean = pairwise_sum(samples.data(), n) / double(n);
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = (samples[i] - mean) * (samples[i] - mean);
  const double var = pairwise_sum(dev.data(), n) / double(n - 1);
  return {mean, std::sqrt(var / double(n)), long(n)};
}

ComplexEstimate make_estimate(const std::vector<cplx>& samples) {
  std::vector<double> re(samples.size()), im(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    re[i] = samples[i].real();
    im[i] = samples[i].imag();
  }
  const Estimate a = make_estimate(re), b = make_estimate(im);
  return {cplx(a.mean, b.mean), a.std_error, b.std_error, a.n};
}

double z_score(const Estimate& a, const Estimate& b) {
  const double se = std::hypot(a.std_error, b.std_error);
  const double d = std::abs(a.mean - b.mean);
  if (se == 0) return d == 0 ? 0.0 : INFINITY;
  return d / se;
}

double z_score(const Estimate& a, double exact) { return z_score(a, Estimate{exact, 0.0, 0}); }

void parallel_for(long n, int workers, const std::function<void(long)>& body) {
  if (n <= 0) return;
  long w = workers > 0 ? workers : long(std::max(1u, std::thread::hardware_concurrency()));
  w = std::min(w, n);
  if (w == 1) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  const long block = (n + w - 1) / w;
  for (long b = 0; b < w; ++b) {
    const long lo = b * block, hi = std::min(n, lo + block);
    pool.emplace_back([&, lo, hi] {
      try {
        for (long i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

double PathFunctional::last_time() const {
  if (times.empty()) return 0.0;
  return *std::max_element(times.begin(), times.end());
}

Eigen::MatrixXd PathEnsemble::path(long p) const {
  Eigen::MatrixXd x(Eigen::Index(times.size()), n_particles);
  for (std::size_t m = 0; m < times.size(); ++m)
    for (int j = 0; j < n_particles; ++j) x(Eigen::Index(m), j) = state(p, m, j);
  return x;
}

Eigen::MatrixXd sample_free_path(const ProcessKind& kind, const Eigen::VectorXd& u, const std::vector<double>& times,
                                 RandomStream& rng) {
  const Eigen::Index n = u.size();
  Eigen::MatrixXd out(Eigen::Index(times.size()), n);
  // particle-major draw order, so a prefix of particles reproduces a smaller system
  for (Eigen::Index j = 0; j < n; ++j) {
    double t0 = 0.0;
    double x = kind.tag == Tag::BES ? u(j) * u(j) : u(j);
    for (std::size_t m = 0; m < times.size(); ++m) {
      const double dt = times[m] - t0;
      if (dt > 0) {
        switch (kind.tag) {
          case Tag::BM: x += std::sqrt(dt) * rng.normal(); break;
          case Tag::BESQ:
          case Tag::BES: {
            const long long k = rng.poisson(x / (2.0 * dt));
            x = 2.0 * dt * rng.gamma(kind.nu + 1.0 + double(k));
            break;
          }
          case Tag::RW: sample_rw_steps(x, std::lround(dt), rng); break;
        }
      }
      out(Eigen::Index(m), j) = kind.tag == Tag::BES ? std::sqrt(x) : x;
      t0 = times[m];
    }
  }
  return out;
}

PathEnsemble sample_free(const ProcessKind& kind, const Eigen::VectorXd& u, const std::vector<double>& times,
                         const McOptions& opts) {
  check_times(kind, times);
  check_start(kind, u);
  if (opts.n_paths < 2) throw std::invalid_argument("sample_free: need at least two paths");
  PathEnsemble ens;
  ens.process = kind;
  ens.times = times;
  ens.n_paths = opts.n_paths;
  ens.n_particles = int(u.size());
  ens.seed = opts.seed;
  ens.states.resize(std::size_t(opts.n_paths) * times.size() * std::size_t(u.size()));
  parallel_for(opts.n_paths, opts.workers, [&](long p) {
    RandomStream rng(opts.seed, std::uint64_t(p));
    const Eigen::MatrixXd x = sample_free_path(kind, u, times, rng);
    for (std::size_t m = 0; m < times.size(); ++m)
      for (int j = 0; j < ens.n_particles; ++j) ens.states[ens.index(p, m, j)] = x(Eigen::Index(m), j);
  });
  return ens;
}

PathEnsemble attach_companions(PathEnsemble ens, std::uint64_t seed2, int workers) {
  ens.companion_seed = seed2;
  ens.companions.assign(ens.states.size(), 0.0);
  const bool rw = ens.process.tag == Tag::RW;
  parallel_for(ens.n_paths, workers, [&](long p) {
    RandomStream rng(seed2, std::uint64_t(p));
    for (int j = 0; j < ens.n_particles; ++j) {
      double t0 = 0.0, w = 0.0;
      for (std::size_t m = 0; m < ens.times.size(); ++m) {
        const double dt = ens.times[m] - t0;
        if (dt > 0) {
          // W(C(t)): Brownian increment over the random clock increment
          const double var = rw ? sample_ctime(dt, rng) : dt;
          w += std::sqrt(var) * rng.normal();
        }
        ens.companions[ens.index(p, m, j)] = w;
        t0 = ens.times[m];
      }
    }
  });
  return ens;
}

double determinantal_martingale(const ProcessKind& kind, const PointConfiguration& xi, double T,
                                const Eigen::VectorXd& v) {
  require_simple(xi, "determinantal_martingale");
  if (v.size() != xi.total()) throw std::invalid_argument("determinantal_martingale: size mismatch");
  return DetWeight(kind, xi, xi.expanded())(T, v);
}

Estimate dmr_expectation(const ProcessKind& kind, const PointConfiguration& xi, const PathFunctional& F,
                         const McOptions& opts, double T) {
  require_simple(xi, "dmr_expectation");
  if (xi.total() > 8) throw CapacityError("dmr_expectation: at most 8 particles");
  T = horizon(F, T);
  const Eigen::VectorXd u = xi.expanded();
  check_start(kind, u);
  const std::vector<double> grid = merged_grid(F.times, T);
  check_times(kind, grid);
  const std::vector<std::size_t> rows = locate(grid, F.times);
  const DetWeight weight(kind, xi, u);
  std::vector<double> vals(std::size_t(opts.n_paths));
  parallel_for(opts.n_paths, opts.workers, [&](long p) {
    RandomStream rng(opts.seed, std::uint64_t(p));
    const Eigen::MatrixXd x = sample_free_path(kind, u, grid, rng);
    const Eigen::VectorXd vT = x.row(x.rows() - 1).transpose();
    vals[std::size_t(p)] = F(rows_at(x, rows)) * weight(T, vT);
  });
  return make_estimate(vals);
}

cplx cpr_weight(const ProcessKind& kind, const PointConfiguration& xi, double u, double T, cplx z) {
  const Eigen::VectorXd sup = xi.support();
  const Eigen::Index k = xi.index_of(u);
  switch (kind.tag) {
    case Tag::BM:
    case Tag::RW: return phi_simple(sup, k, z);
    case Tag::BES: {
      const double n = kind.nu - 0.5;
      if (n < 0 || std::abs(n - std::round(n)) > 1e-12)
        throw std::invalid_argument("CPR for BES needs index n + 1/2");
      cplx v(1.0);
      const double uu = sup(k) * sup(k);
      for (Eigen::Index r = 0; r < sup.size(); ++r)
        if (r != k) v *= (z * z - sup(r) * sup(r)) / (uu - sup(r) * sup(r));
      return bes_q_factor(int(std::lround(n)), T, z) * v;
    }
    case Tag::BESQ: break;
  }
  throw std::invalid_argument("CPR is available for BM, BES(n+1/2) and RW");
}

ComplexEstimate cpr_expectation(const ProcessKind& kind, const PointConfiguration& xi, const PathFunctional& F,
                                const McOptions& opts, double T) {
  require_simple(xi, "cpr_expectation");
  if (xi.total() > 8) throw CapacityError("cpr_expectation: at most 8 particles");
  T = horizon(F, T);
  if (!(T > 0)) throw std::domain_error("cpr_expectation: horizon must be positive");
  const Eigen::VectorXd u = xi.expanded();
  check_start(kind, u);
  if (kind.tag == Tag::BES)
    for (double x : u)
      if (!(x > 0)) throw std::invalid_argument("CPR for BES needs a positive configuration");
  cpr_weight(kind, xi, u(0), T, cplx(1.0, 0.0));  // validates the process
  const std::vector<double> grid = merged_grid(F.times, T);
  check_times(kind, grid);
  const std::vector<std::size_t> rows = locate(grid, F.times);
  const Eigen::Index n = u.size();
  std::vector<cplx> vals(std::size_t(opts.n_paths));
  parallel_for(opts.n_paths, opts.workers, [&](long p) {
    RandomStream rng(opts.seed, std::uint64_t(p));
    const Eigen::MatrixXd x = sample_free_path(kind, u, grid, rng);
    RandomStream irng(opts.seed, std::uint64_t(p) | kImagStream);
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double var = kind.tag == Tag::RW ? sample_ctime(T, irng) : T;
      const cplx z(x(x.rows() - 1, j), std::sqrt(var) * irng.normal());
      for (Eigen::Index k = 0; k < n; ++k) m(j, k) = cpr_weight(kind, xi, u(k), T, z);
    }
    vals[std::size_t(p)] = F(rows_at(x, rows)) * m.partialPivLu().determinant();
  });
  return make_estimate(vals);
}

PathEnsemble sample_noncolliding_rw(const PointConfiguration& xi, const std::vector<double>& times,
                                    const McOptions& opts) {
  require_simple(xi, "sample_noncolliding_rw");
  const Eigen::VectorXd u = xi.expanded();
  const int n = int(u.size());
  if (n > 16) throw CapacityError("sample_noncolliding_rw: at most 16 walkers");
  check_start(ProcessKind::rw(), u);
  for (int j = 1; j < n; ++j)
    if (std::lround(u(j) - u(0)) % 2 != 0) throw std::invalid_argument("walkers must share parity");
  check_times(ProcessKind::rw(), times);
  if (opts.n_paths < 2) throw std::invalid_argument("sample_noncolliding_rw: need at least two paths");

  PathEnsemble ens;
  ens.process = ProcessKind::rw();
  ens.times = times;
  ens.n_paths = opts.n_paths;
  ens.n_particles = n;
  ens.seed = opts.seed;
  ens.states.resize(std::size_t(opts.n_paths) * times.size() * std::size_t(n));
  const int moves = 1 << n;
  parallel_for(opts.n_paths, opts.workers, [&](long p) {
    RandomStream rng(opts.seed, std::uint64_t(p));
    Eigen::VectorXd x = u, y(n);
    std::vector<double> cum(static_cast<std::size_t>(moves));
    double t0 = 0.0;
    for (std::size_t m = 0; m < times.size(); ++m) {
      for (long s = std::lround(times[m] - t0); s > 0; --s) {
        double acc = 0.0;
        for (int e = 0; e < moves; ++e) {
          for (int j = 0; j < n; ++j) y(j) = x(j) + (((e >> j) & 1) ? 1.0 : -1.0);
          double r = std::ldexp(1.0, -n);
          for (int k = 1; k < n; ++k)
            for (int j = 0; j < k; ++j) r *= (y(k) - y(j)) / (x(k) - x(j));
          acc += std::max(r, 0.0);
          cum[std::size_t(e)] = acc;
        }
        if (std::abs(acc - 1.0) > 1e-9) throw NumericError("noncolliding RW: transition weights do not sum to 1");
        const double draw = rng.uniform() * acc;
        const int e = int(std::upper_bound(cum.begin(), cum.end(), draw) - cum.begin());
        for (int j = 0; j < n; ++j) x(j) += (((std::min(e, moves - 1) >> j) & 1) ? 1.0 : -1.0);
      }
      for (int j = 0; j < n; ++j) ens.states[ens.index(p, m, j)] = x(j);
      t0 = times[m];
    }
  });
  return ens;
}

namespace {

struct SdeStats {
  long steps = 0, halvings = 0, rejections = 0;
};

bool ordered(const Eigen::VectorXd& y) {
  for (Eigen::Index j = 1; j < y.size(); ++j)
    if (!(y(j) > y(j - 1))) return false;
  return true;
}

Eigen::VectorXd euler_step(const ProcessKind& kind, const Eigen::VectorXd& x, double h, const Eigen::VectorXd& dB) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd y(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double rep = 0.0;
    for (Eigen::Index k = 0; k < n; ++k)
      if (k != j) rep += 1.0 / (x(j) - x(k));
    if (kind.tag == Tag::BM) {
      y(j) = x(j) + rep * h + dB(j);
    } else {
      // full truncation
      const double xp = std::max(x(j), 0.0);
      y(j) = x(j) + (2.0 * (kind.nu + 1.0) + 4.0 * xp * rep) * h + 2.0 * std::sqrt(xp) * dB(j);
    }
  }
  return y;
}

// advances x over h with Brownian increment dB, bisecting along the bridge on ordering failures
void guarded_step(const ProcessKind& kind, Eigen::VectorXd& x, double h, const Eigen::VectorXd& dB, int depth,
                  int max_depth, RandomStream& rng, SdeStats& st) {
  Eigen::VectorXd y = euler_step(kind, x, h, dB);
  if (ordered(y)) {
    x = y;
    return;
  }
  if (depth >= max_depth) {
    ++st.rejections;
    return;
  }
  ++st.halvings;
  Eigen::VectorXd dB1(dB.size());
  for (Eigen::Index j = 0; j < dB.size(); ++j) dB1(j) = dB(j) / 2.0 + std::sqrt(h / 4.0) * rng.normal();
  guarded_step(kind, x, h / 2.0, dB1, depth + 1, max_depth, rng, st);
  guarded_step(kind, x, h / 2.0, dB - dB1, depth + 1, max_depth, rng, st);
}

}  // namespace

PathEnsemble sample_noncolliding(const ProcessKind& kind, const PointConfiguration& xi,
                                 const std::vector<double>& times, const McOptions& opts, const SdeOptions& sde) {
  if (kind.tag != Tag::BM && kind.tag != Tag::BESQ)
    throw std::invalid_argument("sample_noncolliding: BM or BESQ only");
  require_simple(xi, "sample_noncolliding");
  if (!(sde.dt > 0)) throw std::invalid_argument("sample_noncolliding: dt must be positive");
  const Eigen::VectorXd u = xi.expanded();
  check_start(kind, u);
  check_times(kind, times);
  if (opts.n_paths < 2) throw std::invalid_argument("sample_noncolliding: need at least two paths");
  const int n = int(u.size());

  PathEnsemble ens;
  ens.process = kind;
  ens.times = times;
  ens.n_paths = opts.n_paths;
  ens.n_particles = n;
  ens.seed = opts.seed;
  ens.states.resize(std::size_t(opts.n_paths) * times.size() * std::size_t(n));
  std::vector<SdeStats> stats(std::size_t(opts.n_paths));
  parallel_for(opts.n_paths, opts.workers, [&](long p) {
    RandomStream rng(opts.seed, std::uint64_t(p));
    SdeStats& st = stats[std::size_t(p)];
    Eigen::VectorXd x = u, dB(n);
    double t = 0.0;
    for (std::size_t m = 0; m < times.size(); ++m) {
      while (times[m] - t > kTimeMatch) {
        const double h = std::min(sde.dt, times[m] - t);
        for (int j = 0; j < n; ++j) dB(j) = std::sqrt(h) * rng.normal();
        ++st.steps;
        guarded_step(kind, x, h, dB, 0, sde.max_halvings, rng, st);
        t += h;
      }
      t = times[m];
      for (int j = 0; j < n; ++j)
        ens.states[ens.index(p, m, j)] = kind.tag == Tag::BESQ ? std::max(x(j), 0.0) : x(j);
    }
  });
  for (const SdeStats& s : stats) {
    ens.steps += s.steps;
    ens.halvings += s.halvings;
    ens.rejections += s.rejections;
  }
  if (ens.steps > 0 && double(ens.rejections) > sde.rejection_budget * double(ens.steps))
    throw NumericError("sample_noncolliding: collision guard rejected too many steps, reduce dt");
  return ens;
}

Estimate ensemble_expectation(const PathEnsemble& ens, const PathFunctional& F) {
  const std::vector<std::size_t> rows = locate(ens.times, F.times);
  std::vector<double> vals(std::size_t(ens.n_paths));
  for (long p = 0; p < ens.n_paths; ++p) vals[std::size_t(p)] = F(rows_at(ens.path(p), rows));
  return make_estimate(vals);
}

BruteForceResult brute_force_rw(const PointConfiguration& xi, const PathFunctional& F, int T) {
  require_simple(xi, "brute_force_rw");
  if (T < 0) throw std::invalid_argument("brute_force_rw: negative horizon");
  const Eigen::VectorXd u = xi.expanded();
  const int n = int(u.size());
  if (n * T > 24) throw CapacityError("brute_force_rw: N*T must not exceed 24");
  check_start(ProcessKind::rw(), u);
  const std::vector<std::size_t> rows = rw_rows(F, T);
  const double hu = vandermonde(u);

  // M^{u_k}(T, y) on the reachable sites u_j - T .. u_j + T
  std::vector<MartingaleTransform> tr;
  for (int k = 0; k < n; ++k) tr.emplace_back(ProcessKind::rw(), xi, u(k));
  std::map<long, Eigen::VectorXd> cache;
  for (int j = 0; j < n; ++j)
    for (int d = -T; d <= T; d += 2) {
      const long site = std::lround(u(j)) + d;
      if (cache.count(site)) continue;
      Eigen::VectorXd row(n);
      for (int k = 0; k < n; ++k) row(k) = tr[std::size_t(k)](T, double(site));
      cache.emplace(site, row);
    }

  std::vector<double> free_terms, doob_terms;
  free_terms.reserve(std::size_t(1) << (n * T));
  doob_terms.reserve(std::size_t(1) << (n * T));
  Eigen::MatrixXd m(n, n);
  enumerate_rw(u, T, [&](const Eigen::MatrixXd& path, double w) {
    const double f = F(rows_at(path, rows));
    for (int j = 0; j < n; ++j) m.row(j) = cache.at(std::lround(path(T, j))).transpose();
    free_terms.push_back(w * f * (n == 0 ? 1.0 : m.partialPivLu().determinant()));
    bool alive = true;
    for (int s = 1; s <= T && alive; ++s) alive = ordered(path.row(s).transpose());
    doob_terms.push_back(alive ? w * f * vandermonde(path.row(T).transpose().eval()) / hu : 0.0);
  });
  return {pairwise_sum(free_terms.data(), free_terms.size()), pairwise_sum(doob_terms.data(), doob_terms.size())};
}

ReducibilityResult reducibility_check(const ProcessKind& kind, const PointConfiguration& xi, int n_sub,
                                      const PathFunctional& F, const McOptions& opts, double T) {
  require_simple(xi, "reducibility_check");
  const int n = xi.total();
  if (n > 4 || n_sub < 1 || n_sub > n) throw std::invalid_argument("reducibility_check: need 1 <= N' <= N <= 4");
  T = horizon(F, T);
  const Eigen::VectorXd u = xi.expanded();
  check_start(kind, u);
  const std::vector<double> grid = merged_grid(F.times, T);
  check_times(kind, grid);
  const std::vector<std::size_t> rows = locate(grid, F.times);
  const auto J = subsets(n, n_sub);
  const DetWeight full(kind, xi, u);
  std::vector<Eigen::VectorXd> starts;
  std::vector<DetWeight> partial;
  for (const auto& c : J) {
    Eigen::VectorXd v(n_sub);
    for (int i = 0; i < n_sub; ++i) v(i) = u(c[std::size_t(i)]);
    starts.push_back(v);
    partial.emplace_back(kind, xi, v);
  }

  std::vector<double> lhs(std::size_t(opts.n_paths)), rhs(std::size_t(opts.n_paths));
  parallel_for(opts.n_paths, opts.workers, [&](long p) {
    RandomStream rng(opts.seed, std::uint64_t(p));
    const Eigen::MatrixXd x = sample_free_path(kind, u, grid, rng);
    const Eigen::MatrixXd xr = rows_at(x, rows);
    const double d = full(T, x.row(x.rows() - 1).transpose());
    double a = 0.0;
    for (const auto& c : J) a += F(columns(xr, c));
    lhs[std::size_t(p)] = a * d;

    // N' = N restarts the same stream and reproduces the left side exactly
    RandomStream rng2(opts.seed, n_sub == n ? std::uint64_t(p) : std::uint64_t(p) | kSubsetStream);
    double b = 0.0;
    for (std::size_t i = 0; i < starts.size(); ++i) {
      const Eigen::MatrixXd y = sample_free_path(kind, starts[i], grid, rng2);
      b += F(rows_at(y, rows)) * partial[i](T, y.row(y.rows() - 1).transpose());
    }
    rhs[std::size_t(p)] = b;
  });
  return {make_estimate(lhs), make_estimate(rhs)};
}

std::pair<double, double> reducibility_exact_rw(const PointConfiguration& xi, int n_sub, const PathFunctional& F,
                                                int T) {
  require_simple(xi, "reducibility_exact_rw");
  const int n = xi.total();
  if (n > 4 || n_sub < 1 || n_sub > n) throw std::invalid_argument("reducibility_exact_rw: need 1 <= N' <= N <= 4");
  const Eigen::VectorXd u = xi.expanded();
  check_start(ProcessKind::rw(), u);
  const std::vector<std::size_t> rows = rw_rows(F, T);
  const auto J = subsets(n, n_sub);
  const DetWeight full(ProcessKind::rw(), xi, u);

  std::vector<double> terms;
  enumerate_rw(u, T, [&](const Eigen::MatrixXd& path, double w) {
    const Eigen::MatrixXd xr = rows_at(path, rows);
    double a = 0.0;
    for (const auto& c : J) a += F(columns(xr, c));
    terms.push_back(w * a * full(T, path.row(T).transpose()));
  });
  const double lhs = pairwise_sum(terms.data(), terms.size());

  terms.clear();
  for (const auto& c : J) {
    Eigen::VectorXd v(n_sub);
    for (int i = 0; i < n_sub; ++i) v(i) = u(c[std::size_t(i)]);
    const DetWeight part(ProcessKind::rw(), xi, v);
    enumerate_rw(v, T, [&](const Eigen::MatrixXd& path, double w) {
      terms.push_back(w * F(rows_at(path, rows)) * part(T, path.row(T).transpose()));
    });
  }
  return {lhs, pairwise_sum(terms.data(), terms.size())};
}

void write_ensemble_csv(std::ostream& out, const PathEnsemble& ens) {
  const auto old = out.precision(17);
  out << "path,time,component,state";
  if (ens.has_companions()) out << ",companion";
  out << '\n';
  for (long p = 0; p < ens.n_paths; ++p)
    for (std::size_t m = 0; m < ens.times.size(); ++m)
      for (int j = 0; j < ens.n_particles; ++j) {
        out << p << ',' << ens.times[m] << ',' << j << ',' << ens.state(p, m, j);
        if (ens.has_companions()) out << ',' << ens.companion(p, m, j);
        out << '\n';
      }
  out.precision(old);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> ensemble_moments(const PathEnsemble& ens) {
  const Eigen::Index M = Eigen::Index(ens.times.size()), N = ens.n_particles;
  Eigen::MatrixXd mean(M, N), var(M, N);
  std::vector<double> col(std::size_t(ens.n_paths));
  for (Eigen::Index m = 0; m < M; ++m)
    for (Eigen::Index j = 0; j < N; ++j) {
      for (long p = 0; p < ens.n_paths; ++p) col[std::size_t(p)] = ens.state(p, std::size_t(m), int(j));
      const Estimate e = make_estimate(col);
      mean(m, j) = e.mean;
      var(m, j) = e.std_error * e.std_error * double(e.n);
    }
  return {mean, var};
}

}  // namespace detmart
