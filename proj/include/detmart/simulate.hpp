#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "detmart/config.hpp"
#include "detmart/process.hpp"
#include "detmart/random.hpp"

namespace detmart {

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  long n = 0;
};

struct ComplexEstimate {
  std::complex<double> mean;
  double std_error_re = 0.0;
  double std_error_im = 0.0;
  long n = 0;

  Estimate real() const { return {mean.real(), std_error_re, n}; }
  Estimate imag() const { return {mean.imag(), std_error_im, n}; }
};

// Pairwise summation keeps the reduction independent of the worker count.
double pairwise_sum(const double* x, std::size_t n);
Estimate make_estimate(const std::vector<double>& samples);
ComplexEstimate make_estimate(const std::vector<std::complex<double>>& samples);
// |a - b| / sqrt(se_a^2 + se_b^2), with a zero-SE denominator treated as exact agreement only when equal
double z_score(const Estimate& a, const Estimate& b);
double z_score(const Estimate& a, double exact);

struct McOptions {
  long n_paths = 100000;
  std::uint64_t seed = 0;
  int workers = 0;  // 0: hardware concurrency
};

// Runs body(path_index) for every path across workers; body must only touch its own slot.
void parallel_for(long n, int workers, const std::function<void(long)>& body);

// Symmetric observable of the configurations at the listed times. The argument
// has one row per time and one column per particle.
struct PathFunctional {
  std::vector<double> times;
  std::function<double(const Eigen::MatrixXd&)> f;

  double operator()(const Eigen::MatrixXd& x) const { return f(x); }
  double last_time() const;
};

struct PathEnsemble {
  ProcessKind process = ProcessKind::bm();
  std::vector<double> times;
  long n_paths = 0;
  int n_particles = 0;
  std::uint64_t seed = 0;
  std::vector<double> states;      // [path][time][particle]
  std::vector<double> companions;  // empty, or same layout as states
  std::uint64_t companion_seed = 0;
  // Euler guard bookkeeping for SDE ensembles
  long steps = 0;
  long halvings = 0;
  long rejections = 0;

  std::size_t index(long p, std::size_t m, int j) const {
    return (std::size_t(p) * times.size() + m) * std::size_t(n_particles) + std::size_t(j);
  }
  double state(long p, std::size_t m, int j) const { return states[index(p, m, j)]; }
  double companion(long p, std::size_t m, int j) const { return companions[index(p, m, j)]; }
  Eigen::MatrixXd path(long p) const;
  bool has_companions() const { return !companions.empty(); }
};

// one path of independent free processes started at u, observed at times (rows)
Eigen::MatrixXd sample_free_path(const ProcessKind& kind, const Eigen::VectorXd& u, const std::vector<double>& times,
                                 RandomStream& rng);
PathEnsemble sample_free(const ProcessKind& kind, const Eigen::VectorXd& u, const std::vector<double>& times,
                         const McOptions& opts);

// Imaginary parts: Brownian for BM/BES/BESQ, W(C(t)) for RW.
PathEnsemble attach_companions(PathEnsemble ens, std::uint64_t seed2, int workers = 0);

double determinantal_martingale(const ProcessKind& kind, const PointConfiguration& xi, double T,
                                const Eigen::VectorXd& v);

// E_u[F(V) D_xi(T, V(T))] over free paths; T defaults to the last time of F
Estimate dmr_expectation(const ProcessKind& kind, const PointConfiguration& xi, const PathFunctional& F,
                         const McOptions& opts, double T = -1.0);

// E_u[F(Re Z) det[phi^{u_k}(Z_j(T))]] for BM, BES(n+1/2) and RW
ComplexEstimate cpr_expectation(const ProcessKind& kind, const PointConfiguration& xi, const PathFunctional& F,
                                const McOptions& opts, double T = -1.0);
// phi^{u}_xi(z) used by the CPR route at horizon T
std::complex<double> cpr_weight(const ProcessKind& kind, const PointConfiguration& xi, double u, double T,
                                std::complex<double> z);

// Exact Doob-transform sampler for noncolliding walks from distinct same-parity integers.
PathEnsemble sample_noncolliding_rw(const PointConfiguration& xi, const std::vector<double>& times,
                                    const McOptions& opts);

struct SdeOptions {
  double dt = 1e-3;
  int max_halvings = 8;
  double rejection_budget = 1e-3;
};

// Euler scheme for noncolliding BM / BESQ(nu) with the ordering guard.
PathEnsemble sample_noncolliding(const ProcessKind& kind, const PointConfiguration& xi,
                                 const std::vector<double>& times, const McOptions& opts,
                                 const SdeOptions& sde = {});

// E[F] under a sampled ensemble
Estimate ensemble_expectation(const PathEnsemble& ens, const PathFunctional& F);

struct BruteForceResult {
  double free_dmr = 0.0;  // sum over free walks of 2^{-NT} F D_xi(T, V(T))
  double doob = 0.0;      // sum over free walks of 2^{-NT} F 1(tau > T) h(V(T))/h(u)
};

BruteForceResult brute_force_rw(const PointConfiguration& xi, const PathFunctional& F, int T);

struct ReducibilityResult {
  Estimate lhs;
  Estimate rhs;
};

// F acts on N' particles (columns); LHS sums over N'-subsets of the N walkers,
// RHS over increasing N'-tuples v of supp xi started as v.
ReducibilityResult reducibility_check(const ProcessKind& kind, const PointConfiguration& xi, int n_sub,
                                      const PathFunctional& F, const McOptions& opts, double T = -1.0);
std::pair<double, double> reducibility_exact_rw(const PointConfiguration& xi, int n_sub, const PathFunctional& F,
                                                int T);

// rows (path, time, component, state[, companion])
void write_ensemble_csv(std::ostream& out, const PathEnsemble& ens);
// per time and component mean and variance of the states
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> ensemble_moments(const PathEnsemble& ens);

}  // namespace detmart
