#pragma once

// Seeded sample-path constructions of the pure-birth spectral dual alongside
// its primal chain, and the Monte Carlo harness that checks the resulting
// strong stationary times.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "bdssd/chain.hpp"
#include "bdssd/spectral.hpp"
#include "bdssd/stats.hpp"

namespace bdssd {

/// (master seed, replica index). Identical specs give identical streams.
struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
};

/// Per-replica stream: a 64-bit Mersenne Twister keyed by a SplitMix64 hash
/// of (seed, replica). Bits are converted to doubles by hand so outputs do
/// not depend on the standard library's distribution implementations.
class ReplicaRng {
 public:
  explicit ReplicaRng(RngSpec spec);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Exponential with the given rate; +inf for rate 0.
  double exponential(double rate);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

struct CoupledTrajectory {
  /// Event times: step indices in discrete time, jump epochs in continuous.
  std::vector<double> times;
  std::vector<int> primal;
  std::vector<int> dual;
  /// First time the dual reaches d.
  double absorption_time = 0.0;
  /// Time spent by the dual at each level 0..d-1; these sum to absorption_time.
  std::vector<double> sojourns;

  int exit_state() const { return primal.back(); }
};

/// Cached spectral-dual data for the discrete coupling: eigenvalues, the
/// link rows delta_0 Q_k and the denominators (delta_0 Q_k P)(y).
class DiscreteSpectralCoupling {
 public:
  explicit DiscreteSpectralCoupling(const DiscreteKernel& kernel);

  const DiscreteKernel& kernel() const { return kernel_; }
  const Matrix<double>& link() const { return link_; }
  std::span<const double> thetas() const { return theta_; }
  int d() const { return kernel_.d(); }

  /// Probability that the dual moves from xhat to xhat+1 when the primal
  /// lands on y. Forced to 1 when y = xhat + 1.
  double dual_birth_probability(int xhat, int y) const;

 private:
  DiscreteKernel kernel_;
  std::vector<double> theta_;
  Matrix<double> link_;
  Matrix<double> link_times_kernel_;
};

inline double dual_birth_probability(const DiscreteSpectralCoupling& ctx, int xhat, int y) {
  return ctx.dual_birth_probability(xhat, y);
}

class ContinuousSpectralCoupling {
 public:
  explicit ContinuousSpectralCoupling(const ContinuousGenerator& gen);

  const ContinuousGenerator& generator() const { return gen_; }
  const Matrix<double>& link() const { return link_; }
  std::span<const double> rates() const { return nu_; }
  int d() const { return gen_.d(); }

  /// Rate of the dual birth clock at (xhat, x): nu_xhat Lhat(xhat+1, x) / Lhat(xhat, x).
  double dual_clock_rate(int xhat, int x) const;

 private:
  ContinuousGenerator gen_;
  std::vector<double> nu_;
  Matrix<double> link_;
};

CoupledTrajectory run_coupled_discrete(const DiscreteSpectralCoupling& ctx, RngSpec rng,
                                       std::size_t max_steps = 10'000'000);
CoupledTrajectory run_coupled_discrete(const DiscreteKernel& kernel, RngSpec rng,
                                       std::size_t max_steps = 10'000'000);

CoupledTrajectory run_coupled_continuous(const ContinuousSpectralCoupling& ctx, RngSpec rng,
                                         double max_time = 1e12);
CoupledTrajectory run_coupled_continuous(const ContinuousGenerator& gen, RngSpec rng,
                                         double max_time = 1e12);

/// Birth probability of the coordinate-checking dual of the Ehrenfest urn
/// given its level xhat and the primal move x -> y.
double coordinate_birth_probability(int d, int xhat, int x, int y);

/// Ehrenfest urn (hold 1/2) coupled with the coordinate-checking dual.
CoupledTrajectory run_coordinate_dual(int d, RngSpec rng, std::size_t max_steps = 10'000'000);

struct SimulationOptions {
  bool coordinate_dual = false;
  /// 0 selects std::thread::hardware_concurrency().
  unsigned threads = 0;
  std::size_t max_steps = 10'000'000;
  double max_time = 1e12;
  bool keep_trajectories = false;
};

struct LevelCheck {
  int level = 0;
  double expected_mean = 0.0;
  double empirical_mean = 0.0;
  /// Standardized deviation; +inf when a zero-variance level deviates.
  double z = 0.0;
};

struct SstReport {
  TimeType time = TimeType::Discrete;
  std::size_t replicas = 0;
  /// Set when N < 2: distances are still reported, the p-value is not.
  bool degenerate = false;
  double ks = 0.0;
  double tv = 0.0;
  stats::ChiSquareResult independence;
  std::vector<LevelCheck> levels;
  double max_level_z = 0.0;
  /// Largest standardized deviation of primal move frequencies from the
  /// kernel (discrete) or of jump counts and directions from the rates.
  double max_transition_z = 0.0;
  /// Moves observed that the chain cannot make.
  std::size_t structural_violations = 0;
  std::vector<double> exit_distribution;
  std::vector<double> stationary;
  std::vector<CoupledTrajectory> trajectories;
};

SstReport monte_carlo_sst(const DiscreteKernel& kernel, std::size_t replicas, std::uint64_t seed,
                          const SimulationOptions& opts = {});
SstReport monte_carlo_sst(const ContinuousGenerator& gen, std::size_t replicas, std::uint64_t seed,
                          const SimulationOptions& opts = {});

/// Two-sample comparison of the bivariate constructions: per-replica counts
/// of consecutive gap pairs (Xhat_{t-1} - X_{t-1}, Xhat_t - X_t).
struct GapComparison {
  double max_abs_z = 0.0;
  int gap_before = 0;
  int gap_after = 0;
};

GapComparison compare_gap_transitions(const std::vector<CoupledTrajectory>& a,
                                      const std::vector<CoupledTrajectory>& b, int d);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo estimate of E exp(-<u, T>) for the occupation vector before
/// absorption at d, by exact simulation of the generator.
MonteCarloEstimate simulate_occupation_laplace(const ContinuousGenerator& gen,
                                               std::span<const double> u, std::size_t replicas,
                                               std::uint64_t seed);

}  // namespace bdssd
