#pragma once

// Laws of absorption times: lattice pmfs and pgfs in discrete time,
// cdfs and Laplace transforms in continuous time, and the occupation-time
// determinant identities.

#include <cstddef>
#include <span>
#include <vector>

#include "bdssd/chain.hpp"
#include "bdssd/matrix.hpp"

namespace bdssd {

inline constexpr double kDefaultTailTol = 1e-12;
inline constexpr std::size_t kAbsorptionStepCap = 10'000'000;
/// Relative rate gap below which hypoexponential_cdf leaves the closed form.
inline constexpr double kHypoRelativeGap = 1e-8;
/// Sum of |closed-form weights| above which cancellation would cost more
/// than ~1e-10 absolute; such inputs also use uniformization.
inline constexpr double kHypoWeightLimit = 1e6;

/// Law on {0, 1, 2, ...} truncated at a horizon, with the remaining mass.
struct LatticePmf {
  std::vector<double> weights;
  double tail = 0.0;

  std::size_t horizon() const { return weights.empty() ? 0 : weights.size() - 1; }
  double at(std::size_t t) const { return t < weights.size() ? weights[t] : 0.0; }
  double cdf(std::size_t t) const;
  /// sum_t weights[t] u^t; the tail is ignored.
  double pgf(double u) const;
  double mean() const;
};

/// sum_t |a(t) - b(t)| over the longer horizon.
double l1_distance(const LatticePmf& a, const LatticePmf& b);

/// Pmf of the absorption time in d from 0, by forward iteration of delta_0 P^t.
LatticePmf absorption_pmf(const DiscreteKernel& kernel, double tol = kDefaultTailTol);

/// Law of a sum of independent geometrics on {1, 2, ...} with failure
/// probabilities thetas: P(G = k) = (1 - theta) theta^{k-1}.
LatticePmf geometric_convolution(std::span<const double> thetas, double tol = kDefaultTailTol);

/// prod_j (1 - theta_j) u / (1 - theta_j u).
double pgf_product(std::span<const double> thetas, double u);

/// |E s^{T(eps)} - E w^{T}| with w = eps s / (1 - (1 - eps) s), where T(eps)
/// is the absorption time of the lazy kernel.
double lazy_pgf_identity_check(const DiscreteKernel& kernel, double eps, double s);

struct TimeGridCdf {
  std::vector<double> times;
  std::vector<double> values;
};

/// P(T <= t) for the absorption time of an absorbing generator, by
/// uniformization at rate max_i (lambda_i + mu_i).
TimeGridCdf absorption_cdf_continuous(const ContinuousGenerator& gen, std::span<const double> times,
                                      double tol = kDefaultTailTol);

/// Cdf of a sum of independent exponentials with the given rates.
TimeGridCdf hypoexponential_cdf(std::span<const double> rates, std::span<const double> times);

/// sup over the grid of |P(eps T(eps) <= t) - P(T <= t)| where T(eps) is the
/// absorption time of discretize(gen, eps).
double discretization_cdf_gap(const ContinuousGenerator& gen, double eps,
                              std::span<const double> times);

/// Strictly positive weights u_0..u_{d-1}, one per transient state.
class OccupationQuery {
 public:
  explicit OccupationQuery(std::vector<double> u);
  std::span<const double> values() const { return u_; }
  std::size_t size() const { return u_.size(); }

 private:
  std::vector<double> u_;
};

/// -G_0: the generator with the last row and column removed, negated.
Matrix<double> killed_generator(const ContinuousGenerator& gen);

/// E exp(-<u, T>) for the occupation vector before hitting d:
/// det(-G_0) / det(-G_0 + U).
double occupation_laplace(const ContinuousGenerator& gen, const OccupationQuery& query);

/// Sigma = (1/2) S^{-1}, S = D (-G_0) D^{-1}, D = diag(sqrt(pi)) with pi the
/// reversing measure of the rates among states 0..d-1.
Matrix<double> gaussian_covariance(const ContinuousGenerator& gen);

/// |det(-G_0)/det(-G_0 + U) - det(I + 2 Sigma U)^{-1}|.
double gaussian_split_residual(const ContinuousGenerator& gen, const OccupationQuery& query);

}  // namespace bdssd
