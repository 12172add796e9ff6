#pragma once

// Strong stationary duals of birth-and-death chains: the classical dual with
// respect to truncated stationary laws, its inverse (the anti-dual), and the
// pure-birth spectral dual, each in discrete and continuous time.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "bdssd/chain.hpp"
#include "bdssd/matrix.hpp"
#include "bdssd/spectral.hpp"

namespace bdssd {

template <class Chain>
struct DualPair {
  using value_type = typename Chain::value_type;

  Chain primal;
  Chain dual;
  /// Rows indexed by dual state, columns by primal state.
  Matrix<value_type> link;
  /// ||link * A_primal - A_dual * link||_inf
  value_type residual;
  bool sharp = false;
};

template <class Chain>
struct AntiDualResult {
  using value_type = typename Chain::value_type;

  DualPair<Chain> pair;
  /// Stationary cdf of the constructed primal, H_d = 1.
  std::vector<value_type> cdf;
  /// H_{d-1} = 1 - eta.
  value_type eta;
  value_type margin;
  int halvings = 0;
  std::vector<std::string> warnings;
};

template <class T>
struct AntiDualOptions {
  /// Lower bound on every hold of the constructed kernel. For generators
  /// it bounds H_0 from below instead.
  T margin = T(1) / T(1000);
  /// Explicit H_{d-1} = 1 - eta; skips the halving search.
  std::optional<T> eta;
  int max_halvings = 200;
};

/// Condition threshold above which anti_dual_generator warns.
inline constexpr double kCdfRatioWarning = 1e12;

// ---------------------------------------------------------------------------
// Links and residuals

template <class T>
T intertwining_residual(const Matrix<T>& link, const Matrix<T>& primal, const Matrix<T>& dual) {
  const std::size_t n = link.rows();
  if (link.cols() != n || primal.rows() != n || primal.cols() != n || dual.rows() != n ||
      dual.cols() != n)
    throw Error(ErrorCode::ShapeMismatch, "link, primal and dual must share one square shape");
  return inf_norm(link * primal - dual * link);
}

template <class T>
T intertwining_residual(const Matrix<T>& link, const BasicDiscreteKernel<T>& primal,
                        const BasicDiscreteKernel<T>& dual) {
  return intertwining_residual(link, primal.matrix(), dual.matrix());
}

template <class T>
T intertwining_residual(const Matrix<T>& link, const BasicContinuousGenerator<T>& primal,
                        const BasicContinuousGenerator<T>& dual) {
  return intertwining_residual(link, primal.matrix(), dual.matrix());
}

/// Lambda(x*, x) = 1(x <= x*) pi_x / H_{x*}.
template <class T>
Matrix<T> truncated_stationary_link(const Pmf<T>& pi) {
  const auto h = pi.cdf();
  const std::size_t n = pi.size();
  Matrix<T> link(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) link(i, j) = pi[j] / h[i];
  return link;
}

/// Sharp iff the last column vanishes above the diagonal.
template <class T>
bool is_sharp(const Matrix<T>& link) {
  const std::size_t d = link.cols() - 1;
  for (std::size_t i = 0; i < d; ++i)
    if (link(i, d) != 0) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Classical dual

template <class T>
DualPair<BasicDiscreteKernel<T>> classical_dual(const BasicDiscreteKernel<T>& kernel) {
  const auto rep = validate_discrete(kernel);
  if (!rep.ergodic) throw Error(ErrorCode::NotErgodic, "classical dual needs an ergodic kernel");
  if (!rep.monotone) throw Error(ErrorCode::NotMonotone, "classical dual needs a monotone kernel");
  const auto pi = stationary_pmf(kernel);
  const auto h = pi.cdf();
  const int d = kernel.d();
  std::vector<T> birth, death, hold;
  for (int i = 0; i < d; ++i) birth.push_back(h[i + 1] / h[i] * kernel.q(i + 1));
  for (int i = 1; i <= d; ++i) death.push_back(h[i - 1] / h[i] * kernel.p(i));
  for (int i = 0; i <= d; ++i) hold.push_back(T(1) - kernel.p(i) - (i < d ? kernel.q(i + 1) : T(0)));
  BasicDiscreteKernel<T> dual(std::move(birth), std::move(death), std::move(hold));
  auto link = truncated_stationary_link(pi);
  T residual = intertwining_residual(link, kernel, dual);
  const bool sharp = is_sharp(link);
  return {kernel, std::move(dual), std::move(link), std::move(residual), sharp};
}

/// Continuous analog: mu*_i = (H_{i-1}/H_i) lambda_i, lambda*_i = (H_{i+1}/H_i) mu_{i+1}.
template <class T>
DualPair<BasicContinuousGenerator<T>> classical_dual(const BasicContinuousGenerator<T>& gen) {
  require_ergodic(gen);
  const auto pi = stationary_pmf(gen);
  const auto h = pi.cdf();
  const int d = gen.d();
  std::vector<T> birth, death;
  for (int i = 0; i < d; ++i) birth.push_back(h[i + 1] / h[i] * gen.death(i + 1));
  for (int i = 1; i <= d; ++i) death.push_back(h[i - 1] / h[i] * gen.birth(i));
  BasicContinuousGenerator<T> dual(std::move(birth), std::move(death));
  auto link = truncated_stationary_link(pi);
  T residual = intertwining_residual(link, gen, dual);
  const bool sharp = is_sharp(link);
  return {gen, std::move(dual), std::move(link), std::move(residual), sharp};
}

// ---------------------------------------------------------------------------
// Anti-dual

namespace detail {

/// Backward recursion for the cdf H given H_{d-1} = 1 - eta:
/// H_{i-1} = H_i / (1 + (up_i / down_i)(1 - H_i / H_{i+1})).
template <class T>
std::vector<T> anti_dual_cdf(std::span<const T> up, std::span<const T> down, const T& eta) {
  const int d = static_cast<int>(up.size()) - 1;
  std::vector<T> h(static_cast<std::size_t>(d) + 1);
  h[d] = T(1);
  h[d - 1] = T(1) - eta;
  for (int i = d - 1; i >= 1; --i) h[i - 1] = h[i] / (T(1) + up[i] / down[i] * (T(1) - h[i] / h[i + 1]));
  return h;
}

template <class T>
std::string scalar_text(const T& x) {
  return Scalar<T>::to_string(x);
}

}  // namespace detail

template <class T>
AntiDualResult<BasicDiscreteKernel<T>> anti_dual(const BasicDiscreteKernel<T>& dual,
                                                 const AntiDualOptions<T>& opts = {}) {
  const auto rep = validate_discrete(dual);
  const int d = dual.d();
  if (!rep.ok()) throw Error(ErrorCode::HypothesisViolated, "dual kernel is not stochastic");
  if (!rep.absorbing_top) throw Error(ErrorCode::HypothesisViolated, "top state is not absorbing");
  for (int i = 0; i < d; ++i)
    if (!(dual.p(i) > 0))
      throw Error(ErrorCode::HypothesisViolated, "p*_" + std::to_string(i) + " must be positive");
  for (int i = 1; i < d; ++i)
    if (!(dual.q(i) > 0))
      throw Error(ErrorCode::HypothesisViolated, "q*_" + std::to_string(i) + " must be positive");
  if (!rep.strictly_monotone)
    throw Error(ErrorCode::HypothesisViolated, "p*_{i-1} + q*_i < 1 fails for some i");
  if (!(opts.margin > 0)) throw Error(ErrorCode::InvalidArgument, "margin must be positive");

  struct Candidate {
    std::vector<T> h, birth, death, hold;
    T min_hold;
  };
  auto build = [&](const T& eta) {
    Candidate c;
    c.h = detail::anti_dual_cdf<T>(dual.births(), dual.deaths(), eta);
    const auto& h = c.h;
    c.birth.push_back((T(1) - h[0] / h[1]) * dual.p(0));
    for (int i = 1; i < d; ++i) c.birth.push_back(h[i] / h[i - 1] * dual.q(i));
    for (int i = 1; i <= d; ++i) c.death.push_back(h[i - 1] / h[i] * dual.p(i - 1));
    for (int i = 0; i <= d; ++i) {
      const T pi = i < d ? c.birth[i] : T(0);
      const T qi = i > 0 ? c.death[i - 1] : T(0);
      c.hold.push_back(T(1) - pi - qi);
    }
    c.min_hold = *std::min_element(c.hold.begin(), c.hold.end());
    return c;
  };

  T eta;
  T margin = opts.margin;
  int halvings = 0;
  Candidate cand;
  if (opts.eta) {
    eta = *opts.eta;
    if (!(eta > 0 && eta < 1)) throw Error(ErrorCode::InvalidArgument, "eta must lie in (0, 1)");
    cand = build(eta);
    if (!(cand.min_hold > 0))
      throw Error(ErrorCode::NoFeasibleEta, "eta = " + detail::scalar_text(eta) +
                                                " gives a nonpositive hold " +
                                                detail::scalar_text(cand.min_hold));
  } else {
    eta = T(1) / T(2);
    cand = build(eta);
    while (!(cand.min_hold >= margin)) {
      if (++halvings > opts.max_halvings) {
        // Limiting holds as eta -> 0: r_0 -> 1, r_i -> 1 - q*_i - p*_{i-1}.
        T limit(1);
        for (int i = 1; i <= d; ++i) limit = std::min<T>(limit, T(1) - dual.q(i) - dual.p(i - 1));
        throw Error(ErrorCode::NoFeasibleEta,
                    "min hold " + detail::scalar_text(cand.min_hold) + " after " +
                        std::to_string(opts.max_halvings) + " halvings; limiting min hold is " +
                        detail::scalar_text(limit) + ", margin " + detail::scalar_text(margin));
      }
      eta /= T(2);
      cand = build(eta);
    }
  }

  BasicDiscreteKernel<T> primal(cand.birth, cand.death, cand.hold);
  auto back = classical_dual(primal);
  if constexpr (Scalar<T>::exact) {
    if (!(back.dual == dual))
      throw Error(ErrorCode::StochasticityViolation, "classical dual of the anti-dual differs from input");
  } else {
    if (inf_norm(back.dual.matrix() - dual.matrix()) > 1e-10)
      throw Error(ErrorCode::StochasticityViolation, "classical dual of the anti-dual differs from input");
  }
  T residual = intertwining_residual(back.link, primal, dual);
  const bool sharp = back.sharp;
  DualPair<BasicDiscreteKernel<T>> pair{std::move(primal), dual, std::move(back.link),
                                        std::move(residual), sharp};
  return {std::move(pair), std::move(cand.h), eta, margin, halvings, {}};
}

template <class T>
AntiDualResult<BasicContinuousGenerator<T>> anti_dual_generator(
    const BasicContinuousGenerator<T>& dual, const AntiDualOptions<T>& opts = {}) {
  const auto rep = validate_generator(dual);
  const int d = dual.d();
  if (!rep.ok()) throw Error(ErrorCode::HypothesisViolated, "dual generator has negative rates");
  if (!rep.absorbing_top) throw Error(ErrorCode::HypothesisViolated, "top state is not absorbing");
  for (int i = 0; i < d; ++i)
    if (!(dual.birth(i) > 0))
      throw Error(ErrorCode::HypothesisViolated, "lambda*_" + std::to_string(i) + " must be positive");
  for (int i = 1; i < d; ++i)
    if (!(dual.death(i) > 0))
      throw Error(ErrorCode::HypothesisViolated, "mu*_" + std::to_string(i) + " must be positive");
  if (!(opts.margin > 0)) throw Error(ErrorCode::InvalidArgument, "margin must be positive");

  T eta = opts.eta ? *opts.eta : T(1) / T(2);
  if (!(eta > 0 && eta < 1)) throw Error(ErrorCode::InvalidArgument, "eta must lie in (0, 1)");
  int halvings = 0;
  auto h = detail::anti_dual_cdf<T>(dual.births(), dual.deaths(), eta);
  if (!opts.eta) {
    while (!(h[0] >= opts.margin)) {
      if (++halvings > opts.max_halvings)
        throw Error(ErrorCode::NoFeasibleEta, "H_0 stays below margin " + detail::scalar_text(opts.margin));
      eta /= T(2);
      h = detail::anti_dual_cdf<T>(dual.births(), dual.deaths(), eta);
    }
  }

  std::vector<T> birth, death;
  birth.push_back((T(1) - h[0] / h[1]) * dual.birth(0));
  for (int i = 1; i < d; ++i) birth.push_back(h[i] / h[i - 1] * dual.death(i));
  for (int i = 1; i <= d; ++i) death.push_back(h[i - 1] / h[i] * dual.birth(i - 1));
  BasicContinuousGenerator<T> primal(std::move(birth), std::move(death));

  std::vector<std::string> warnings;
  double worst_ratio = 1.0;
  for (int i = 1; i <= d; ++i) worst_ratio = std::max(worst_ratio, to_double(T(h[i] / h[i - 1])));
  if (worst_ratio > kCdfRatioWarning)
    warnings.push_back("H-ratio conditioning " + Scalar<double>::to_string(worst_ratio) +
                       " exceeds 1e12");

  auto back = classical_dual(primal);
  // Cross-check through the discretized kernels, where monotonicity holds
  // for the automatic step.
  const T eps = auto_eps(primal) < auto_eps(dual) ? auto_eps(primal) : auto_eps(dual);
  auto disc = classical_dual(discretize(primal, eps));
  auto disc_dual = discretize(dual, eps);
  if constexpr (Scalar<T>::exact) {
    if (!(back.dual == dual) || !(disc.dual == disc_dual))
      throw Error(ErrorCode::StochasticityViolation, "classical dual of the anti-dual differs from input");
  } else {
    if (inf_norm(back.dual.matrix() - dual.matrix()) > 1e-10 * std::max(1.0, to_double(T(1) / eps)) ||
        inf_norm(disc.dual.matrix() - disc_dual.matrix()) > 1e-10)
      throw Error(ErrorCode::StochasticityViolation, "classical dual of the anti-dual differs from input");
  }
  T residual = intertwining_residual(back.link, primal, dual);
  const bool sharp = back.sharp;
  DualPair<BasicContinuousGenerator<T>> pair{std::move(primal), dual, std::move(back.link),
                                             std::move(residual), sharp};
  return {std::move(pair), std::move(h), eta, opts.margin, halvings, std::move(warnings)};
}

// ---------------------------------------------------------------------------
// Spectral (pure-birth) duals, floating point only.

/// Pure-birth kernel with hold theta_i and birth 1 - theta_i; link rows
/// delta_0 Q_k.
DualPair<DiscreteKernel> spectral_dual_discrete(const DiscreteKernel& kernel);

/// Pure-birth generator with birth rate nu_i; link from the continuous Q family.
DualPair<ContinuousGenerator> spectral_dual_generator(const ContinuousGenerator& gen);

}  // namespace bdssd
