#pragma once

#include <span>
#include <vector>

#include "bdssd/chain.hpp"
#include "bdssd/matrix.hpp"

namespace bdssd {

enum class TimeType { Discrete, Continuous };

/// Real spectrum of a birth-and-death kernel or of -G.
///
/// Discrete kernels store theta_0 <= ... <= theta_d with the unit eigenvalue
/// last. Generators store nu_0 >= ... >= nu_d for -G with the zero
/// eigenvalue last. In both cases the last entry is pinned exactly.
struct Spectrum {
  TimeType time = TimeType::Discrete;
  std::vector<double> values;

  /// The d eigenvalues other than the pinned top (discrete) or bottom
  /// (continuous) one: failure probabilities resp. exponential rates.
  std::vector<double> nontrivial() const {
    return {values.begin(), values.end() - (values.empty() ? 0 : 1)};
  }
  double min() const;
  double max() const;
};

/// Eigenvalues (ascending) of the symmetric tridiagonal matrix with the given
/// diagonal and off-diagonal, by Gershgorin bracketing and Sturm bisection.
std::vector<double> symmetric_tridiagonal_eigenvalues(std::span<const double> diag,
                                                      std::span<const double> off);

Spectrum eigenvalues_discrete(const DiscreteKernel& kernel);
Spectrum eigenvalues_generator(const ContinuousGenerator& gen);

/// Values in [-kNegativeEigenvalueSnap, 0) count as zero eigenvalues.
inline constexpr double kNegativeEigenvalueSnap = 1e-12;
/// Entries of Q_k in [-kQClamp, 0) are clamped; below that is an error.
inline constexpr double kQClamp = 1e-10;

/// The stochastic polynomial family Q_0 = I, ..., Q_d of a kernel or
/// generator. Row 0 of each Q_k is the k-th row of the spectral link.
struct QFamily {
  Spectrum spectrum;
  std::vector<Matrix<double>> q;
  /// Most negative entry seen before clamping.
  double min_entry_before_clamp = 0.0;

  const Matrix<double>& operator[](std::size_t k) const { return q[k]; }
  std::size_t size() const { return q.size(); }
  /// Lower-triangular link with rows delta_0 Q_k.
  Matrix<double> link() const;
};

QFamily q_family_discrete(const DiscreteKernel& kernel, const Spectrum& spec);
QFamily q_family_discrete(const DiscreteKernel& kernel);
QFamily q_family_continuous(const ContinuousGenerator& gen, const Spectrum& spec);
QFamily q_family_continuous(const ContinuousGenerator& gen);

}  // namespace bdssd
