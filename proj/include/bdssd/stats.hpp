#pragma once

// Goodness-of-fit statistics used by the Monte Carlo harness.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "bdssd/absorption.hpp"

namespace bdssd::stats {

/// sup_t |F_n(t) - F(t)| for integer samples against a lattice law.
double ks_distance_lattice(std::span<const std::int64_t> samples, const LatticePmf& law);

/// Two-sided KS statistic for real samples against a continuous cdf. The cdf
/// is evaluated once on the sorted samples.
double ks_distance_continuous(std::span<const double> samples,
                              const std::function<std::vector<double>(std::span<const double>)>& cdf);

/// (1/2) sum_i |counts_i / n - pmf_i|.
double total_variation(std::span<const std::uint64_t> counts, std::span<const double> pmf);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  /// Empty when the table is degenerate (fewer than two nonempty rows or columns).
  std::optional<double> p_value;
};

/// Pearson chi-square test of independence on a contingency table. Empty
/// rows and columns are dropped before counting degrees of freedom.
ChiSquareResult chi_square_independence(const std::vector<std::vector<std::uint64_t>>& table);

/// Upper tail of the chi-square distribution.
double chi_square_survival(double statistic, int dof);

/// Bin edges (upper-inclusive integer cutoffs) at the deciles of a lattice law.
std::vector<std::int64_t> decile_cutoffs(const LatticePmf& law);

/// Bin edges at the deciles of a continuous law given by its cdf on a grid.
std::vector<double> decile_cutoffs(const TimeGridCdf& cdf);

}  // namespace bdssd::stats
