#include "bdssd/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

namespace bdssd::stats {

double ks_distance_lattice(std::span<const std::int64_t> samples, const LatticePmf& law) {
  if (samples.empty()) return 0.0;
  std::vector<std::int64_t> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const auto top = static_cast<std::size_t>(std::max<std::int64_t>(sorted.back(), 0));
  const std::size_t horizon = std::max(top, law.horizon());

  double worst = 0.0, exact = 0.0;
  std::size_t idx = 0;
  for (std::size_t t = 0; t <= horizon; ++t) {
    exact += law.at(t);
    while (idx < sorted.size() && sorted[idx] <= static_cast<std::int64_t>(t)) ++idx;
    worst = std::max(worst, std::fabs(static_cast<double>(idx) / n - exact));
  }
  return worst;
}

double ks_distance_continuous(std::span<const double> samples,
                              const std::function<std::vector<double>(std::span<const double>)>& cdf) {
  if (samples.empty()) return 0.0;
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  // Distinct evaluation points; ties share one cdf value.
  std::vector<double> points;
  for (double x : sorted)
    if (points.empty() || x > points.back()) points.push_back(x);
  const std::vector<double> values = cdf(points);
  const double n = static_cast<double>(sorted.size());
  double worst = 0.0;
  std::size_t idx = 0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double below = static_cast<double>(idx) / n;
    while (idx < sorted.size() && sorted[idx] <= points[k]) ++idx;
    const double upto = static_cast<double>(idx) / n;
    worst = std::max({worst, std::fabs(upto - values[k]), std::fabs(values[k] - below)});
  }
  return worst;
}

double total_variation(std::span<const std::uint64_t> counts, std::span<const double> pmf) {
  double n = 0.0;
  for (auto c : counts) n += static_cast<double>(c);
  if (n == 0.0) return 0.0;
  const std::size_t len = std::max(counts.size(), pmf.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double emp = i < counts.size() ? static_cast<double>(counts[i]) / n : 0.0;
    const double ref = i < pmf.size() ? pmf[i] : 0.0;
    acc += std::fabs(emp - ref);
  }
  return 0.5 * acc;
}

double chi_square_survival(double statistic, int dof) {
  if (dof <= 0) return 1.0;
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * statistic);
}

ChiSquareResult chi_square_independence(const std::vector<std::vector<std::uint64_t>>& table) {
  std::vector<double> rows, cols;
  if (!table.empty()) cols.assign(table.front().size(), 0.0);
  double total = 0.0;
  for (const auto& row : table) {
    double r = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      r += static_cast<double>(row[j]);
      cols[j] += static_cast<double>(row[j]);
    }
    rows.push_back(r);
    total += r;
  }
  const auto nonempty = [](const std::vector<double>& v) {
    return static_cast<int>(std::count_if(v.begin(), v.end(), [](double x) { return x > 0.0; }));
  };
  const int nr = nonempty(rows), nc = nonempty(cols);
  ChiSquareResult out;
  if (nr < 2 || nc < 2) return out;

  for (std::size_t i = 0; i < table.size(); ++i) {
    if (rows[i] == 0.0) continue;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (cols[j] == 0.0) continue;
      const double expected = rows[i] * cols[j] / total;
      const double diff = static_cast<double>(table[i][j]) - expected;
      out.statistic += diff * diff / expected;
    }
  }
  out.dof = (nr - 1) * (nc - 1);
  out.p_value = chi_square_survival(out.statistic, out.dof);
  return out;
}

std::vector<std::int64_t> decile_cutoffs(const LatticePmf& law) {
  std::vector<std::int64_t> cuts;
  double acc = 0.0;
  std::size_t level = 1;
  for (std::size_t t = 0; t <= law.horizon() && level < 10; ++t) {
    acc += law.at(t);
    bool crossed = false;
    while (level < 10 && acc >= 0.1 * static_cast<double>(level)) {
      ++level;
      crossed = true;
    }
    if (crossed) cuts.push_back(static_cast<std::int64_t>(t));
  }
  return cuts;
}

std::vector<double> decile_cutoffs(const TimeGridCdf& cdf) {
  std::vector<double> cuts;
  std::size_t level = 1;
  for (std::size_t i = 0; i < cdf.times.size() && level < 10; ++i) {
    bool crossed = false;
    while (level < 10 && cdf.values[i] >= 0.1 * static_cast<double>(level)) {
      ++level;
      crossed = true;
    }
    if (crossed) cuts.push_back(cdf.times[i]);
  }
  return cuts;
}

}  // namespace bdssd::stats
