#include "bdssd/spectral.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>

namespace bdssd {

double Spectrum::min() const { return *std::min_element(values.begin(), values.end()); }
double Spectrum::max() const { return *std::max_element(values.begin(), values.end()); }

namespace {

// Number of eigenvalues strictly below x (LDL^T inertia of T - xI).
int sturm_count(std::span<const double> diag, std::span<const double> off2, double x,
                double pivmin) {
  int count = 0;
  double q = diag[0] - x;
  if (std::fabs(q) < pivmin) q = -pivmin;
  if (q < 0) ++count;
  for (std::size_t i = 1; i < diag.size(); ++i) {
    q = diag[i] - x - off2[i - 1] / q;
    if (std::fabs(q) < pivmin) q = -pivmin;
    if (q < 0) ++count;
  }
  return count;
}

}  // namespace

std::vector<double> symmetric_tridiagonal_eigenvalues(std::span<const double> diag,
                                                      std::span<const double> off) {
  const std::size_t n = diag.size();
  if (n == 0) return {};
  if (off.size() + 1 != n)
    throw Error(ErrorCode::ShapeMismatch, "tridiagonal off-diagonal must have n-1 entries");
  if (n == 1) return {diag[0]};

  std::vector<double> off2(n - 1);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double max_off2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? std::fabs(off[i - 1]) : 0.0;
    const double right = i + 1 < n ? std::fabs(off[i]) : 0.0;
    lo = std::min(lo, diag[i] - left - right);
    hi = std::max(hi, diag[i] + left + right);
    if (i + 1 < n) {
      off2[i] = off[i] * off[i];
      max_off2 = std::max(max_off2, off2[i]);
    }
  }
  const double scale = std::max(std::fabs(lo), std::fabs(hi));
  const double pivmin = DBL_MIN * std::max(1.0, max_off2);
  const double abs_tol = std::max(scale, 1.0) * 1e-18;
  lo -= 2 * DBL_EPSILON * scale + pivmin;
  hi += 2 * DBL_EPSILON * scale + pivmin;

  std::vector<double> eig(n);
  for (std::size_t k = 0; k < n; ++k) {
    double a = lo, b = hi;
    for (int iter = 0; iter < 400; ++iter) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (b - a <= 2 * DBL_EPSILON * std::max(std::fabs(a), std::fabs(b)) + abs_tol) break;
      if (sturm_count(diag, off2, mid, pivmin) > static_cast<int>(k))
        b = mid;
      else
        a = mid;
    }
    eig[k] = 0.5 * (a + b);
  }
  std::sort(eig.begin(), eig.end());
  return eig;
}

namespace {

// Splits a tridiagonal matrix at zero coupling products. Each block is
// symmetrized by the usual diagonal similarity; the full spectrum is the
// union of block spectra since the matrix is block triangular.
template <class Diag, class Product>
std::vector<double> blockwise_eigenvalues(int d, Diag diag_of, Product product_of) {
  std::vector<double> all;
  int start = 0;
  for (int i = 0; i <= d; ++i) {
    const bool cut = i == d || product_of(i) == 0.0;
    if (!cut) continue;
    std::vector<double> diag, off;
    for (int j = start; j <= i; ++j) diag.push_back(diag_of(j));
    for (int j = start; j < i; ++j) off.push_back(std::sqrt(product_of(j)));
    auto block = symmetric_tridiagonal_eigenvalues(diag, off);
    all.insert(all.end(), block.begin(), block.end());
    start = i + 1;
  }
  std::sort(all.begin(), all.end());
  return all;
}

void pin_closest(std::vector<double>& values, double target) {
  auto it = std::min_element(values.begin(), values.end(), [&](double a, double b) {
    return std::fabs(a - target) < std::fabs(b - target);
  });
  *it = target;
}

}  // namespace

Spectrum eigenvalues_discrete(const DiscreteKernel& kernel) {
  const int d = kernel.d();
  auto values = blockwise_eigenvalues(
      d, [&](int j) { return kernel.r(j); },
      [&](int j) { return kernel.p(j) * kernel.q(j + 1); });
  // Stochastic kernels always have eigenvalue 1; pin it and keep it last.
  if (validate_discrete(kernel).ok()) {
    pin_closest(values, 1.0);
    std::sort(values.begin(), values.end());
    auto one = std::find(values.begin(), values.end(), 1.0);
    std::rotate(one, one + 1, values.end());
  }
  return {TimeType::Discrete, std::move(values)};
}

Spectrum eigenvalues_generator(const ContinuousGenerator& gen) {
  const int d = gen.d();
  auto values = blockwise_eigenvalues(
      d, [&](int j) { return gen.total_rate(j); },
      [&](int j) { return gen.birth(j) * gen.death(j + 1); });
  pin_closest(values, 0.0);
  std::sort(values.begin(), values.end(), std::greater<>());
  auto zero = std::find(values.begin(), values.end(), 0.0);
  std::rotate(zero, zero + 1, values.end());
  return {TimeType::Continuous, std::move(values)};
}

Matrix<double> QFamily::link() const {
  const std::size_t n = q.size();
  Matrix<double> link(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j) link(k, j) = q[k](0, j);
  return link;
}

namespace {

// Clamps tiny negative entries and renormalizes rows. Returns the most
// negative entry seen before clamping.
double clamp_rows(Matrix<double>& m, std::size_t k) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double sum = 0.0;
    for (double& x : m.row(i)) {
      worst = std::min(worst, x);
      if (x < -kQClamp)
        throw Error(ErrorCode::StochasticityViolation,
                    "Q_" + std::to_string(k) + " has entry " + Scalar<double>::to_string(x) +
                        " in row " + std::to_string(i));
      if (x < 0) x = 0.0;
      sum += x;
    }
    for (double& x : m.row(i)) x /= sum;
  }
  return worst;
}

void check_top_rows(const Matrix<double>& top, std::span<const double> pi) {
  for (std::size_t i = 0; i < top.rows(); ++i) {
    double dev = 0.0;
    for (std::size_t j = 0; j < top.cols(); ++j) dev += std::fabs(top(i, j) - pi[j]);
    if (dev > 1e-10)
      throw Error(ErrorCode::StochasticityViolation,
                  "row " + std::to_string(i) + " of Q_d deviates from pi by " +
                      Scalar<double>::to_string(dev));
  }
}

}  // namespace

QFamily q_family_discrete(const DiscreteKernel& kernel, const Spectrum& spec) {
  require_ergodic(kernel);
  const int d = kernel.d();
  if (spec.time != TimeType::Discrete || spec.values.size() != kernel.size())
    throw Error(ErrorCode::ShapeMismatch, "spectrum does not belong to this kernel");
  std::vector<double> theta = spec.values;
  for (double& t : theta) {
    if (t < -kNegativeEigenvalueSnap)
      throw Error(ErrorCode::NegativeEigenvalue,
                  "eigenvalue " + Scalar<double>::to_string(t) + " < 0");
    if (t < 0) t = 0.0;
  }

  QFamily fam;
  fam.spectrum = {TimeType::Discrete, theta};
  fam.q.push_back(Matrix<double>::identity(kernel.size()));
  for (int k = 0; k < d; ++k) {
    const double gap = 1.0 - theta[k];
    if (std::fabs(gap) < 1e-13)
      throw Error(ErrorCode::DegenerateSpectrum,
                  "theta_" + std::to_string(k) + " is numerically 1 before the last level");
    const Matrix<double>& cur = fam.q.back();
    Matrix<double> next(kernel.size(), kernel.size());
    for (int i = 0; i <= d; ++i)
      for (int j = 0; j <= d; ++j) {
        double qp = cur(i, j) * kernel.r(j);
        if (j > 0) qp += cur(i, j - 1) * kernel.p(j - 1);
        if (j < d) qp += cur(i, j + 1) * kernel.q(j + 1);
        next(i, j) = (qp - theta[k] * cur(i, j)) / gap;
      }
    fam.min_entry_before_clamp = std::min(fam.min_entry_before_clamp, clamp_rows(next, k + 1));
    fam.q.push_back(std::move(next));
  }
  check_top_rows(fam.q.back(), stationary_pmf(kernel).weights());
  return fam;
}

QFamily q_family_discrete(const DiscreteKernel& kernel) {
  return q_family_discrete(kernel, eigenvalues_discrete(kernel));
}

QFamily q_family_continuous(const ContinuousGenerator& gen, const Spectrum& spec) {
  require_ergodic(gen);
  const int d = gen.d();
  if (spec.time != TimeType::Continuous || spec.values.size() != gen.size())
    throw Error(ErrorCode::ShapeMismatch, "spectrum does not belong to this generator");
  const std::vector<double>& nu = spec.values;
  const double top = nu.front();

  QFamily fam;
  fam.spectrum = spec;
  fam.q.push_back(Matrix<double>::identity(gen.size()));
  for (int k = 0; k < d; ++k) {
    if (!(nu[k] > 1e-13 * top))
      throw Error(ErrorCode::DegenerateSpectrum,
                  "nu_" + std::to_string(k) + " is numerically 0 before the last level");
    const Matrix<double>& cur = fam.q.back();
    Matrix<double> next(gen.size(), gen.size());
    for (int i = 0; i <= d; ++i)
      for (int j = 0; j <= d; ++j) {
        double qg = -cur(i, j) * gen.total_rate(j);
        if (j > 0) qg += cur(i, j - 1) * gen.birth(j - 1);
        if (j < d) qg += cur(i, j + 1) * gen.death(j + 1);
        next(i, j) = cur(i, j) + qg / nu[k];
      }
    fam.min_entry_before_clamp = std::min(fam.min_entry_before_clamp, clamp_rows(next, k + 1));
    fam.q.push_back(std::move(next));
  }
  check_top_rows(fam.q.back(), stationary_pmf(gen).weights());
  return fam;
}

QFamily q_family_continuous(const ContinuousGenerator& gen) {
  return q_family_continuous(gen, eigenvalues_generator(gen));
}

}  // namespace bdssd
