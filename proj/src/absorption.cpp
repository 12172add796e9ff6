#include "bdssd/absorption.hpp"

#include <algorithm>
#include <cmath>

#include "bdssd/spectral.hpp"

namespace bdssd {

double LatticePmf::cdf(std::size_t t) const {
  double acc = 0.0;
  const std::size_t end = std::min(t + 1, weights.size());
  for (std::size_t i = 0; i < end; ++i) acc += weights[i];
  return acc;
}

double LatticePmf::pgf(double u) const {
  double acc = 0.0;
  for (std::size_t i = weights.size(); i-- > 0;) acc = acc * u + weights[i];
  return acc;
}

double LatticePmf::mean() const {
  double acc = 0.0;
  for (std::size_t t = 0; t < weights.size(); ++t) acc += static_cast<double>(t) * weights[t];
  return acc;
}

double l1_distance(const LatticePmf& a, const LatticePmf& b) {
  const std::size_t n = std::max(a.weights.size(), b.weights.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < n; ++t) acc += std::fabs(a.at(t) - b.at(t));
  return acc;
}

namespace {

void require_absorbing_path(const DiscreteKernel& kernel) {
  const auto rep = validate_discrete(kernel);
  if (!rep.ok()) throw Error(ErrorCode::InvalidArgument, "kernel is not stochastic");
  if (!rep.absorbing_top) throw Error(ErrorCode::NoAbsorption, "top state is not absorbing");
  for (int i = 0; i < kernel.d(); ++i)
    if (!(kernel.p(i) > 0))
      throw Error(ErrorCode::NoAbsorption, "p_" + std::to_string(i) + " = 0 blocks the path to d");
}

void require_absorbing_path(const ContinuousGenerator& gen) {
  const auto rep = validate_generator(gen);
  if (!rep.ok()) throw Error(ErrorCode::InvalidArgument, "generator has negative rates");
  if (!rep.absorbing_top) throw Error(ErrorCode::NoAbsorption, "top state is not absorbing");
  for (int i = 0; i < gen.d(); ++i)
    if (!(gen.birth(i) > 0))
      throw Error(ErrorCode::NoAbsorption, "lambda_" + std::to_string(i) + " = 0 blocks the path to d");
}

void require_increasing(std::span<const double> times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || !std::isfinite(times[i]))
      throw Error(ErrorCode::InvalidArgument, "time points must be finite and nonnegative");
    if (i > 0 && !(times[i] > times[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "time points must be strictly increasing");
  }
}

}  // namespace

LatticePmf absorption_pmf(const DiscreteKernel& kernel, double tol) {
  require_absorbing_path(kernel);
  const int d = kernel.d();
  // Mass on the transient states 0..d-1.
  std::vector<double> a(static_cast<std::size_t>(d), 0.0), next(a.size());
  a[0] = 1.0;
  LatticePmf out;
  out.weights.push_back(0.0);
  double survival = 1.0;
  for (std::size_t t = 1; survival >= tol; ++t) {
    if (t > kAbsorptionStepCap)
      throw Error(ErrorCode::CapExceeded, "absorption tail still " + Scalar<double>::to_string(survival) +
                                              " after " + std::to_string(kAbsorptionStepCap) + " steps");
    // Mass entering d at step t comes only from d-1.
    out.weights.push_back(a[d - 1] * kernel.p(d - 1));
    survival = 0.0;
    for (int j = 0; j < d; ++j) {
      double v = a[j] * kernel.r(j);
      if (j > 0) v += a[j - 1] * kernel.p(j - 1);
      if (j + 1 < d) v += a[j + 1] * kernel.q(j + 1);
      next[j] = v;
      survival += v;
    }
    a.swap(next);
  }
  out.tail = survival;
  return out;
}

LatticePmf geometric_convolution(std::span<const double> thetas, double tol) {
  for (double th : thetas)
    if (!(th >= 0.0 && th < 1.0))
      throw Error(ErrorCode::ThetaOutOfRange, "failure probability " + Scalar<double>::to_string(th) +
                                                  " outside [0, 1)");
  if (thetas.empty()) return {{1.0}, 0.0};

  double mean = 0.0;
  for (double th : thetas) mean += 1.0 / (1.0 - th);
  std::size_t horizon = std::max<std::size_t>(64, static_cast<std::size_t>(4 * mean));
  for (;;) {
    if (horizon > 100'000'000)
      throw Error(ErrorCode::CapExceeded, "geometric convolution horizon exceeds 1e8");
    std::vector<double> f(horizon + 1, 0.0), g(horizon + 1);
    f[0] = 1.0;
    double tail = 0.0;
    for (double th : thetas) {
      // P(Y > H) = sum_k P(X = k) theta^{H-k} + P(X > H), with Y = X + G.
      double beyond = 0.0;
      for (std::size_t k = 0; k <= horizon; ++k) beyond = beyond * th + f[k];
      tail += beyond;
      // g(t) = theta g(t-1) + (1 - theta) f(t-1)
      g[0] = 0.0;
      for (std::size_t t = 1; t <= horizon; ++t) g[t] = th * g[t - 1] + (1.0 - th) * f[t - 1];
      f.swap(g);
    }
    if (tail < tol) return {std::move(f), tail};
    horizon *= 2;
  }
}

double pgf_product(std::span<const double> thetas, double u) {
  double acc = 1.0;
  for (double th : thetas) {
    if (!(th >= -1.0 && th < 1.0))
      throw Error(ErrorCode::ThetaOutOfRange, "eigenvalue " + Scalar<double>::to_string(th) +
                                                  " outside [-1, 1)");
    const double den = 1.0 - th * u;
    if (std::fabs(den) < 1e-14)
      throw Error(ErrorCode::PoleProximity, "1 - theta u vanishes at u = " + Scalar<double>::to_string(u));
    if (!(std::fabs(th * u) < 1.0))
      throw Error(ErrorCode::InvalidArgument, "|theta u| must be below 1");
    acc *= (1.0 - th) * u / den;
  }
  return acc;
}

double lazy_pgf_identity_check(const DiscreteKernel& kernel, double eps, double s) {
  const DiscreteKernel lz = lazy(kernel, eps);
  if (eigenvalues_discrete(lz).min() <= 0.0)
    throw Error(ErrorCode::NegativeEigenvalue, "lazy kernel has a nonpositive eigenvalue");
  const double w = eps * s / (1.0 - (1.0 - eps) * s);
  return std::fabs(absorption_pmf(lz).pgf(s) - absorption_pmf(kernel).pgf(w));
}

TimeGridCdf absorption_cdf_continuous(const ContinuousGenerator& gen, std::span<const double> times,
                                      double tol) {
  require_absorbing_path(gen);
  require_increasing(times);
  const int d = gen.d();
  double rate = 0.0;
  for (int i = 0; i <= d; ++i) rate = std::max(rate, gen.total_rate(i));

  // survival[k] = P(uniformized chain not absorbed after k jumps).
  std::vector<double> a(static_cast<std::size_t>(d), 0.0), next(a.size());
  a[0] = 1.0;
  std::vector<double> survival{1.0};
  auto extend_to = [&](std::size_t k) {
    while (survival.size() <= k) {
      double s = 0.0;
      for (int j = 0; j < d; ++j) {
        double v = a[j] * (1.0 - gen.total_rate(j) / rate);
        if (j > 0) v += a[j - 1] * gen.birth(j - 1) / rate;
        if (j + 1 < d) v += a[j + 1] * gen.death(j + 1) / rate;
        next[j] = v;
        s += v;
      }
      a.swap(next);
      survival.push_back(s);
    }
  };

  // Poisson weights beyond mean + width stay below the tolerance.
  const double width_sigmas = std::sqrt(2.0 * -std::log(tol)) + 2.0;
  TimeGridCdf out{{times.begin(), times.end()}, {}};
  for (double t : times) {
    const double m = rate * t;
    if (m == 0.0) {
      out.values.push_back(0.0);
      continue;
    }
    const auto hi = static_cast<std::size_t>(std::ceil(m + width_sigmas * std::sqrt(m) + 40.0));
    const auto lo = static_cast<std::size_t>(std::max(0.0, std::floor(m - width_sigmas * std::sqrt(m) - 40.0)));
    extend_to(hi);
    const double log_m = std::log(m);
    double surv = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) {
      const double lp = -m + static_cast<double>(k) * log_m - std::lgamma(static_cast<double>(k) + 1.0);
      if (lp < -745.0) continue;
      surv += std::exp(lp) * survival[k];
    }
    out.values.push_back(std::clamp(1.0 - surv, 0.0, 1.0));
  }
  return out;
}

TimeGridCdf hypoexponential_cdf(std::span<const double> rates, std::span<const double> times) {
  for (double nu : rates)
    if (!(nu > 0.0) || !std::isfinite(nu))
      throw Error(ErrorCode::NonpositiveRate, "rate " + Scalar<double>::to_string(nu) + " is not positive");
  require_increasing(times);
  TimeGridCdf out{{times.begin(), times.end()}, {}};
  if (rates.empty()) {
    out.values.assign(times.size(), 1.0);
    return out;
  }

  std::vector<double> nu(rates.begin(), rates.end());
  std::sort(nu.begin(), nu.end());
  const double top = nu.back();
  bool distinct = true;
  for (std::size_t i = 1; i < nu.size(); ++i)
    if (nu[i] - nu[i - 1] <= kHypoRelativeGap * top) distinct = false;

  std::vector<double> w(nu.size(), 1.0);
  double weight_mass = 0.0;
  if (distinct) {
    for (std::size_t i = 0; i < nu.size(); ++i) {
      for (std::size_t j = 0; j < nu.size(); ++j)
        if (j != i) w[i] *= nu[j] / (nu[j] - nu[i]);
      weight_mass += std::fabs(w[i]);
    }
  }

  if (!distinct || weight_mass > kHypoWeightLimit) {
    // Pure-birth chain through the rates, absorbed after the last one.
    ContinuousGenerator chain(nu, std::vector<double>(nu.size(), 0.0));
    return absorption_cdf_continuous(chain, times);
  }

  for (double t : times) {
    double surv = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) surv += w[i] * std::exp(-nu[i] * t);
    out.values.push_back(std::clamp(1.0 - surv, 0.0, 1.0));
  }
  return out;
}

double discretization_cdf_gap(const ContinuousGenerator& gen, double eps, std::span<const double> times) {
  const LatticePmf pmf = absorption_pmf(discretize(gen, eps));
  const TimeGridCdf exact = absorption_cdf_continuous(gen, times);
  std::vector<double> cumulative(pmf.weights.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < pmf.weights.size(); ++k) cumulative[k] = acc += pmf.weights[k];

  double gap = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto steps = static_cast<std::size_t>(std::floor(times[i] / eps + 1e-9));
    const double scaled = steps < cumulative.size() ? cumulative[steps] : 1.0 - pmf.tail;
    gap = std::max(gap, std::fabs(scaled - exact.values[i]));
  }
  return gap;
}

OccupationQuery::OccupationQuery(std::vector<double> u) : u_(std::move(u)) {
  if (u_.empty()) throw Error(ErrorCode::InvalidArgument, "occupation query needs at least one weight");
  for (double x : u_)
    if (!(x > 0.0) || !std::isfinite(x))
      throw Error(ErrorCode::InvalidArgument, "occupation weights must be strictly positive");
}

Matrix<double> killed_generator(const ContinuousGenerator& gen) {
  const int d = gen.d();
  Matrix<double> a(static_cast<std::size_t>(d), static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    a(i, i) = gen.total_rate(i);
    if (i + 1 < d) a(i, i + 1) = -gen.birth(i);
    if (i > 0) a(i, i - 1) = -gen.death(i);
  }
  return a;
}

namespace {

double checked_determinant(const Matrix<double>& a) {
  double scale = 1.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double row = 0.0;
    for (double x : a.row(i)) row += std::fabs(x);
    scale *= row;
  }
  const double det = determinant(a);
  if (!(std::fabs(det) > 1e-13 * scale))
    throw Error(ErrorCode::SingularMatrix, "killed generator is singular; the chain cannot reach d");
  return det;
}

}  // namespace

double occupation_laplace(const ContinuousGenerator& gen, const OccupationQuery& query) {
  const Matrix<double> a = killed_generator(gen);
  if (query.size() != a.rows())
    throw Error(ErrorCode::ShapeMismatch, "occupation query needs d = " + std::to_string(a.rows()) + " weights");
  Matrix<double> shifted = a;
  for (std::size_t i = 0; i < a.rows(); ++i) shifted(i, i) += query.values()[i];
  return checked_determinant(a) / determinant(shifted);
}

Matrix<double> gaussian_covariance(const ContinuousGenerator& gen) {
  const int d = gen.d();
  for (int i = 1; i < d; ++i)
    if (!(gen.death(i) > 0.0) || !(gen.birth(i - 1) > 0.0))
      throw Error(ErrorCode::SingularMatrix, "rates among 0..d-1 are not irreducible");
  std::vector<double> pi(static_cast<std::size_t>(d));
  pi[0] = 1.0;
  double sum = 1.0;
  for (int i = 0; i + 1 < d; ++i) sum += pi[i + 1] = pi[i] * gen.birth(i) / gen.death(i + 1);
  for (double& x : pi) x /= sum;

  const Matrix<double> a = killed_generator(gen);
  checked_determinant(a);
  Matrix<double> s(a.rows(), a.cols());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s(i, j) = std::sqrt(pi[i]) * a(i, j) / std::sqrt(pi[j]);
  Matrix<double> sigma = inverse(s);
  for (std::size_t i = 0; i < sigma.rows(); ++i)
    for (double& x : sigma.row(i)) x *= 0.5;
  return sigma;
}

double gaussian_split_residual(const ContinuousGenerator& gen, const OccupationQuery& query) {
  const double direct = occupation_laplace(gen, query);
  const Matrix<double> sigma = gaussian_covariance(gen);
  const std::size_t n = sigma.rows();
  Matrix<double> m = Matrix<double>::identity(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) += 2.0 * sigma(i, j) * query.values()[j];
  return std::fabs(direct - 1.0 / determinant(m));
}

}  // namespace bdssd
