#pragma once

// Birth-and-death kernels and generators on {0..d}, their validation, their
// stationary laws, and the lazy / time-discretization transforms.

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bdssd/error.hpp"
#include "bdssd/matrix.hpp"
#include "bdssd/numeric.hpp"

namespace bdssd {

enum class Monotonicity { Strict, Monotone, NonMonotone };
std::string_view to_string(Monotonicity m);

struct Violation {
  ErrorCode code;
  int index;
  std::string detail;
};

struct ValidationReport {
  bool absorbing_top = false;
  bool ergodic = false;
  bool monotone = false;
  bool strictly_monotone = false;
  Monotonicity monotonicity = Monotonicity::NonMonotone;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

namespace detail {

template <class T>
void check_finite(std::span<const T> values, const char* field) {
  for (const T& v : values)
    if (!Scalar<T>::finite(v))
      throw Error(ErrorCode::InvalidArgument, std::string(field) + " contains a non-finite entry");
}

}  // namespace detail

/// Discrete-time birth-and-death kernel. Births p_0..p_{d-1}, deaths
/// q_1..q_d, holds r_0..r_d. Internally every array has d+1 slots with
/// p_d = q_0 = 0.
template <class T>
class BasicDiscreteKernel {
 public:
  using value_type = T;

  BasicDiscreteKernel(std::vector<T> birth, std::vector<T> death,
                      std::optional<std::vector<T>> hold = std::nullopt) {
    const std::size_t d = birth.size();
    if (d < 1) throw Error(ErrorCode::InvalidArgument, "kernel needs d >= 1");
    if (death.size() != d)
      throw Error(ErrorCode::ShapeMismatch, "death has " + std::to_string(death.size()) +
                                                " entries, expected d = " + std::to_string(d));
    if (hold && hold->size() != d + 1)
      throw Error(ErrorCode::ShapeMismatch, "hold has " + std::to_string(hold->size()) +
                                                " entries, expected d+1 = " +
                                                std::to_string(d + 1));
    detail::check_finite<T>(birth, "birth");
    detail::check_finite<T>(death, "death");
    p_.assign(birth.begin(), birth.end());
    p_.push_back(T(0));
    q_.reserve(d + 1);
    q_.push_back(T(0));
    q_.insert(q_.end(), death.begin(), death.end());
    if (hold) {
      detail::check_finite<T>(*hold, "hold");
      r_ = std::move(*hold);
      explicit_hold_ = true;
    } else {
      r_.resize(d + 1);
      for (std::size_t i = 0; i <= d; ++i) r_[i] = T(1) - p_[i] - q_[i];
    }
  }

  int d() const { return static_cast<int>(p_.size()) - 1; }
  std::size_t size() const { return p_.size(); }

  const T& p(int i) const { return p_[static_cast<std::size_t>(i)]; }
  const T& q(int i) const { return q_[static_cast<std::size_t>(i)]; }
  const T& r(int i) const { return r_[static_cast<std::size_t>(i)]; }

  std::span<const T> births() const { return p_; }
  std::span<const T> deaths() const { return q_; }
  std::span<const T> holds() const { return r_; }
  bool explicit_hold() const { return explicit_hold_; }

  /// Entry P(i, j) of the tridiagonal kernel.
  T operator()(int i, int j) const {
    if (j == i) return r(i);
    if (j == i + 1) return p(i);
    if (j == i - 1) return q(i);
    return T(0);
  }

  Matrix<T> matrix() const {
    Matrix<T> m(size(), size());
    for (int i = 0; i <= d(); ++i) {
      m(i, i) = r(i);
      if (i < d()) m(i, i + 1) = p(i);
      if (i > 0) m(i, i - 1) = q(i);
    }
    return m;
  }

  template <class U>
  BasicDiscreteKernel<U> cast() const {
    std::vector<U> b, dd, h;
    for (int i = 0; i < d(); ++i) b.push_back(scalar_cast<U>(p(i)));
    for (int i = 1; i <= d(); ++i) dd.push_back(scalar_cast<U>(q(i)));
    for (int i = 0; i <= d(); ++i) h.push_back(scalar_cast<U>(r(i)));
    return BasicDiscreteKernel<U>(std::move(b), std::move(dd), std::move(h));
  }

  bool operator==(const BasicDiscreteKernel& o) const {
    return p_ == o.p_ && q_ == o.q_ && r_ == o.r_;
  }

 private:
  std::vector<T> p_, q_, r_;
  bool explicit_hold_ = false;
};

/// Continuous-time birth-and-death generator. Birth rates lambda_0..lambda_{d-1},
/// death rates mu_1..mu_d; the diagonal is -(lambda_i + mu_i).
template <class T>
class BasicContinuousGenerator {
 public:
  using value_type = T;

  BasicContinuousGenerator(std::vector<T> birth, std::vector<T> death) {
    const std::size_t d = birth.size();
    if (d < 1) throw Error(ErrorCode::InvalidArgument, "generator needs d >= 1");
    if (death.size() != d)
      throw Error(ErrorCode::ShapeMismatch, "death has " + std::to_string(death.size()) +
                                                " entries, expected d = " + std::to_string(d));
    detail::check_finite<T>(birth, "birth");
    detail::check_finite<T>(death, "death");
    lambda_.assign(birth.begin(), birth.end());
    lambda_.push_back(T(0));
    mu_.reserve(d + 1);
    mu_.push_back(T(0));
    mu_.insert(mu_.end(), death.begin(), death.end());
  }

  int d() const { return static_cast<int>(lambda_.size()) - 1; }
  std::size_t size() const { return lambda_.size(); }

  const T& birth(int i) const { return lambda_[static_cast<std::size_t>(i)]; }
  const T& death(int i) const { return mu_[static_cast<std::size_t>(i)]; }
  T total_rate(int i) const { return birth(i) + death(i); }

  std::span<const T> births() const { return lambda_; }
  std::span<const T> deaths() const { return mu_; }

  T operator()(int i, int j) const {
    if (j == i) return -total_rate(i);
    if (j == i + 1) return birth(i);
    if (j == i - 1) return death(i);
    return T(0);
  }

  Matrix<T> matrix() const {
    Matrix<T> m(size(), size());
    for (int i = 0; i <= d(); ++i)
      for (int j = std::max(0, i - 1); j <= std::min(d(), i + 1); ++j) m(i, j) = (*this)(i, j);
    return m;
  }

  template <class U>
  BasicContinuousGenerator<U> cast() const {
    std::vector<U> b, dd;
    for (int i = 0; i < d(); ++i) b.push_back(scalar_cast<U>(birth(i)));
    for (int i = 1; i <= d(); ++i) dd.push_back(scalar_cast<U>(death(i)));
    return BasicContinuousGenerator<U>(std::move(b), std::move(dd));
  }

  bool operator==(const BasicContinuousGenerator&) const = default;

 private:
  std::vector<T> lambda_, mu_;
};

using DiscreteKernel = BasicDiscreteKernel<double>;
using ContinuousGenerator = BasicContinuousGenerator<double>;
using ExactKernel = BasicDiscreteKernel<Rational>;
using ExactGenerator = BasicContinuousGenerator<Rational>;

/// Probability mass function on {0..d}.
template <class T>
class Pmf {
 public:
  explicit Pmf(std::vector<T> weights) : w_(std::move(weights)) {
    T sum(0);
    for (std::size_t i = 0; i < w_.size(); ++i) {
      if (w_[i] < 0)
        throw Error(ErrorCode::NegativeEntry, "pmf weight " + std::to_string(i) + " is negative");
      sum += w_[i];
    }
    if (Scalar<T>::abs(sum - T(1)) > Scalar<T>::tolerance())
      throw Error(ErrorCode::RowSumMismatch, "pmf weights sum to " + Scalar<T>::to_string(sum));
  }

  std::size_t size() const { return w_.size(); }
  const T& operator[](std::size_t i) const { return w_[i]; }
  std::span<const T> weights() const { return w_; }

  /// H_j = sum_{i <= j} pi_i, with H_d pinned to exactly 1.
  std::vector<T> cdf() const {
    std::vector<T> h(w_.size());
    T acc(0);
    for (std::size_t i = 0; i < w_.size(); ++i) {
      acc += w_[i];
      h[i] = acc;
    }
    h.back() = T(1);
    return h;
  }

 private:
  std::vector<T> w_;
};

// ---------------------------------------------------------------------------
// Validation

template <class T>
ValidationReport validate_discrete(const BasicDiscreteKernel<T>& k) {
  const T tol = Scalar<T>::tolerance();
  ValidationReport rep;
  const int d = k.d();
  for (int i = 0; i <= d; ++i) {
    if (k.p(i) < 0) rep.violations.push_back({ErrorCode::NegativeEntry, i, "birth p_" + std::to_string(i) + " < 0"});
    if (k.q(i) < 0) rep.violations.push_back({ErrorCode::NegativeEntry, i, "death q_" + std::to_string(i) + " < 0"});
    if (k.r(i) < -tol) rep.violations.push_back({ErrorCode::NegativeEntry, i, "hold r_" + std::to_string(i) + " < 0"});
    if (k.p(i) + k.q(i) > T(1) + tol)
      rep.violations.push_back({ErrorCode::RowSumExceeded, i, "p_" + std::to_string(i) + " + q_" + std::to_string(i) + " > 1"});
    if (Scalar<T>::abs(k.p(i) + k.q(i) + k.r(i) - T(1)) > tol)
      rep.violations.push_back({ErrorCode::RowSumMismatch, i, "row " + std::to_string(i) + " does not sum to 1"});
  }

  rep.absorbing_top = k.q(d) == 0 && Scalar<T>::abs(k.r(d) - T(1)) <= tol;

  bool irreducible = true;
  for (int i = 0; i < d; ++i) irreducible = irreducible && k.p(i) > 0;
  for (int i = 1; i <= d; ++i) irreducible = irreducible && k.q(i) > 0;
  bool some_hold = false;
  for (int i = 0; i <= d; ++i) some_hold = some_hold || k.r(i) > tol;
  rep.ergodic = irreducible && some_hold;

  rep.monotone = true;
  rep.strictly_monotone = true;
  for (int i = 1; i <= d; ++i) {
    const T s = k.p(i - 1) + k.q(i);
    if (s > T(1) + tol) rep.monotone = false;
    if (!(s < T(1))) rep.strictly_monotone = false;
  }
  rep.strictly_monotone = rep.strictly_monotone && rep.monotone;
  rep.monotonicity = rep.strictly_monotone ? Monotonicity::Strict
                     : rep.monotone        ? Monotonicity::Monotone
                                           : Monotonicity::NonMonotone;
  return rep;
}

/// Generators are always stochastically monotone; the report carries the
/// absorbing/ergodic classification and sign violations.
template <class T>
ValidationReport validate_generator(const BasicContinuousGenerator<T>& g) {
  ValidationReport rep;
  const int d = g.d();
  for (int i = 0; i <= d; ++i) {
    if (g.birth(i) < 0) rep.violations.push_back({ErrorCode::NegativeEntry, i, "birth rate lambda_" + std::to_string(i) + " < 0"});
    if (g.death(i) < 0) rep.violations.push_back({ErrorCode::NegativeEntry, i, "death rate mu_" + std::to_string(i) + " < 0"});
  }
  rep.absorbing_top = g.death(d) == 0;
  bool irreducible = true;
  for (int i = 0; i < d; ++i) irreducible = irreducible && g.birth(i) > 0;
  for (int i = 1; i <= d; ++i) irreducible = irreducible && g.death(i) > 0;
  rep.ergodic = irreducible;
  rep.monotone = true;
  rep.strictly_monotone = false;
  rep.monotonicity = Monotonicity::Monotone;
  return rep;
}

template <class T>
void require_ergodic(const BasicDiscreteKernel<T>& k) {
  if (!validate_discrete(k).ergodic) throw Error(ErrorCode::NotErgodic, "kernel is not ergodic");
}

template <class T>
void require_ergodic(const BasicContinuousGenerator<T>& g) {
  if (!validate_generator(g).ergodic)
    throw Error(ErrorCode::NotErgodic, "generator is not irreducible");
}

// ---------------------------------------------------------------------------
// Stationary laws

namespace detail {

template <class T>
Pmf<T> normalize_ratios(std::vector<T> w) {
  T sum(0);
  for (const T& x : w) sum += x;
  for (T& x : w) x /= sum;
  if constexpr (!Scalar<T>::exact) {
    // Absorb the rounding residue into the largest weight.
    T total(0);
    for (const T& x : w) total += x;
    auto it = std::max_element(w.begin(), w.end());
    *it += T(1) - total;
  }
  return Pmf<T>(std::move(w));
}

}  // namespace detail

/// Detailed balance: pi_{i+1} / pi_i = p_i / q_{i+1}.
template <class T>
Pmf<T> stationary_pmf(const BasicDiscreteKernel<T>& k) {
  require_ergodic(k);
  std::vector<T> w(k.size());
  w[0] = T(1);
  for (int i = 0; i < k.d(); ++i) w[i + 1] = w[i] * k.p(i) / k.q(i + 1);
  return detail::normalize_ratios(std::move(w));
}

template <class T>
Pmf<T> stationary_pmf(const BasicContinuousGenerator<T>& g) {
  require_ergodic(g);
  std::vector<T> w(g.size());
  w[0] = T(1);
  for (int i = 0; i < g.d(); ++i) w[i + 1] = w[i] * g.birth(i) / g.death(i + 1);
  return detail::normalize_ratios(std::move(w));
}

// ---------------------------------------------------------------------------
// Transforms

/// (1 - eps) I + eps P.
template <class T>
BasicDiscreteKernel<T> lazy(const BasicDiscreteKernel<T>& k, const T& eps) {
  if (!(eps > 0 && eps < 1))
    throw Error(ErrorCode::EpsOutOfRange, "lazy eps must lie in (0, 1), got " + Scalar<T>::to_string(eps));
  std::vector<T> b, dd, h;
  for (int i = 0; i < k.d(); ++i) b.push_back(eps * k.p(i));
  for (int i = 1; i <= k.d(); ++i) dd.push_back(eps * k.q(i));
  for (int i = 0; i <= k.d(); ++i) h.push_back(T(1) - eps + eps * k.r(i));
  return BasicDiscreteKernel<T>(std::move(b), std::move(dd), std::move(h));
}

/// Largest step with every hold >= 1/2: (2 max_i (lambda_i + mu_i))^{-1}.
/// The zero generator gets step 1.
template <class T>
T auto_eps(const BasicContinuousGenerator<T>& g) {
  T top(0);
  for (int i = 0; i <= g.d(); ++i) top = std::max<T>(top, g.total_rate(i));
  if (top == 0) return T(1);
  return T(1) / (T(2) * top);
}

/// I + eps G.
template <class T>
BasicDiscreteKernel<T> discretize(const BasicContinuousGenerator<T>& g, const T& eps) {
  if (!(eps > 0)) throw Error(ErrorCode::EpsOutOfRange, "discretization step must be positive");
  for (int i = 0; i <= g.d(); ++i)
    if (eps * g.total_rate(i) > T(1) + Scalar<T>::tolerance())
      throw Error(ErrorCode::EpsTooLarge, "eps * (lambda_" + std::to_string(i) + " + mu_" +
                                              std::to_string(i) + ") exceeds 1");
  std::vector<T> b, dd, h;
  for (int i = 0; i < g.d(); ++i) b.push_back(eps * g.birth(i));
  for (int i = 1; i <= g.d(); ++i) dd.push_back(eps * g.death(i));
  for (int i = 0; i <= g.d(); ++i) {
    const T pi = i < g.d() ? b[i] : T(0);
    const T qi = i > 0 ? dd[i - 1] : T(0);
    h.push_back(T(1) - pi - qi);
  }
  return BasicDiscreteKernel<T>(std::move(b), std::move(dd), std::move(h));
}

/// Ehrenfest urn with holding probability 1/2: p_i = (d-i)/(2d), q_i = i/(2d).
template <class T>
BasicDiscreteKernel<T> ehrenfest_kernel(int d) {
  std::vector<T> b, dd;
  for (int i = 0; i < d; ++i) b.push_back(T(d - i) / T(2 * d));
  for (int i = 1; i <= d; ++i) dd.push_back(T(i) / T(2 * d));
  return BasicDiscreteKernel<T>(std::move(b), std::move(dd));
}

/// Continuous Ehrenfest: lambda_i = d - i, mu_i = i.
template <class T>
BasicContinuousGenerator<T> ehrenfest_generator(int d) {
  std::vector<T> b, dd;
  for (int i = 0; i < d; ++i) b.push_back(T(d - i));
  for (int i = 1; i <= d; ++i) dd.push_back(T(i));
  return BasicContinuousGenerator<T>(std::move(b), std::move(dd));
}

}  // namespace bdssd
