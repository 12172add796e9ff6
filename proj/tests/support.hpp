#pragma once

// Seeded random chains and independent reference computations for tests.
// Nothing here calls into the routines it is used to check.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "bdssd/chain.hpp"
#include "bdssd/matrix.hpp"

namespace bdssd::testing {

inline std::string fixture(const std::string& name) { return std::string(BDSSD_FIXTURES) + "/" + name; }

/// Uniform rational in [lo, hi] with the given denominator.
inline Rational random_rational(std::mt19937_64& rng, const Rational& lo, const Rational& hi, long den = 97) {
  std::uniform_int_distribution<long> pick(0, den);
  Rational step(pick(rng), den);
  step.canonicalize();
  return lo + (hi - lo) * step;
}

inline Rational random_open_rational(std::mt19937_64& rng, const Rational& lo, const Rational& hi,
                                     long den = 97) {
  std::uniform_int_distribution<long> pick(1, den - 1);
  Rational step(pick(rng), den);
  step.canonicalize();
  return lo + (hi - lo) * step;
}

/// Holds in (1/2, 9/10) make every eigenvalue positive and the kernel
/// strictly monotone; the top state is absorbing.
inline ExactKernel random_absorbing_kernel(std::mt19937_64& rng, int d) {
  std::vector<Rational> birth, death, hold;
  for (int i = 0; i < d; ++i) {
    const Rational r = random_open_rational(rng, Rational(1, 2), Rational(9, 10));
    const Rational move = 1 - r;
    if (i == 0) {
      birth.push_back(move);
    } else {
      const Rational share = random_open_rational(rng, Rational(1, 10), Rational(9, 10));
      birth.push_back(move * share);
      death.push_back(move * (1 - share));
    }
    hold.push_back(r);
  }
  death.push_back(0);
  hold.push_back(1);
  return ExactKernel(birth, death, hold);
}

/// Strictly monotone absorbing kernel without the holding constraint, so
/// negative eigenvalues can occur.
inline ExactKernel random_strict_absorbing_kernel(std::mt19937_64& rng, int d) {
  for (;;) {
    std::vector<Rational> birth, death;
    for (int i = 0; i < d; ++i) birth.push_back(random_open_rational(rng, Rational(0), Rational(1)));
    for (int i = 1; i < d; ++i) death.push_back(random_open_rational(rng, Rational(0), Rational(1)));
    death.push_back(0);
    bool ok = true;
    for (int i = 1; i < d && ok; ++i) ok = birth[i] + death[i - 1] < 1;
    for (int i = 1; i < d && ok; ++i) ok = birth[i - 1] + death[i - 1] < 1;
    if (ok) return ExactKernel(birth, death);
  }
}

/// Ergodic kernel with holds at least 1/2, hence nonnegative spectrum.
inline DiscreteKernel random_lazy_ergodic_kernel(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::vector<double> birth(d), death(d);
  std::vector<double> out(d + 1, 0.0), in(d + 1, 0.0);
  for (int i = 0; i <= d; ++i) {
    const double budget = 0.5 * u(rng);
    const double share = u(rng);
    if (i < d) out[i] = i == 0 ? budget : budget * share;
    if (i > 0) in[i] = i == d ? budget : budget * (1.0 - share);
  }
  for (int i = 0; i < d; ++i) birth[i] = out[i];
  for (int i = 1; i <= d; ++i) death[i - 1] = in[i];
  return DiscreteKernel(birth, death);
}

inline ExactGenerator random_absorbing_generator(std::mt19937_64& rng, int d) {
  std::vector<Rational> birth, death;
  for (int i = 0; i < d; ++i) birth.push_back(random_rational(rng, Rational(1, 4), Rational(4), 31));
  for (int i = 1; i < d; ++i) death.push_back(random_rational(rng, Rational(1, 4), Rational(4), 31));
  death.push_back(0);
  return ExactGenerator(birth, death);
}

inline ContinuousGenerator random_ergodic_generator(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(0.2, 3.0);
  std::vector<double> birth(d), death(d);
  for (auto& b : birth) b = u(rng);
  for (auto& m : death) m = u(rng);
  return ContinuousGenerator(birth, death);
}

// ---------------------------------------------------------------------------
// Reference computations

/// Dense product of plain nested vectors.
inline std::vector<std::vector<double>> dense(const Matrix<double>& m) {
  std::vector<std::vector<double>> out(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

inline std::vector<double> row_times(const std::vector<double>& v, const std::vector<std::vector<double>>& a) {
  std::vector<double> out(a[0].size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += v[i] * a[i][j];
  return out;
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

/// Symmetrize a tridiagonal matrix with positive off-diagonal products.
inline std::vector<std::vector<double>> symmetrized(const std::vector<std::vector<double>>& m) {
  auto s = m;
  for (std::size_t i = 0; i + 1 < m.size(); ++i) {
    const double v = std::sqrt(m[i][i + 1] * m[i + 1][i]);
    s[i][i + 1] = s[i + 1][i] = v;
  }
  return s;
}

/// Left Perron vector by power iteration on an aperiodic (lazy) kernel.
inline std::vector<double> power_iteration_pi(const std::vector<std::vector<double>>& p, int iters = 200000) {
  std::vector<double> v(p.size(), 1.0 / static_cast<double>(p.size()));
  for (int it = 0; it < iters; ++it) {
    std::vector<double> w = row_times(v, p);
    double diff = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) diff += std::fabs(w[i] - v[i]);
    v = std::move(w);
    if (diff < 1e-16) break;
  }
  return v;
}

/// P(T = t) for t = 0..horizon via delta_0 P^t, T the hitting time of d.
inline std::vector<double> hitting_pmf_by_powers(const std::vector<std::vector<double>>& p, std::size_t horizon) {
  const std::size_t d = p.size() - 1;
  std::vector<double> v(p.size(), 0.0), out;
  v[0] = 1.0;
  double prev = v[d];
  out.push_back(prev);
  for (std::size_t t = 1; t <= horizon; ++t) {
    v = row_times(v, p);
    out.push_back(v[d] - prev);
    prev = v[d];
  }
  return out;
}

/// exp(t A) by scaling and squaring of a truncated Taylor series.
inline std::vector<std::vector<double>> expm(const std::vector<std::vector<double>>& a, double t) {
  const std::size_t n = a.size();
  double norm = 0.0;
  for (const auto& row : a) {
    double s = 0.0;
    for (double x : row) s += std::fabs(x);
    norm = std::max(norm, s * t);
  }
  int squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm + 1e-300))) + 4);
  const double scale = t / std::ldexp(1.0, squarings);
  std::vector<std::vector<double>> result(n, std::vector<double>(n, 0.0)), term = result;
  for (std::size_t i = 0; i < n; ++i) result[i][i] = term[i][i] = 1.0;
  for (int k = 1; k <= 30; ++k) {
    std::vector<std::vector<double>> next(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < n; ++l)
        for (std::size_t j = 0; j < n; ++j) next[i][j] += term[i][l] * a[l][j] * scale / k;
    term = std::move(next);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) result[i][j] += term[i][j];
  }
  for (int s = 0; s < squarings; ++s) {
    std::vector<std::vector<double>> sq(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < n; ++l)
        for (std::size_t j = 0; j < n; ++j) sq[i][j] += result[i][l] * result[l][j];
    result = std::move(sq);
  }
  return result;
}

/// Solves A x = b exactly by Gaussian elimination.
inline std::vector<Rational> solve_exact(std::vector<std::vector<Rational>> a, std::vector<Rational> b) {
  const std::size_t n = a.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (a[piv][c] == 0) ++piv;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0) continue;
      const Rational f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
  return b;
}

/// E_0 exp(-<u, T>) from first-step analysis: (U - G_0) phi = G(., d).
inline Rational occupation_by_first_step(const ExactGenerator& g, const std::vector<Rational>& u) {
  const int d = g.d();
  std::vector<std::vector<Rational>> a(d, std::vector<Rational>(d, Rational(0)));
  std::vector<Rational> b(d, Rational(0));
  for (int x = 0; x < d; ++x) {
    a[x][x] = u[x] + g.birth(x) + g.death(x);
    if (x > 0) a[x][x - 1] = -g.death(x);
    if (x + 1 < d) a[x][x + 1] = -g.birth(x);
    else b[x] = g.birth(x);
  }
  return solve_exact(a, b)[0];
}

}  // namespace bdssd::testing
