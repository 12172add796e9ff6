#include <gtest/gtest.h>

#include "bdssd/chain.hpp"
#include "bdssd/spectral.hpp"
#include "support.hpp"

using namespace bdssd;
using bdssd::testing::dense;

namespace {

ExactKernel e2() { return ehrenfest_kernel<Rational>(2); }

ExactKernel cex() {
  return ExactKernel({Rational(1, 2), Rational(49, 100)}, {Rational(49, 100), Rational(0)},
                     std::vector<Rational>{Rational(1, 2), Rational(1, 50), Rational(1)});
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Kernel, EhrenfestEntries) {
  const auto k = e2();
  EXPECT_EQ(k.p(0), Rational(1, 2));
  EXPECT_EQ(k.p(1), Rational(1, 4));
  EXPECT_EQ(k.q(1), Rational(1, 4));
  EXPECT_EQ(k.q(2), Rational(1, 2));
  for (int i = 0; i <= 2; ++i) EXPECT_EQ(k.r(i), Rational(1, 2));
}

TEST(Kernel, ConstructionErrors) {
  EXPECT_EQ(code_of([] { DiscreteKernel({}, {}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { DiscreteKernel({0.5, 0.5}, {0.5}); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code_of([] { DiscreteKernel({0.5}, {0.5}, std::vector<double>{0.5}); }), ErrorCode::ShapeMismatch);
  EXPECT_EQ(code_of([] { DiscreteKernel({NAN}, {0.5}); }), ErrorCode::InvalidArgument);
}

TEST(Validate, FlagsNegativeAndOverfullRows) {
  const DiscreteKernel neg({-0.1, 0.5}, {0.2, 0.3});
  const auto rep = validate_discrete(neg);
  ASSERT_FALSE(rep.ok());
  EXPECT_EQ(rep.violations.front().code, ErrorCode::NegativeEntry);

  // Row 1 carries p_1 + q_1 = 1.1.
  const DiscreteKernel over({0.7, 0.5}, {0.6, 0.3});
  const auto rep2 = validate_discrete(over);
  ASSERT_FALSE(rep2.ok());
  const auto has = [&](ErrorCode c) {
    return std::any_of(rep2.violations.begin(), rep2.violations.end(),
                       [&](const Violation& v) { return v.code == c && v.index == 1; });
  };
  EXPECT_TRUE(has(ErrorCode::RowSumExceeded));
  EXPECT_TRUE(has(ErrorCode::NegativeEntry));

  const DiscreteKernel mismatch({0.5}, {0.5}, std::vector<double>{0.4, 0.5});
  EXPECT_EQ(validate_discrete(mismatch).violations.front().code, ErrorCode::RowSumMismatch);
}

TEST(Validate, Classification) {
  const auto e = validate_discrete(e2());
  EXPECT_TRUE(e.ergodic);
  EXPECT_FALSE(e.absorbing_top);
  EXPECT_TRUE(e.strictly_monotone);

  const auto c = validate_discrete(cex());
  EXPECT_TRUE(c.ok());
  EXPECT_TRUE(c.absorbing_top);
  EXPECT_FALSE(c.ergodic);
  EXPECT_TRUE(c.strictly_monotone);

  // p_0 + q_1 = 3/2.
  const ExactKernel flip({Rational(1), Rational(1, 2)}, {Rational(1, 2), Rational(1, 2)});
  const auto f = validate_discrete(flip);
  EXPECT_TRUE(f.ok());
  EXPECT_EQ(f.monotonicity, Monotonicity::NonMonotone);
}

TEST(Stationary, EhrenfestBinomial) {
  const auto pi = stationary_pmf(e2());
  EXPECT_EQ(pi[0], Rational(1, 4));
  EXPECT_EQ(pi[1], Rational(1, 2));
  EXPECT_EQ(pi[2], Rational(1, 4));
  EXPECT_EQ(code_of([] { stationary_pmf(cex()); }), ErrorCode::NotErgodic);
}

TEST(Stationary, MatchesPowerIteration) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto k = bdssd::testing::random_lazy_ergodic_kernel(rng, 3);
    const auto pi = stationary_pmf(k);
    const auto ref = bdssd::testing::power_iteration_pi(dense(k.matrix()));
    for (int i = 0; i <= 3; ++i) EXPECT_NEAR(pi[i], ref[i], 1e-12);
  }
}

TEST(Stationary, InvariantUnderLaziness) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto k = bdssd::testing::random_lazy_ergodic_kernel(rng, 4);
    const auto pi = stationary_pmf(k);
    for (double eps : {0.1, 0.5, 0.9}) {
      const auto pl = stationary_pmf(lazy(k, eps));
      for (int i = 0; i <= 4; ++i) EXPECT_NEAR(pi[i], pl[i], 1e-13);
    }
  }
}

TEST(Lazy, Examples) {
  const auto l = lazy(cex(), Rational(2, 5));
  EXPECT_EQ(l(1, 1), Rational(76, 125));
  const auto e = lazy(e2(), Rational(1, 2));
  for (int i = 0; i <= 2; ++i) EXPECT_EQ(e.r(i), Rational(3, 4));
  EXPECT_EQ(e.p(0), Rational(1, 4));
  EXPECT_EQ(e.p(1), Rational(1, 8));
  EXPECT_EQ(e.q(1), Rational(1, 8));
  EXPECT_EQ(e.q(2), Rational(1, 4));
  EXPECT_EQ(code_of([] { lazy(e2(), Rational(1)); }), ErrorCode::EpsOutOfRange);
  EXPECT_EQ(code_of([] { lazy(e2(), Rational(0)); }), ErrorCode::EpsOutOfRange);

  const DiscreteKernel k = e2().cast<double>();
  const auto near_one = lazy(k, 1.0 - 1e-9);
  for (int i = 0; i <= 2; ++i)
    for (int j = 0; j <= 2; ++j) EXPECT_NEAR(near_one(i, j), k(i, j), 1e-9);
}

TEST(Discretize, Examples) {
  const auto g = ehrenfest_generator<Rational>(2);
  EXPECT_EQ(g.birth(0), 2);
  EXPECT_EQ(g.birth(1), 1);
  EXPECT_EQ(g.death(1), 1);
  EXPECT_EQ(g.death(2), 2);
  // Every total rate is 2, so the automatic step is 1/4.
  EXPECT_EQ(auto_eps(g), Rational(1, 4));
  const auto half = discretize(g, auto_eps(g));
  for (int i = 0; i <= 2; ++i) EXPECT_EQ(half.r(i), Rational(1, 2));
  const auto k = discretize(g, Rational(1, 6));
  EXPECT_EQ(k.r(0), Rational(2, 3));
  EXPECT_EQ(k.r(1), Rational(2, 3));
  EXPECT_EQ(k.r(2), Rational(2, 3));
  EXPECT_EQ(k.p(0), Rational(1, 3));
  EXPECT_EQ(k.p(1), Rational(1, 6));
  EXPECT_EQ(k.q(1), Rational(1, 6));
  EXPECT_EQ(k.q(2), Rational(1, 3));

  const ExactGenerator zero({Rational(0), Rational(0)}, {Rational(0), Rational(0)});
  const auto id = discretize(zero, Rational(5));
  for (int i = 0; i <= 2; ++i) EXPECT_EQ(id.r(i), 1);

  const ExactGenerator one({Rational(3)}, {Rational(0)});
  const auto a = discretize(one, Rational(1, 3));
  EXPECT_EQ(a.p(0), 1);
  EXPECT_TRUE(validate_discrete(a).absorbing_top);

  EXPECT_EQ(code_of([&] { discretize(g, Rational(3, 4)); }), ErrorCode::EpsTooLarge);
  EXPECT_EQ(code_of([&] { discretize(g, Rational(0)); }), ErrorCode::EpsOutOfRange);
}

TEST(Discretize, RowSumsExact) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = bdssd::testing::random_absorbing_generator(rng, 4);
    const auto k = discretize(g, auto_eps(g));
    for (int i = 0; i <= 4; ++i) {
      Rational s(0);
      for (int j = 0; j <= 4; ++j) s += k(i, j);
      EXPECT_EQ(s, 1);
    }
  }
}

TEST(Monotonicity, EigenvalueImplications) {
  // Positive spectrum implies strict monotonicity; the converse fails on CEX.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int positive = 0;
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<double> birth(3), death(3);
    for (int i = 0; i < 3; ++i) {
      const double move = u(rng), share = u(rng);
      birth[i] = move * share;
      if (i > 0) death[i - 1] = move * (1 - share);
    }
    death[2] = u(rng) * 0.5;
    const DiscreteKernel k(birth, death);
    const auto spec = eigenvalues_discrete(k);
    if (spec.min() > 0) ++positive;
    const auto rep = validate_discrete(k);
    if (spec.min() > 0) EXPECT_TRUE(rep.strictly_monotone);
    if (spec.min() >= 0) EXPECT_TRUE(rep.monotone);
  }
  EXPECT_GT(positive, 20);
  EXPECT_TRUE(validate_discrete(cex()).strictly_monotone);
  EXPECT_LT(eigenvalues_discrete(cex().cast<double>()).min(), 0.0);
}

TEST(Generator, Validation) {
  const auto g = ehrenfest_generator<double>(3);
  const auto rep = validate_generator(g);
  EXPECT_TRUE(rep.ok());
  EXPECT_TRUE(rep.ergodic);
  EXPECT_TRUE(rep.monotone);
  const ContinuousGenerator bad({-1.0, 1.0}, {1.0, 1.0});
  EXPECT_EQ(validate_generator(bad).violations.front().code, ErrorCode::NegativeEntry);
  const auto pi = stationary_pmf(g);
  EXPECT_NEAR(pi[0], 1.0 / 8, 1e-15);
  EXPECT_NEAR(pi[1], 3.0 / 8, 1e-15);
}
