#include <gtest/gtest.h>

#include "bdssd/coupling.hpp"
#include "bdssd/duality.hpp"
#include "support.hpp"

using namespace bdssd;
namespace t = bdssd::testing;

namespace {

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

/// Eq-18 probability for the lazy urn with binomial link, simplified by hand.
double urn_birth_probability(int d, int xhat, int y) {
  const double a = static_cast<double>(d - xhat) * (xhat + 1);
  return a / (2.0 * xhat * (xhat + 1 - y) + a);
}

void expect_well_formed(const CoupledTrajectory& tr, int d, bool discrete) {
  ASSERT_EQ(tr.primal.size(), tr.dual.size());
  ASSERT_EQ(tr.primal.size(), tr.times.size());
  EXPECT_EQ(tr.primal.front(), 0);
  EXPECT_EQ(tr.dual.front(), 0);
  EXPECT_EQ(tr.dual.back(), d);
  for (std::size_t i = 1; i < tr.primal.size(); ++i) {
    EXPECT_LE(std::abs(tr.primal[i] - tr.primal[i - 1]), 1);
    const int up = tr.dual[i] - tr.dual[i - 1];
    EXPECT_TRUE(up == 0 || up == 1);
    EXPECT_LE(tr.primal[i], tr.dual[i]);
    EXPECT_GT(tr.times[i], tr.times[i - 1]);
    if (discrete) EXPECT_EQ(tr.times[i], static_cast<double>(i));
  }
  double total = 0.0;
  for (double s : tr.sojourns) total += s;
  EXPECT_NEAR(total, tr.absorption_time, 1e-9 * std::max(1.0, tr.absorption_time));
  EXPECT_EQ(tr.times.back(), tr.absorption_time);
}

}  // namespace

TEST(Rng, DeterministicAndDistinctStreams) {
  ReplicaRng a({7, 3}), b({7, 3}), c({7, 4}), e({8, 3});
  bool differs_c = false, differs_e = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
    differs_c |= x != c.uniform();
    differs_e |= x != e.uniform();
  }
  EXPECT_TRUE(differs_c);
  EXPECT_TRUE(differs_e);
  EXPECT_EQ(a.exponential(0.0), std::numeric_limits<double>::infinity());
  // Reference SplitMix64 output for 0.
  EXPECT_EQ(splitmix64(0), 0xE220A8397B1DCDAFULL);
}

TEST(Rng, ExponentialMean) {
  ReplicaRng r({1, 0});
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += r.exponential(2.0);
  EXPECT_NEAR(sum / n, 0.5, 4 * 0.5 / std::sqrt(n));
}

TEST(DiscreteCoupling, EhrenfestProbabilities) {
  const DiscreteSpectralCoupling ctx(ehrenfest_kernel<double>(2));
  EXPECT_NEAR(ctx.dual_birth_probability(1, 0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(ctx.dual_birth_probability(0, 0), 1.0, 1e-15);
  EXPECT_EQ(ctx.dual_birth_probability(0, 1), 1.0);
  EXPECT_EQ(ctx.dual_birth_probability(1, 2), 1.0);
  for (int d = 2; d <= 6; ++d) {
    const DiscreteSpectralCoupling c(ehrenfest_kernel<double>(d));
    for (int xhat = 0; xhat < d; ++xhat)
      for (int y = 0; y <= xhat; ++y)
        EXPECT_NEAR(c.dual_birth_probability(xhat, y), urn_birth_probability(d, xhat, y), 1e-12)
            << d << " " << xhat << " " << y;
  }
}

TEST(DiscreteCoupling, ErrorsAndSetup) {
  const DiscreteSpectralCoupling ctx(ehrenfest_kernel<double>(2));
  EXPECT_EQ(code_of([&] { ctx.dual_birth_probability(0, 2); }), ErrorCode::InvalidState);
  EXPECT_EQ(code_of([&] { ctx.dual_birth_probability(2, 2); }), ErrorCode::InvalidState);
  EXPECT_EQ(code_of([&] { ctx.dual_birth_probability(-1, 0); }), ErrorCode::InvalidState);
  const DiscreteKernel flip({0.9, 0.5}, {0.5, 0.9});
  EXPECT_EQ(code_of([&] { DiscreteSpectralCoupling c(flip); }), ErrorCode::NegativeEigenvalue);
}

TEST(DiscreteCoupling, OneStepLawSplitsIntoDualMoves) {
  // Starting from Lhat(xhat, .), the joint law after one step must be
  // theta Lhat(xhat, .) on staying and (1 - theta) Lhat(xhat + 1, .) on moving up.
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 2 + trial % 5;
    const auto k = t::random_lazy_ergodic_kernel(rng, d);
    const DiscreteSpectralCoupling ctx(k);
    const auto& l = ctx.link();
    const auto th = ctx.thetas();
    for (int xhat = 0; xhat < d; ++xhat) {
      for (int y = 0; y <= d; ++y) {
        double reach = 0.0;
        for (int x = 0; x <= xhat; ++x) reach += l(xhat, x) * k(x, y);
        const double up = y <= xhat + 1 ? reach * ctx.dual_birth_probability(xhat, y) : 0.0;
        const double stay = reach - up;
        EXPECT_NEAR(up, (1 - th[xhat]) * l(xhat + 1, y), 1e-10);
        EXPECT_NEAR(stay, th[xhat] * l(xhat, y), 1e-10);
      }
    }
  }
}

TEST(ContinuousCoupling, EhrenfestRates) {
  const ContinuousSpectralCoupling ctx(ehrenfest_generator<double>(2));
  EXPECT_NEAR(ctx.dual_clock_rate(1, 0), 1.0, 1e-14);
  EXPECT_NEAR(ctx.dual_clock_rate(0, 0), 2.0, 1e-14);
  for (int d = 2; d <= 6; ++d) {
    const ContinuousSpectralCoupling c(ehrenfest_generator<double>(d));
    for (int xhat = 0; xhat < d; ++xhat)
      for (int x = 0; x <= xhat; ++x)
        EXPECT_NEAR(c.dual_clock_rate(xhat, x), static_cast<double>(d - xhat) * (xhat + 1) / (xhat + 1 - x),
                    1e-10);
  }
  EXPECT_EQ(code_of([&] { ctx.dual_clock_rate(0, 1); }), ErrorCode::InvalidState);
}

TEST(ContinuousCoupling, RatesSplitTheLink) {
  // Lhat G = Ghat Lhat read row-wise: clock mass plus primal arrivals at
  // xhat + 1 reproduce nu_xhat Lhat(xhat + 1, .).
  std::mt19937_64 rng(62);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 4;
    const auto g = t::random_ergodic_generator(rng, d);
    const ContinuousSpectralCoupling ctx(g);
    const auto& l = ctx.link();
    const auto nu = ctx.rates();
    for (int xhat = 0; xhat < d; ++xhat)
      for (int y = 0; y <= xhat + 1; ++y) {
        double flow = y <= xhat ? l(xhat, y) * ctx.dual_clock_rate(xhat, y) : 0.0;
        if (y == xhat + 1) flow += l(xhat, xhat) * g.birth(xhat);
        EXPECT_NEAR(flow, nu[xhat] * l(xhat + 1, y), 1e-9 * std::max(1.0, nu[xhat]));
      }
  }
}

TEST(CoordinateDual, Rules) {
  EXPECT_EQ(coordinate_birth_probability(4, 2, 1, 0), 0.0);
  EXPECT_EQ(coordinate_birth_probability(4, 2, 1, 1), 0.5);
  EXPECT_NEAR(coordinate_birth_probability(4, 2, 1, 2), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(coordinate_birth_probability(4, 0, 0, 1), 1.0);
  EXPECT_EQ(code_of([] { coordinate_birth_probability(4, 1, 2, 2); }), ErrorCode::InvalidState);
  EXPECT_EQ(code_of([] { coordinate_birth_probability(4, 1, 0, 2); }), ErrorCode::InvalidState);
}

TEST(Trajectories, WellFormed) {
  for (std::uint64_t r = 0; r < 50; ++r) {
    expect_well_formed(run_coupled_discrete(ehrenfest_kernel<double>(3), {5, r}), 3, true);
    expect_well_formed(run_coupled_continuous(ehrenfest_generator<double>(3), {5, r}), 3, false);
    expect_well_formed(run_coordinate_dual(4, {5, r}), 4, true);
  }
  const auto a = run_coupled_discrete(ehrenfest_kernel<double>(3), {9, 1});
  const auto b = run_coupled_discrete(ehrenfest_kernel<double>(3), {9, 1});
  EXPECT_EQ(a.primal, b.primal);
  EXPECT_EQ(a.dual, b.dual);
  EXPECT_EQ(code_of([] { run_coupled_discrete(ehrenfest_kernel<double>(6), {1, 0}, 2); }),
            ErrorCode::CapExceeded);
}

TEST(MonteCarlo, SmallRunsAgreeWithExactLaws) {
  const auto e2 = monte_carlo_sst(ehrenfest_kernel<double>(2), 20000, 11);
  EXPECT_LT(e2.ks, 0.02);
  EXPECT_LT(e2.tv, 0.02);
  ASSERT_TRUE(e2.independence.p_value.has_value());
  EXPECT_GT(*e2.independence.p_value, 1e-4);
  EXPECT_LT(e2.max_level_z, 5.0);
  EXPECT_LT(e2.max_transition_z, 5.0);
  EXPECT_EQ(e2.structural_violations, 0u);

  const auto e2c = monte_carlo_sst(ehrenfest_generator<double>(2), 20000, 12);
  EXPECT_LT(e2c.ks, 0.02);
  EXPECT_LT(e2c.tv, 0.02);
  EXPECT_LT(e2c.max_level_z, 5.0);
  EXPECT_LT(e2c.max_transition_z, 5.0);

  SimulationOptions coord;
  coord.coordinate_dual = true;
  const auto c = monte_carlo_sst(ehrenfest_kernel<double>(4), 20000, 13, coord);
  EXPECT_LT(c.ks, 0.02);
  EXPECT_LT(c.max_level_z, 5.0);
}

TEST(MonteCarlo, IndependentOfThreadCount) {
  SimulationOptions one, many;
  one.threads = 1;
  many.threads = 3;
  const auto k = ehrenfest_kernel<double>(3);
  const auto a = monte_carlo_sst(k, 3001, 99, one);
  const auto b = monte_carlo_sst(k, 3001, 99, many);
  EXPECT_EQ(a.ks, b.ks);
  EXPECT_EQ(a.tv, b.tv);
  EXPECT_EQ(a.independence.statistic, b.independence.statistic);
  EXPECT_EQ(a.exit_distribution, b.exit_distribution);
  EXPECT_EQ(a.max_level_z, b.max_level_z);
  EXPECT_EQ(a.max_transition_z, b.max_transition_z);
}

TEST(MonteCarlo, SingleReplicaIsDegenerate) {
  const auto r = monte_carlo_sst(ehrenfest_kernel<double>(2), 1, 3);
  EXPECT_TRUE(r.degenerate);
  EXPECT_FALSE(r.independence.p_value.has_value());
  EXPECT_EQ(r.replicas, 1u);
}

TEST(MonteCarlo, CoordinateDualRequiresUrn) {
  SimulationOptions coord;
  coord.coordinate_dual = true;
  EXPECT_EQ(code_of([&] { monte_carlo_sst(DiscreteKernel({0.3, 0.2}, {0.2, 0.3}), 10, 1, coord); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { monte_carlo_sst(ehrenfest_generator<double>(2), 10, 1, coord); }),
            ErrorCode::InvalidArgument);
}

TEST(GapComparison, SeparatesConstructions) {
  SimulationOptions keep, coord;
  keep.keep_trajectories = true;
  coord.keep_trajectories = true;
  coord.coordinate_dual = true;
  const auto k = ehrenfest_kernel<double>(2);
  const auto a = monte_carlo_sst(k, 20000, 21, keep);
  const auto b = monte_carlo_sst(k, 20000, 22, coord);
  const auto a2 = monte_carlo_sst(k, 20000, 23, keep);
  EXPECT_GT(compare_gap_transitions(a.trajectories, b.trajectories, 2).max_abs_z, 3.0);
  EXPECT_LT(compare_gap_transitions(a.trajectories, a2.trajectories, 2).max_abs_z, 5.0);
}

TEST(Occupation, MonteCarloMatchesDeterminant) {
  const ContinuousGenerator g({2.0, 2.0}, {1.0, 0.0});
  const std::vector<double> u = {1.0, 1.0};
  const auto est = simulate_occupation_laplace(g, u, 40000, 17);
  EXPECT_NEAR(est.mean, 0.4, 4 * est.std_error);
  EXPECT_GT(est.std_error, 0.0);
  const std::vector<double> short_u = {1.0};
  EXPECT_EQ(code_of([&] { simulate_occupation_laplace(g, short_u, 10, 1); }), ErrorCode::ShapeMismatch);
}
