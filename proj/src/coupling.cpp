#include "bdssd/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "bdssd/absorption.hpp"
#include "bdssd/duality.hpp"

namespace bdssd {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

ReplicaRng::ReplicaRng(RngSpec spec)
    : engine_(splitmix64(spec.seed ^ splitmix64(spec.replica ^ 0xD1B54A32D192ED03ULL))) {}

double ReplicaRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double ReplicaRng::exponential(double rate) {
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  // 1 - U lies in (0, 1], so the log is finite.
  return -std::log1p(-uniform()) / rate;
}

namespace {

void check_invariant(const Matrix<double>& link, int xhat, int x, double t) {
  if (x > xhat || x < 0 || link(static_cast<std::size_t>(xhat), static_cast<std::size_t>(x)) <= 0.0)
    throw Error(ErrorCode::CouplingInvariant,
                "link(" + std::to_string(xhat) + ", " + std::to_string(x) +
                    ") is not positive at time " + shortest_repr(t));
}

void record(CoupledTrajectory& tr, double t, int x, int xhat) {
  tr.times.push_back(t);
  tr.primal.push_back(x);
  tr.dual.push_back(xhat);
}

int step_discrete(const DiscreteKernel& k, int x, double u) {
  if (u < k.q(x)) return x - 1;
  if (u < k.q(x) + k.r(x)) return x;
  return x < k.d() ? x + 1 : x;
}

Matrix<double> binomial_link(int d) {
  Matrix<double> link(static_cast<std::size_t>(d + 1), static_cast<std::size_t>(d + 1));
  for (int n = 0; n <= d; ++n) {
    double c = 1.0;
    for (int j = 0; j <= n; ++j) {
      link(static_cast<std::size_t>(n), static_cast<std::size_t>(j)) = c * std::ldexp(1.0, -n);
      c = c * (n - j) / (j + 1);
    }
  }
  return link;
}

}  // namespace

DiscreteSpectralCoupling::DiscreteSpectralCoupling(const DiscreteKernel& kernel) : kernel_(kernel) {
  const QFamily fam = q_family_discrete(kernel_);
  theta_ = fam.spectrum.values;
  link_ = fam.link();
  link_times_kernel_ = link_ * kernel_.matrix();
}

double DiscreteSpectralCoupling::dual_birth_probability(int xhat, int y) const {
  const int d = kernel_.d();
  if (xhat < 0 || xhat >= d || y < 0 || y > d)
    throw Error(ErrorCode::InvalidState, "dual level " + std::to_string(xhat) +
                                             " with primal state " + std::to_string(y));
  if (y > xhat + 1)
    throw Error(ErrorCode::InvalidState, "primal state " + std::to_string(y) +
                                             " exceeds dual level " + std::to_string(xhat) + " + 1");
  if (y == xhat + 1) return 1.0;
  const auto xs = static_cast<std::size_t>(xhat), ys = static_cast<std::size_t>(y);
  const double denom = link_times_kernel_(xs, ys);
  if (denom <= 0.0)
    throw Error(ErrorCode::InvalidState, "(Q_" + std::to_string(xhat) + " P)(0, " +
                                             std::to_string(y) + ") vanishes");
  const double p = (1.0 - theta_[xs]) * link_(xs + 1, ys) / denom;
  return std::clamp(p, 0.0, 1.0);
}

ContinuousSpectralCoupling::ContinuousSpectralCoupling(const ContinuousGenerator& gen) : gen_(gen) {
  const QFamily fam = q_family_continuous(gen_);
  nu_ = fam.spectrum.values;
  link_ = fam.link();
}

double ContinuousSpectralCoupling::dual_clock_rate(int xhat, int x) const {
  const int d = gen_.d();
  if (xhat < 0 || xhat >= d || x < 0 || x > xhat)
    throw Error(ErrorCode::InvalidState, "dual level " + std::to_string(xhat) +
                                             " with primal state " + std::to_string(x));
  const auto xs = static_cast<std::size_t>(xhat), ys = static_cast<std::size_t>(x);
  const double here = link_(xs, ys);
  if (here <= 0.0)
    throw Error(ErrorCode::InvalidState, "link(" + std::to_string(xhat) + ", " +
                                             std::to_string(x) + ") vanishes");
  return nu_[xs] * link_(xs + 1, ys) / here;
}

CoupledTrajectory run_coupled_discrete(const DiscreteSpectralCoupling& ctx, RngSpec spec,
                                       std::size_t max_steps) {
  const DiscreteKernel& k = ctx.kernel();
  const int d = k.d();
  ReplicaRng rng(spec);
  CoupledTrajectory tr;
  tr.sojourns.assign(static_cast<std::size_t>(d), 0.0);
  int x = 0, xhat = 0;
  std::size_t t = 0;
  record(tr, 0.0, x, xhat);
  while (xhat < d) {
    if (t >= max_steps)
      throw Error(ErrorCode::CapExceeded, "dual not absorbed within " + std::to_string(max_steps) +
                                              " steps");
    const int y = step_discrete(k, x, rng.uniform());
    const double pb = ctx.dual_birth_probability(xhat, y);
    tr.sojourns[static_cast<std::size_t>(xhat)] += 1.0;
    if (pb >= 1.0 || (pb > 0.0 && rng.uniform() < pb)) ++xhat;
    x = y;
    ++t;
    check_invariant(ctx.link(), xhat, x, static_cast<double>(t));
    record(tr, static_cast<double>(t), x, xhat);
  }
  tr.absorption_time = static_cast<double>(t);
  return tr;
}

CoupledTrajectory run_coupled_discrete(const DiscreteKernel& kernel, RngSpec rng,
                                       std::size_t max_steps) {
  return run_coupled_discrete(DiscreteSpectralCoupling(kernel), rng, max_steps);
}

CoupledTrajectory run_coupled_continuous(const ContinuousSpectralCoupling& ctx, RngSpec spec,
                                         double max_time) {
  const ContinuousGenerator& g = ctx.generator();
  const int d = g.d();
  ReplicaRng rng(spec);
  CoupledTrajectory tr;
  tr.sojourns.assign(static_cast<std::size_t>(d), 0.0);
  int x = 0, xhat = 0;
  double t = 0.0;
  record(tr, t, x, xhat);
  while (xhat < d) {
    if (t > max_time)
      throw Error(ErrorCode::CapExceeded, "dual not absorbed by time " + shortest_repr(max_time));
    const double q = g.total_rate(x);
    const double primal_wait = rng.exponential(q);
    const double dual_wait = rng.exponential(ctx.dual_clock_rate(xhat, x));
    const double wait = std::min(primal_wait, dual_wait);
    if (!std::isfinite(wait))
      throw Error(ErrorCode::CapExceeded, "both clocks have rate 0 at state " + std::to_string(x));
    t += wait;
    tr.sojourns[static_cast<std::size_t>(xhat)] += wait;
    if (primal_wait < dual_wait) {
      x = rng.uniform() * q < g.birth(x) ? x + 1 : x - 1;
      if (x == xhat + 1) ++xhat;
    } else {
      ++xhat;
    }
    check_invariant(ctx.link(), xhat, x, t);
    record(tr, t, x, xhat);
  }
  tr.absorption_time = t;
  return tr;
}

CoupledTrajectory run_coupled_continuous(const ContinuousGenerator& gen, RngSpec rng,
                                         double max_time) {
  return run_coupled_continuous(ContinuousSpectralCoupling(gen), rng, max_time);
}

double coordinate_birth_probability(int d, int xhat, int x, int y) {
  if (d < 1 || xhat < 0 || xhat >= d || x < 0 || x > xhat || std::abs(y - x) > 1 || y < 0 || y > d)
    throw Error(ErrorCode::InvalidState, "coordinate dual at level " + std::to_string(xhat) +
                                             " with move " + std::to_string(x) + " -> " +
                                             std::to_string(y));
  if (y == x - 1) return 0.0;
  if (y == x) return 1.0 - static_cast<double>(xhat) / d;
  return static_cast<double>(d - xhat) / (d - x);
}

CoupledTrajectory run_coordinate_dual(int d, RngSpec spec, std::size_t max_steps) {
  const DiscreteKernel k = ehrenfest_kernel<double>(d);
  const Matrix<double> link = binomial_link(d);
  ReplicaRng rng(spec);
  CoupledTrajectory tr;
  tr.sojourns.assign(static_cast<std::size_t>(d), 0.0);
  int x = 0, xhat = 0;
  std::size_t t = 0;
  record(tr, 0.0, x, xhat);
  while (xhat < d) {
    if (t >= max_steps)
      throw Error(ErrorCode::CapExceeded, "dual not absorbed within " + std::to_string(max_steps) +
                                              " steps");
    const int y = step_discrete(k, x, rng.uniform());
    const double pb = coordinate_birth_probability(d, xhat, x, y);
    tr.sojourns[static_cast<std::size_t>(xhat)] += 1.0;
    if (pb >= 1.0 || (pb > 0.0 && rng.uniform() < pb)) ++xhat;
    x = y;
    ++t;
    check_invariant(link, xhat, x, static_cast<double>(t));
    record(tr, static_cast<double>(t), x, xhat);
  }
  tr.absorption_time = static_cast<double>(t);
  return tr;
}

// ---------------------------------------------------------------------------
// Monte Carlo harness

namespace {

/// What the aggregator needs from one replica.
struct ReplicaSummary {
  double absorption = 0.0;
  int exit_state = 0;
  std::vector<double> sojourns;
  /// Discrete: counts of (down, stay, up) per state. Continuous: (deaths, 0, births).
  std::vector<std::uint32_t> moves;
  /// Continuous only: time spent in each primal state.
  std::vector<double> exposure;
  CoupledTrajectory trajectory;
};

ReplicaSummary summarize(CoupledTrajectory tr, int d, bool continuous, bool keep) {
  ReplicaSummary s;
  s.absorption = tr.absorption_time;
  s.exit_state = tr.exit_state();
  s.sojourns = tr.sojourns;
  s.moves.assign(static_cast<std::size_t>(3 * (d + 1)), 0);
  if (continuous) s.exposure.assign(static_cast<std::size_t>(d + 1), 0.0);
  for (std::size_t i = 1; i < tr.primal.size(); ++i) {
    const int from = tr.primal[i - 1], to = tr.primal[i];
    if (continuous) s.exposure[static_cast<std::size_t>(from)] += tr.times[i] - tr.times[i - 1];
    if (continuous && from == to) continue;
    const int kind = std::clamp(to - from, -1, 1) + 1;
    ++s.moves[static_cast<std::size_t>(3 * from + kind)];
  }
  if (keep) s.trajectory = std::move(tr);
  return s;
}

template <class Run>
std::vector<ReplicaSummary> run_replicas(std::size_t n, unsigned threads, const Run& run) {
  std::vector<ReplicaSummary> out(n);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](unsigned w) {
    try {
      for (std::size_t r = w; r < n; r += threads) out[r] = run(r);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

double standardized(double observed, double expected, double sd) {
  const double diff = observed - expected;
  if (sd > 0.0) return std::fabs(diff) / sd;
  return std::fabs(diff) <= 1e-12 * std::max(1.0, std::fabs(expected))
             ? 0.0
             : std::numeric_limits<double>::infinity();
}

/// Per-level sojourn means, exit law and chi-square table, shared by both time types.
void fill_common(SstReport& rep, const std::vector<ReplicaSummary>& reps, int d,
                 const std::vector<double>& level_means, const std::vector<double>& level_sds,
                 const std::vector<double>& pi, const std::function<std::size_t(double)>& bin,
                 std::size_t bins) {
  const double n = static_cast<double>(reps.size());
  rep.replicas = reps.size();
  rep.degenerate = reps.size() < 2;
  rep.stationary = pi;

  std::vector<std::uint64_t> exits(static_cast<std::size_t>(d + 1), 0);
  std::vector<std::vector<std::uint64_t>> table(bins,
                                                std::vector<std::uint64_t>(static_cast<std::size_t>(d + 1), 0));
  std::vector<double> level_sum(static_cast<std::size_t>(d), 0.0);
  for (const auto& s : reps) {
    ++exits[static_cast<std::size_t>(s.exit_state)];
    ++table[bin(s.absorption)][static_cast<std::size_t>(s.exit_state)];
    for (int i = 0; i < d; ++i) level_sum[static_cast<std::size_t>(i)] += s.sojourns[static_cast<std::size_t>(i)];
  }
  rep.tv = stats::total_variation(exits, pi);
  rep.exit_distribution.resize(exits.size());
  for (std::size_t i = 0; i < exits.size(); ++i)
    rep.exit_distribution[i] = n > 0 ? static_cast<double>(exits[i]) / n : 0.0;
  rep.independence = stats::chi_square_independence(table);
  if (rep.degenerate) rep.independence.p_value.reset();

  for (int i = 0; i < d; ++i) {
    LevelCheck lc;
    lc.level = i;
    lc.expected_mean = level_means[static_cast<std::size_t>(i)];
    lc.empirical_mean = n > 0 ? level_sum[static_cast<std::size_t>(i)] / n : 0.0;
    lc.z = standardized(lc.empirical_mean, lc.expected_mean,
                        n > 0 ? level_sds[static_cast<std::size_t>(i)] / std::sqrt(n) : 0.0);
    rep.max_level_z = std::max(rep.max_level_z, lc.z);
    rep.levels.push_back(lc);
  }
}

void keep_trajectories(SstReport& rep, std::vector<ReplicaSummary>& reps, bool keep) {
  if (!keep) return;
  rep.trajectories.reserve(reps.size());
  for (auto& s : reps) rep.trajectories.push_back(std::move(s.trajectory));
}

}  // namespace

SstReport monte_carlo_sst(const DiscreteKernel& kernel, std::size_t replicas, std::uint64_t seed,
                          const SimulationOptions& opts) {
  const int d = kernel.d();
  std::vector<double> theta;
  std::vector<ReplicaSummary> reps;
  if (opts.coordinate_dual) {
    const DiscreteKernel urn = ehrenfest_kernel<double>(d);
    for (int i = 0; i <= d; ++i)
      if (std::fabs(kernel.p(i) - urn.p(i)) > 1e-12 || std::fabs(kernel.q(i) - urn.q(i)) > 1e-12)
        throw Error(ErrorCode::InvalidArgument,
                    "the coordinate dual needs the Ehrenfest kernel with holding 1/2");
    for (int i = 0; i < d; ++i) theta.push_back(static_cast<double>(i) / d);
    reps = run_replicas(replicas, opts.threads, [&](std::size_t r) {
      return summarize(run_coordinate_dual(d, {seed, r}, opts.max_steps), d, false,
                       opts.keep_trajectories);
    });
  } else {
    const DiscreteSpectralCoupling ctx(kernel);
    theta = Spectrum{TimeType::Discrete, {ctx.thetas().begin(), ctx.thetas().end()}}.nontrivial();
    reps = run_replicas(replicas, opts.threads, [&](std::size_t r) {
      return summarize(run_coupled_discrete(ctx, {seed, r}, opts.max_steps), d, false,
                       opts.keep_trajectories);
    });
  }

  SstReport rep;
  rep.time = TimeType::Discrete;
  const LatticePmf law = geometric_convolution(theta);
  std::vector<std::int64_t> samples;
  samples.reserve(reps.size());
  for (const auto& s : reps) samples.push_back(static_cast<std::int64_t>(s.absorption));
  rep.ks = stats::ks_distance_lattice(samples, law);

  std::vector<double> means, sds;
  for (double th : theta) {
    means.push_back(1.0 / (1.0 - th));
    sds.push_back(std::sqrt(th) / (1.0 - th));
  }
  const std::vector<std::int64_t> cuts = stats::decile_cutoffs(law);
  const auto bin = [&](double t) {
    const auto it = std::lower_bound(cuts.begin(), cuts.end(), static_cast<std::int64_t>(t));
    return static_cast<std::size_t>(it - cuts.begin());
  };
  const auto pi_pmf = stationary_pmf(kernel);
  const std::vector<double> pi(pi_pmf.weights().begin(), pi_pmf.weights().end());
  fill_common(rep, reps, d, means, sds, pi, bin, cuts.size() + 1);

  std::vector<std::uint64_t> moves(static_cast<std::size_t>(3 * (d + 1)), 0);
  for (const auto& s : reps)
    for (std::size_t j = 0; j < moves.size(); ++j) moves[j] += s.moves[j];
  for (int x = 0; x <= d; ++x) {
    const std::size_t base = static_cast<std::size_t>(3 * x);
    const double total = static_cast<double>(moves[base] + moves[base + 1] + moves[base + 2]);
    if (total == 0.0) continue;
    const double probs[3] = {kernel.q(x), kernel.r(x), kernel.p(x)};
    for (int k = 0; k < 3; ++k) {
      const double c = static_cast<double>(moves[base + static_cast<std::size_t>(k)]);
      if (probs[k] == 0.0 && c > 0.0) ++rep.structural_violations;
      const double sd = std::sqrt(total * probs[k] * (1.0 - probs[k]));
      rep.max_transition_z = std::max(rep.max_transition_z, standardized(c, total * probs[k], sd));
    }
  }
  keep_trajectories(rep, reps, opts.keep_trajectories);
  return rep;
}

SstReport monte_carlo_sst(const ContinuousGenerator& gen, std::size_t replicas, std::uint64_t seed,
                          const SimulationOptions& opts) {
  if (opts.coordinate_dual)
    throw Error(ErrorCode::InvalidArgument, "the coordinate dual is defined for kernels only");
  const int d = gen.d();
  const ContinuousSpectralCoupling ctx(gen);
  const std::vector<double> nu =
      Spectrum{TimeType::Continuous, {ctx.rates().begin(), ctx.rates().end()}}.nontrivial();
  std::vector<ReplicaSummary> reps = run_replicas(replicas, opts.threads, [&](std::size_t r) {
    return summarize(run_coupled_continuous(ctx, {seed, r}, opts.max_time), d, true,
                     opts.keep_trajectories);
  });

  SstReport rep;
  rep.time = TimeType::Continuous;
  std::vector<double> samples;
  samples.reserve(reps.size());
  for (const auto& s : reps) samples.push_back(s.absorption);
  rep.ks = stats::ks_distance_continuous(samples, [&](std::span<const double> pts) {
    return hypoexponential_cdf(nu, pts).values;
  });

  std::vector<double> means, sds;
  double mean_total = 0.0, var_total = 0.0;
  for (double v : nu) {
    means.push_back(1.0 / v);
    sds.push_back(1.0 / v);
    mean_total += 1.0 / v;
    var_total += 1.0 / (v * v);
  }
  // Decile grid out to where the cdf exceeds 0.95 comfortably.
  const double horizon = mean_total + 12.0 * std::sqrt(var_total);
  std::vector<double> grid(4097);
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = horizon * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
  const std::vector<double> cuts = stats::decile_cutoffs(hypoexponential_cdf(nu, grid));
  const auto bin = [&](double t) {
    return static_cast<std::size_t>(std::lower_bound(cuts.begin(), cuts.end(), t) - cuts.begin());
  };
  const auto pi_pmf = stationary_pmf(gen);
  const std::vector<double> pi(pi_pmf.weights().begin(), pi_pmf.weights().end());
  fill_common(rep, reps, d, means, sds, pi, bin, cuts.size() + 1);

  // Jump counts against integrated rates, and jump directions against lambda/(lambda+mu).
  std::vector<double> exposure(static_cast<std::size_t>(d + 1), 0.0);
  std::vector<std::uint64_t> moves(static_cast<std::size_t>(3 * (d + 1)), 0);
  for (const auto& s : reps) {
    for (std::size_t j = 0; j < exposure.size(); ++j) exposure[j] += s.exposure[j];
    for (std::size_t j = 0; j < moves.size(); ++j) moves[j] += s.moves[j];
  }
  for (int x = 0; x <= d; ++x) {
    const std::size_t base = static_cast<std::size_t>(3 * x);
    const double deaths = static_cast<double>(moves[base]);
    const double births = static_cast<double>(moves[base + 2]);
    const double q = gen.total_rate(x);
    const double expected_jumps = q * exposure[static_cast<std::size_t>(x)];
    rep.max_transition_z = std::max(
        rep.max_transition_z, standardized(births + deaths, expected_jumps, std::sqrt(expected_jumps)));
    if (gen.birth(x) == 0.0 && births > 0.0) ++rep.structural_violations;
    if (gen.death(x) == 0.0 && deaths > 0.0) ++rep.structural_violations;
    const double jumps = births + deaths;
    if (jumps == 0.0 || q == 0.0) continue;
    const double pb = gen.birth(x) / q;
    rep.max_transition_z = std::max(
        rep.max_transition_z, standardized(births, jumps * pb, std::sqrt(jumps * pb * (1.0 - pb))));
  }
  keep_trajectories(rep, reps, opts.keep_trajectories);
  return rep;
}

GapComparison compare_gap_transitions(const std::vector<CoupledTrajectory>& a,
                                      const std::vector<CoupledTrajectory>& b, int d) {
  const std::size_t cells = static_cast<std::size_t>((d + 1) * (d + 1));
  struct Moments {
    std::vector<double> sum, sumsq;
    double n = 0.0;
  };
  const auto moments = [&](const std::vector<CoupledTrajectory>& trs) {
    Moments m{std::vector<double>(cells, 0.0), std::vector<double>(cells, 0.0), 0.0};
    std::vector<double> counts(cells);
    for (const auto& tr : trs) {
      std::fill(counts.begin(), counts.end(), 0.0);
      for (std::size_t t = 1; t < tr.primal.size(); ++t) {
        const int g0 = tr.dual[t - 1] - tr.primal[t - 1];
        const int g1 = tr.dual[t] - tr.primal[t];
        counts[static_cast<std::size_t>(g0 * (d + 1) + g1)] += 1.0;
      }
      for (std::size_t c = 0; c < cells; ++c) {
        m.sum[c] += counts[c];
        m.sumsq[c] += counts[c] * counts[c];
      }
      m.n += 1.0;
    }
    return m;
  };
  const Moments ma = moments(a), mb = moments(b);
  GapComparison out;
  if (ma.n < 2.0 || mb.n < 2.0) return out;
  for (std::size_t c = 0; c < cells; ++c) {
    const double mean_a = ma.sum[c] / ma.n, mean_b = mb.sum[c] / mb.n;
    const double var_a = std::max(0.0, (ma.sumsq[c] - ma.n * mean_a * mean_a) / (ma.n - 1.0));
    const double var_b = std::max(0.0, (mb.sumsq[c] - mb.n * mean_b * mean_b) / (mb.n - 1.0));
    const double z =
        standardized(mean_a, mean_b, std::sqrt(var_a / ma.n + var_b / mb.n));
    if (z > out.max_abs_z) {
      out.max_abs_z = z;
      out.gap_before = static_cast<int>(c) / (d + 1);
      out.gap_after = static_cast<int>(c) % (d + 1);
    }
  }
  return out;
}

MonteCarloEstimate simulate_occupation_laplace(const ContinuousGenerator& gen,
                                               std::span<const double> u, std::size_t replicas,
                                               std::uint64_t seed) {
  const int d = gen.d();
  const OccupationQuery query(std::vector<double>(u.begin(), u.end()));
  if (static_cast<int>(query.size()) != d)
    throw Error(ErrorCode::ShapeMismatch, "occupation weights need " + std::to_string(d) +
                                              " entries, got " + std::to_string(query.size()));
  if (gen.birth(d - 1) <= 0.0 || gen.death(d) != 0.0)
    throw Error(ErrorCode::NoAbsorption, "state d is not an absorbing target");
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t r = 0; r < replicas; ++r) {
    ReplicaRng rng({seed, r});
    int x = 0;
    double exponent = 0.0;
    while (x != d) {
      const double q = gen.total_rate(x);
      if (q <= 0.0)
        throw Error(ErrorCode::NoAbsorption, "state " + std::to_string(x) + " is absorbing");
      exponent += u[static_cast<std::size_t>(x)] * rng.exponential(q);
      x = rng.uniform() * q < gen.birth(x) ? x + 1 : x - 1;
    }
    const double v = std::exp(-exponent);
    sum += v;
    sumsq += v * v;
  }
  MonteCarloEstimate est;
  const double n = static_cast<double>(replicas);
  if (replicas == 0) return est;
  est.mean = sum / n;
  if (replicas > 1)
    est.std_error = std::sqrt(std::max(0.0, (sumsq - n * est.mean * est.mean) / (n - 1.0)) / n);
  return est;
}

}  // namespace bdssd
