#include "bdssd/verify.hpp"

#include <cmath>
#include <functional>

#include "bdssd/absorption.hpp"
#include "bdssd/coupling.hpp"
#include "bdssd/duality.hpp"
#include "bdssd/spectral.hpp"

namespace bdssd {

VerifyProfile parse_verify_profile(std::string_view text) {
  if (text == "exact") return VerifyProfile::Exact;
  if (text == "full") return VerifyProfile::Full;
  throw Error(ErrorCode::InvalidArgument, "unknown profile '" + std::string(text) + "'");
}

std::string_view to_string(VerifyProfile p) { return p == VerifyProfile::Exact ? "exact" : "full"; }

std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Skipped: return "skipped";
  }
  return "?";
}

bool VerifyReport::passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const CheckResult& c) { return c.status == CheckStatus::Fail; });
}

namespace {

constexpr double kIdentityTol = 1e-10;
constexpr double kPmfTol = 1e-9;
constexpr double kCdfTol = 1e-8;

CheckResult bound(std::string name, double measured, double threshold, std::string detail = {}) {
  CheckResult c;
  c.name = std::move(name);
  c.measured = measured;
  c.threshold = threshold;
  c.status = measured <= threshold ? CheckStatus::Pass : CheckStatus::Fail;
  c.detail = std::move(detail);
  return c;
}

CheckResult skipped(std::string name, std::string reason) {
  CheckResult c;
  c.name = std::move(name);
  c.detail = std::move(reason);
  return c;
}

class Battery {
 public:
  void add(CheckResult c) { report_.checks.push_back(std::move(c)); }

  /// Runs a check, turning module errors into annotated rethrows.
  void run(const std::string& name, const std::function<CheckResult()>& fn) {
    try {
      add(fn());
    } catch (const Error& e) {
      throw Error(e.code(), "check '" + name + "': " + e.what());
    }
  }

  VerifyReport take() { return std::move(report_); }

 private:
  VerifyReport report_;
};

std::vector<double> pgf_grid() {
  std::vector<double> u;
  for (int k = 1; k <= 20; ++k) u.push_back(-0.9 + 1.8 * k / 20.0);
  return u;
}

double min_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end());
}

/// Checks on an absorbing kernel: pmf against the geometric convolution,
/// the pgf grid and the lazy-chain identity.
void absorbing_kernel_checks(Battery& b, const std::string& prefix, const DiscreteKernel& k) {
  const std::vector<double> theta = eigenvalues_discrete(k).nontrivial();
  const double theta_min = min_of(theta);
  b.run(prefix + "absorption_vs_geometric_convolution", [&] {
    if (theta_min < -kNegativeEigenvalueSnap)
      return skipped(prefix + "absorption_vs_geometric_convolution",
                     "negative eigenvalue " + shortest_repr(theta_min) +
                         ": no geometric-sum representation");
    std::vector<double> clipped = theta;
    for (double& t : clipped) t = std::max(t, 0.0);
    return bound(prefix + "absorption_vs_geometric_convolution",
                 l1_distance(absorption_pmf(k), geometric_convolution(clipped)), kPmfTol);
  });
  b.run(prefix + "pgf_grid", [&] {
    const LatticePmf pmf = absorption_pmf(k);
    double worst = 0.0;
    for (double u : pgf_grid()) worst = std::max(worst, std::fabs(pmf.pgf(u) - pgf_product(theta, u)));
    return bound(prefix + "pgf_grid", worst, kPmfTol, "20 points in (-0.9, 0.9]");
  });
  b.run(prefix + "lazy_pgf_identity", [&] {
    double worst = 0.0;
    for (double eps : {0.2, 0.4}) worst = std::max(worst, lazy_pgf_identity_check(k, eps, 0.5));
    return bound(prefix + "lazy_pgf_identity", worst, kPmfTol, "eps in {0.2, 0.4}, s = 0.5");
  });
}

std::vector<double> hypo_grid(const std::vector<double>& nu, std::size_t points) {
  double mean = 0.0, var = 0.0;
  for (double v : nu) {
    mean += 1.0 / v;
    var += 1.0 / (v * v);
  }
  const double top = mean + 10.0 * std::sqrt(var);
  std::vector<double> t;
  for (std::size_t i = 1; i <= points; ++i) t.push_back(top * static_cast<double>(i) / static_cast<double>(points));
  return t;
}

void absorbing_generator_checks(Battery& b, const std::string& prefix, const ContinuousGenerator& g) {
  const std::vector<double> nu = eigenvalues_generator(g).nontrivial();
  b.run(prefix + "absorption_cdf_vs_hypoexponential", [&] {
    const auto grid = hypo_grid(nu, 100);
    const auto a = absorption_cdf_continuous(g, grid);
    const auto h = hypoexponential_cdf(nu, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) worst = std::max(worst, std::fabs(a.values[i] - h.values[i]));
    return bound(prefix + "absorption_cdf_vs_hypoexponential", worst, kCdfTol, "100-point grid");
  });
  b.run(prefix + "occupation_gaussian_split", [&] {
    double worst = 0.0;
    for (int scale : {1, 2, 5}) {
      std::vector<double> u;
      for (int i = 0; i < g.d(); ++i) u.push_back(scale * (1.0 + 0.5 * i));
      worst = std::max(worst, gaussian_split_residual(g, OccupationQuery(u)));
    }
    return bound(prefix + "occupation_gaussian_split", worst, kIdentityTol);
  });
  b.run(prefix + "discretization_convergence", [&] {
    const auto grid = hypo_grid(nu, 100);
    const double eps = auto_eps(g);
    const double g1 = discretization_cdf_gap(g, eps, grid);
    const double g2 = discretization_cdf_gap(g, eps / 2, grid);
    const double g4 = discretization_cdf_gap(g, eps / 4, grid);
    CheckResult c;
    c.name = prefix + "discretization_convergence";
    c.measured = g4;
    c.status = (g2 < g1 && g4 < g2) ? CheckStatus::Pass : CheckStatus::Fail;
    c.detail = "sup gaps " + shortest_repr(g1) + ", " + shortest_repr(g2) + ", " + shortest_repr(g4) +
               " at eps, eps/2, eps/4";
    return c;
  });
}

void spectral_checks(Battery& b, const std::vector<double>& pi, const QFamily& fam, double residual) {
  b.add(bound("spectral_dual_intertwining", residual, kIdentityTol));
  b.add(bound("q_family_nonnegative", std::max(0.0, -fam.min_entry_before_clamp), kQClamp));
  const Matrix<double>& qd = fam.q.back();
  double worst = 0.0;
  for (std::size_t i = 0; i < qd.rows(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < qd.cols(); ++j) row += std::fabs(qd(i, j) - pi[j]);
    worst = std::max(worst, row);
  }
  b.add(bound("q_d_stationary", worst, kIdentityTol));
}

void mc_checks(Battery& b, const SstReport& rep) {
  const double n = static_cast<double>(rep.replicas);
  const std::string scale = "N = " + std::to_string(rep.replicas);
  b.add(bound("mc_absorption_law_ks", rep.ks, std::max(0.006, 1.9 / std::sqrt(n)), scale));
  b.add(bound("mc_exit_law_tv", rep.tv, std::max(0.01, 3.2 / std::sqrt(n)), scale));
  if (rep.independence.p_value) {
    CheckResult c;
    c.name = "mc_independence_chi_square";
    c.measured = *rep.independence.p_value;
    c.threshold = 1e-3;
    c.status = *rep.independence.p_value >= 1e-3 ? CheckStatus::Pass : CheckStatus::Fail;
    c.detail = "p-value (must not fall below the threshold); statistic " +
               shortest_repr(rep.independence.statistic) + ", dof " + std::to_string(rep.independence.dof);
    b.add(c);
  } else {
    b.add(skipped("mc_independence_chi_square", "degenerate contingency table"));
  }
  b.add(bound("mc_sojourn_means", rep.max_level_z, 5.0, "max |z| over levels"));
  b.add(bound("mc_primal_transitions", rep.max_transition_z, 5.0,
              "max |z|; structural violations " + std::to_string(rep.structural_violations)));
  if (rep.structural_violations > 0) b.add(bound("mc_primal_support", 1.0, 0.0));
}

void spectral_skips(Battery& b, const std::string& reason) {
  for (const char* name : {"spectral_dual_intertwining", "q_family_nonnegative", "q_d_stationary"})
    b.add(skipped(name, reason));
}

void mc_skips(Battery& b, const std::string& reason) {
  for (const char* name : {"mc_absorption_law_ks", "mc_exit_law_tv", "mc_independence_chi_square",
                           "mc_sojourn_means", "mc_primal_transitions"})
    b.add(skipped(name, reason));
}

std::uint64_t require_seed(const VerifyOptions& opts) {
  if (!opts.seed) throw Error(ErrorCode::InvalidArgument, "profile full needs an explicit seed");
  return *opts.seed;
}

void verify_kernel(Battery& b, const ChainSpec& spec, const VerifyOptions& opts) {
  const ExactKernel& ek = *spec.exact_kernel;
  const DiscreteKernel& k = *spec.kernel;
  const ValidationReport& rep = spec.report;

  if (rep.ergodic && rep.monotone) {
    b.run("classical_dual_intertwining_exact", [&] {
      const auto pair = classical_dual(ek);
      return bound("classical_dual_intertwining_exact", to_double(pair.residual), 0.0,
                   pair.sharp ? "sharp link" : "link not sharp");
    });
    const DiscreteKernel dual = classical_dual(ek).dual.cast<double>();
    absorbing_kernel_checks(b, "classical_dual.", dual);
  } else {
    b.add(skipped("classical_dual_intertwining_exact",
                  rep.ergodic ? "kernel is not monotone" : "kernel is not ergodic"));
  }

  if (rep.absorbing_top) {
    absorbing_kernel_checks(b, "", k);
    b.run("anti_dual_roundtrip_exact", [&] {
      if (!rep.strictly_monotone)
        return skipped("anti_dual_roundtrip_exact", "kernel is not strictly monotone");
      for (int i = 0; i < ek.d(); ++i)
        if (!(ek.p(i) > 0)) return skipped("anti_dual_roundtrip_exact", "a birth probability vanishes");
      for (int i = 1; i < ek.d(); ++i)
        if (!(ek.q(i) > 0)) return skipped("anti_dual_roundtrip_exact", "a transient death probability vanishes");
      const auto res = anti_dual(ek);
      const bool same = classical_dual(res.pair.primal).dual == ek;
      CheckResult c = bound("anti_dual_roundtrip_exact", to_double(res.pair.residual), 0.0,
                            "eta = " + res.eta.get_str());
      if (!same) c.status = CheckStatus::Fail;
      return c;
    });
  } else {
    for (const char* name : {"absorption_vs_geometric_convolution", "pgf_grid", "lazy_pgf_identity",
                             "anti_dual_roundtrip_exact"})
      b.add(skipped(name, "top state is not absorbing"));
  }

  if (!rep.ergodic) {
    spectral_skips(b, "kernel is not ergodic");
    mc_skips(b, "kernel is not ergodic");
    return;
  }
  const Spectrum spec_values = eigenvalues_discrete(k);
  const double theta_min = min_of(spec_values.nontrivial());
  if (theta_min < -kNegativeEigenvalueSnap) {
    const std::string why = "negative eigenvalue " + shortest_repr(theta_min);
    spectral_skips(b, why);
    mc_skips(b, why);
    return;
  }
  b.run("spectral_dual", [&] {
    const auto pair = spectral_dual_discrete(k);
    const auto pi = stationary_pmf(k);
    spectral_checks(b, {pi.weights().begin(), pi.weights().end()}, q_family_discrete(k),
                    pair.residual);
    return bound("spectral_dual_sharp", pair.sharp ? 0.0 : 1.0, 0.0);
  });
  if (opts.profile == VerifyProfile::Full) {
    const std::uint64_t seed = require_seed(opts);
    b.run("monte_carlo_sst", [&] {
      SimulationOptions so;
      so.threads = opts.threads;
      mc_checks(b, monte_carlo_sst(k, opts.replicas, seed, so));
      return bound("mc_completed", 0.0, 0.0, "seed " + std::to_string(seed));
    });
  } else {
    mc_skips(b, "profile exact");
  }
}

void verify_generator(Battery& b, const ChainSpec& spec, const VerifyOptions& opts) {
  const ExactGenerator& eg = *spec.exact_generator;
  const ContinuousGenerator& g = *spec.generator;
  const ValidationReport& rep = spec.report;

  if (rep.ergodic) {
    b.run("classical_dual_intertwining_exact", [&] {
      const auto pair = classical_dual(eg);
      return bound("classical_dual_intertwining_exact", to_double(pair.residual), 0.0,
                   pair.sharp ? "sharp link" : "link not sharp");
    });
    absorbing_generator_checks(b, "classical_dual.", classical_dual(eg).dual.cast<double>());
  } else {
    b.add(skipped("classical_dual_intertwining_exact", "generator is not ergodic"));
  }

  if (rep.absorbing_top) {
    absorbing_generator_checks(b, "", g);
    b.run("anti_dual_roundtrip_exact", [&] {
      for (int i = 0; i < eg.d(); ++i)
        if (!(eg.birth(i) > 0)) return skipped("anti_dual_roundtrip_exact", "a birth rate vanishes");
      for (int i = 1; i < eg.d(); ++i)
        if (!(eg.death(i) > 0)) return skipped("anti_dual_roundtrip_exact", "a transient death rate vanishes");
      const auto res = anti_dual_generator(eg);
      const bool same = classical_dual(res.pair.primal).dual == eg;
      CheckResult c = bound("anti_dual_roundtrip_exact", to_double(res.pair.residual), 0.0,
                            "eta = " + res.eta.get_str());
      if (!same) c.status = CheckStatus::Fail;
      return c;
    });
  } else {
    for (const char* name : {"absorption_cdf_vs_hypoexponential", "occupation_gaussian_split",
                             "discretization_convergence", "anti_dual_roundtrip_exact"})
      b.add(skipped(name, "top state is not absorbing"));
  }

  if (!rep.ergodic) {
    spectral_skips(b, "generator is not ergodic");
    mc_skips(b, "generator is not ergodic");
    return;
  }
  b.run("spectral_dual", [&] {
    const auto pair = spectral_dual_generator(g);
    const auto pi = stationary_pmf(g);
    const double scale = std::max(1.0, inf_norm(g.matrix()));
    spectral_checks(b, {pi.weights().begin(), pi.weights().end()}, q_family_continuous(g),
                    pair.residual / scale);
    return bound("spectral_dual_sharp", pair.sharp ? 0.0 : 1.0, 0.0);
  });
  if (opts.profile == VerifyProfile::Full) {
    const std::uint64_t seed = require_seed(opts);
    b.run("monte_carlo_sst", [&] {
      SimulationOptions so;
      so.threads = opts.threads;
      mc_checks(b, monte_carlo_sst(g, opts.replicas, seed, so));
      return bound("mc_completed", 0.0, 0.0, "seed " + std::to_string(seed));
    });
  } else {
    mc_skips(b, "profile exact");
  }
}

}  // namespace

VerifyReport verify(const ChainSpec& spec, const VerifyOptions& opts) {
  Battery b;
  b.add(bound("validation", spec.report.ok() ? 0.0 : 1.0, 0.0,
              "monotonicity " + std::string(to_string(spec.report.monotonicity))));
  if (spec.time == TimeType::Discrete)
    verify_kernel(b, spec, opts);
  else
    verify_generator(b, spec, opts);
  return b.take();
}

nlohmann::ordered_json to_json(const VerifyReport& report) {
  nlohmann::ordered_json j;
  j["passed"] = report.passed();
  auto checks = nlohmann::ordered_json::array();
  for (const auto& c : report.checks) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["status"] = std::string(to_string(c.status));
    e["measured"] = c.measured ? real_json(*c.measured) : nlohmann::ordered_json(nullptr);
    e["threshold"] = c.threshold ? real_json(*c.threshold) : nlohmann::ordered_json(nullptr);
    e["detail"] = c.detail;
    checks.push_back(e);
  }
  j["checks"] = checks;
  return j;
}

}  // namespace bdssd
