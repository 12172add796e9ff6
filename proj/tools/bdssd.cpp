// bdssd: command-line front end for the duality library.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bdssd/absorption.hpp"
#include "bdssd/chain_io.hpp"
#include "bdssd/coupling.hpp"
#include "bdssd/duality.hpp"
#include "bdssd/spectral.hpp"
#include "bdssd/verify.hpp"

using namespace bdssd;
using ojson = nlohmann::ordered_json;

namespace {

struct Common {
  std::string chain;
  std::string mode_flag = "float";
  std::string format = "json";
  std::string output;
};

struct Resolved {
  NumericMode mode = NumericMode::Float;
  std::string mode_source;
};

Resolved resolve_mode(const Common& c, bool flag_given) {
  Resolved r;
  if (const char* env = std::getenv("BD_NUMERIC_MODE"); env && *env) {
    r.mode = parse_numeric_mode(env);
    r.mode_source = "env BD_NUMERIC_MODE";
  } else {
    r.mode = parse_numeric_mode(c.mode_flag);
    r.mode_source = flag_given ? "flag" : "default";
  }
  return r;
}

std::string csv_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw Error(ErrorCode::InvalidArgument, std::string("empty entry in ") + what);
    out.push_back(parse_number(item).value);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " is empty");
  return out;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

template <class Chain>
ojson pmf_json(const Chain& chain) {
  const auto pmf = stationary_pmf(chain);
  auto out = ojson::array();
  for (const auto& w : pmf.weights()) out.push_back(number_json(w));
  return out;
}

ojson pmf_json(const ChainSpec& spec, NumericMode mode) {
  const bool exact = mode == NumericMode::Rational;
  if (spec.time == TimeType::Discrete)
    return exact ? pmf_json(*spec.exact_kernel) : pmf_json(*spec.kernel);
  return exact ? pmf_json(*spec.exact_generator) : pmf_json(*spec.generator);
}

template <class Pair>
ojson pair_json(const Pair& p) {
  ojson j;
  j["primal"] = chain_json(p.primal);
  j["dual"] = chain_json(p.dual);
  j["link"] = matrix_json(p.link);
  j["residual"] = number_json(p.residual);
  j["sharp"] = p.sharp;
  return j;
}

template <class Result>
ojson anti_json(const Result& r, ojson& warnings) {
  ojson j = pair_json(r.pair);
  auto cdf = ojson::array();
  for (const auto& h : r.cdf) cdf.push_back(number_json(h));
  j["cdf"] = cdf;
  j["eta"] = number_json(r.eta);
  j["margin"] = number_json(r.margin);
  j["halvings"] = r.halvings;
  for (const auto& w : r.warnings) warnings.push_back(w);
  return j;
}

ojson sst_json(const SstReport& rep) {
  ojson j;
  j["time"] = rep.time == TimeType::Discrete ? "discrete" : "continuous";
  j["replicas"] = rep.replicas;
  j["degenerate"] = rep.degenerate;
  j["ks"] = real_json(rep.ks);
  j["tv"] = real_json(rep.tv);
  ojson chi;
  chi["statistic"] = real_json(rep.independence.statistic);
  chi["dof"] = rep.independence.dof;
  chi["p_value"] = rep.independence.p_value ? real_json(*rep.independence.p_value) : ojson(nullptr);
  j["independence"] = chi;
  auto levels = ojson::array();
  for (const auto& l : rep.levels) {
    ojson e;
    e["level"] = l.level;
    e["expected_mean"] = real_json(l.expected_mean);
    e["empirical_mean"] = real_json(l.empirical_mean);
    e["z"] = real_json(l.z);
    levels.push_back(e);
  }
  j["sojourns"] = levels;
  j["max_sojourn_z"] = real_json(rep.max_level_z);
  j["max_transition_z"] = real_json(rep.max_transition_z);
  j["structural_violations"] = rep.structural_violations;
  auto exit = ojson::array(), pi = ojson::array();
  for (double x : rep.exit_distribution) exit.push_back(x);
  for (double x : rep.stationary) pi.push_back(x);
  j["exit_distribution"] = exit;
  j["stationary"] = pi;
  return j;
}

void write_trajectories(const std::string& path, const std::vector<CoupledTrajectory>& trs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << "replica,time,primal,dual\n";
  for (std::size_t r = 0; r < trs.size(); ++r)
    for (std::size_t i = 0; i < trs[r].times.size(); ++i)
      out << r << ',' << csv_number(trs[r].times[i]) << ',' << trs[r].primal[i] << ','
          << trs[r].dual[i] << '\n';
}

std::vector<double> default_time_grid(const ContinuousGenerator& g) {
  double mean = 0.0, var = 0.0;
  for (double v : eigenvalues_generator(g).nontrivial()) {
    mean += 1.0 / v;
    var += 1.0 / (v * v);
  }
  std::vector<double> t;
  for (int i = 0; i <= 100; ++i) t.push_back((mean + 10.0 * std::sqrt(var)) * i / 100.0);
  return t;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strong stationary duals of birth-and-death chains"};
  app.require_subcommand(1);
  Common common;

  auto add_common = [&](CLI::App* sub, bool needs_chain = true) {
    auto* opt = sub->add_option("--chain", common.chain, "chain-spec JSON file");
    if (needs_chain) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--mode", common.mode_flag, "numeric mode: rational or float (BD_NUMERIC_MODE overrides)")
        ->check(CLI::IsMember({"rational", "exact", "float", "double"}));
    sub->add_option("--format", common.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("-o,--output", common.output, "write the report here instead of stdout");
  };

  auto* validate_cmd = app.add_subcommand("validate", "check stochasticity and classify the chain");
  add_common(validate_cmd);

  auto* eigen_cmd = app.add_subcommand("eigen", "spectrum of the kernel or of -G");
  add_common(eigen_cmd);

  std::string kind;
  std::optional<std::string> eta_text, margin_text;
  auto* dual_cmd = app.add_subcommand("dual", "classical, anti or spectral dual");
  add_common(dual_cmd);
  dual_cmd->add_option("--kind", kind, "classical | anti | spectral")
      ->required()
      ->check(CLI::IsMember({"classical", "anti", "spectral"}));
  auto* eta_opt = dual_cmd->add_option("--eta", eta_text, "anti dual: H_{d-1} = 1 - eta");
  dual_cmd->add_option("--margin", margin_text, "anti dual: minimum hold (kernels) or H_0 (generators)")
      ->excludes(eta_opt);

  bool want_pmf = false, want_cdf = false;
  std::optional<std::string> pgf_text, occupation_text, times_text;
  double tol = kDefaultTailTol;
  auto* absorb_cmd = app.add_subcommand("absorb", "law of the absorption time in d from 0");
  add_common(absorb_cmd);
  auto* g_pmf = absorb_cmd->add_flag("--pmf", want_pmf, "pmf of the absorption time (kernels)");
  auto* g_cdf = absorb_cmd->add_flag("--cdf", want_cdf, "cdf of the absorption time (generators)");
  auto* g_pgf = absorb_cmd->add_option("--pgf", pgf_text, "E u^T at u, with the eigenvalue product");
  auto* g_occ = absorb_cmd->add_option("--occupation", occupation_text,
                                       "E exp(-<u, T>) for weights u0,...,u_{d-1}");
  absorb_cmd->add_option("--times", times_text, "comma-separated times for --cdf")->needs(g_cdf);
  absorb_cmd->add_option("--tol", tol, "tail tolerance for --pmf");
  for (auto* a : {g_pmf, g_cdf, g_pgf, g_occ})
    for (auto* b : {g_pmf, g_cdf, g_pgf, g_occ})
      if (a != b) a->excludes(b);

  std::size_t replicas = 0;
  std::uint64_t seed = 0;
  bool coordinate = false;
  unsigned threads = 0;
  std::string trajectory_path;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo check of the coupled dual");
  add_common(sim_cmd);
  sim_cmd->add_option("--replicas", replicas, "number of replicas")->required();
  sim_cmd->add_option("--seed", seed, "master seed")->required();
  sim_cmd->add_flag("--coordinate-dual", coordinate, "Ehrenfest coordinate-checking dual instead");
  sim_cmd->add_option("--threads", threads, "worker threads (0 = hardware)");
  sim_cmd->add_option("--trajectories", trajectory_path, "per-step CSV of all trajectories");

  std::string profile = "exact";
  std::optional<std::uint64_t> verify_seed;
  std::size_t verify_replicas = 100'000;
  auto* verify_cmd = app.add_subcommand("verify", "run the identity battery");
  add_common(verify_cmd);
  verify_cmd->add_option("--profile", profile, "exact | full")->check(CLI::IsMember({"exact", "full"}));
  verify_cmd->add_option("--seed", verify_seed, "master seed (profile full)");
  verify_cmd->add_option("--replicas", verify_replicas, "replicas for profile full");
  verify_cmd->add_option("--threads", threads, "worker threads (0 = hardware)");

  CLI11_PARSE(app, argc, argv);

  CLI::App* sub = app.get_subcommands().front();
  const bool mode_given = sub->count("--mode") > 0;
  ojson report;
  ojson warnings = ojson::array();
  int status = 0;

  ojson echo;
  echo["subcommand"] = sub->get_name();
  echo["chain"] = common.chain;
  echo["format"] = common.format;

  try {
    const Resolved mode = resolve_mode(common, mode_given);
    echo["mode"] = std::string(to_string(mode.mode));
    echo["mode_source"] = mode.mode_source;
    const bool exact = mode.mode == NumericMode::Rational;
    const ChainSpec spec = load_chain_spec(common.chain);
    const bool discrete = spec.time == TimeType::Discrete;
    echo["time"] = discrete ? "discrete" : "continuous";
    echo["d"] = spec.d;

    Output out(common.output);
    ojson result;
    bool csv_written = false;

    if (sub == validate_cmd) {
      result = to_json(spec.report);
      if (spec.report.ergodic) result["stationary"] = pmf_json(spec, mode.mode);
    } else if (sub == eigen_cmd) {
      const Spectrum s = discrete ? eigenvalues_discrete(*spec.kernel) : eigenvalues_generator(*spec.generator);
      if (exact) warnings.push_back("eigenvalues are computed in floating point");
      if (common.format == "csv") {
        out.stream() << "index,value\n";
        for (std::size_t i = 0; i < s.values.size(); ++i)
          out.stream() << i << ',' << csv_number(s.values[i]) << '\n';
        csv_written = true;
      }
      auto vals = ojson::array();
      for (double v : s.values) vals.push_back(v);
      result["values"] = vals;
      result["order"] = discrete ? "ascending, unit eigenvalue last" : "descending, zero eigenvalue last";
    } else if (sub == dual_cmd) {
      echo["kind"] = kind;
      if (eta_text) echo["eta"] = *eta_text;
      if (margin_text) echo["margin"] = *margin_text;
      if ((eta_text || margin_text) && kind != "anti")
        throw Error(ErrorCode::InvalidArgument, "--eta and --margin apply to --kind anti only");
      if (kind == "classical") {
        if (discrete)
          result = exact ? pair_json(classical_dual(*spec.exact_kernel)) : pair_json(classical_dual(*spec.kernel));
        else
          result = exact ? pair_json(classical_dual(*spec.exact_generator))
                         : pair_json(classical_dual(*spec.generator));
      } else if (kind == "anti") {
        auto build = [&](auto tag) {
          using T = decltype(tag);
          AntiDualOptions<T> opts;
          if (eta_text) opts.eta = scalar_cast<T>(parse_number(*eta_text).exact);
          if (margin_text) opts.margin = scalar_cast<T>(parse_number(*margin_text).exact);
          return opts;
        };
        if (discrete) {
          if (exact) result = anti_json(anti_dual(*spec.exact_kernel, build(Rational())), warnings);
          else result = anti_json(anti_dual(*spec.kernel, build(0.0)), warnings);
        } else {
          if (exact) result = anti_json(anti_dual_generator(*spec.exact_generator, build(Rational())), warnings);
          else result = anti_json(anti_dual_generator(*spec.generator, build(0.0)), warnings);
        }
      } else {
        if (exact) warnings.push_back("the spectral dual is computed in floating point");
        result = discrete ? pair_json(spectral_dual_discrete(*spec.kernel))
                          : pair_json(spectral_dual_generator(*spec.generator));
      }
    } else if (sub == absorb_cmd) {
      if (!(want_pmf || want_cdf || pgf_text || occupation_text))
        throw Error(ErrorCode::InvalidArgument, "choose one of --pmf, --cdf, --pgf, --occupation");
      if (want_pmf) {
        if (!discrete) throw Error(ErrorCode::InvalidArgument, "--pmf needs a discrete chain");
        echo["query"] = "pmf";
        const LatticePmf pmf = absorption_pmf(*spec.kernel, tol);
        if (common.format == "csv") {
          out.stream() << "t,pmf\n";
          for (std::size_t t = 0; t < pmf.weights.size(); ++t)
            out.stream() << t << ',' << csv_number(pmf.weights[t]) << '\n';
          csv_written = true;
        }
        auto w = ojson::array();
        for (double x : pmf.weights) w.push_back(x);
        result["pmf"] = w;
        result["tail"] = pmf.tail;
        result["mean"] = pmf.mean();
      } else if (want_cdf) {
        if (discrete) throw Error(ErrorCode::InvalidArgument, "--cdf needs a continuous chain");
        echo["query"] = "cdf";
        const std::vector<double> times =
            times_text ? parse_list(*times_text, "--times") : default_time_grid(*spec.generator);
        const TimeGridCdf cdf = absorption_cdf_continuous(*spec.generator, times);
        if (common.format == "csv") {
          out.stream() << "t,cdf\n";
          for (std::size_t i = 0; i < cdf.times.size(); ++i)
            out.stream() << csv_number(cdf.times[i]) << ',' << csv_number(cdf.values[i]) << '\n';
          csv_written = true;
        }
        auto t = ojson::array(), v = ojson::array();
        for (double x : cdf.times) t.push_back(x);
        for (double x : cdf.values) v.push_back(x);
        result["times"] = t;
        result["cdf"] = v;
      } else if (pgf_text) {
        if (!discrete) throw Error(ErrorCode::InvalidArgument, "--pgf needs a discrete chain");
        const double u = parse_number(*pgf_text).value;
        echo["query"] = "pgf";
        echo["u"] = *pgf_text;
        const std::vector<double> theta = eigenvalues_discrete(*spec.kernel).nontrivial();
        const double direct = absorption_pmf(*spec.kernel, tol).pgf(u);
        const double product = pgf_product(theta, u);
        result["pgf"] = direct;
        result["eigenvalue_product"] = product;
        result["difference"] = std::fabs(direct - product);
      } else {
        if (discrete) throw Error(ErrorCode::InvalidArgument, "--occupation needs a continuous chain");
        echo["query"] = "occupation";
        echo["u"] = *occupation_text;
        const OccupationQuery q(parse_list(*occupation_text, "--occupation"));
        result["laplace"] = occupation_laplace(*spec.generator, q);
        result["gaussian_split_residual"] = gaussian_split_residual(*spec.generator, q);
      }
    } else if (sub == sim_cmd) {
      echo["replicas"] = replicas;
      echo["seed"] = seed;
      echo["coordinate_dual"] = coordinate;
      if (!trajectory_path.empty()) echo["trajectories"] = trajectory_path;
      SimulationOptions so;
      so.coordinate_dual = coordinate;
      so.threads = threads;
      so.keep_trajectories = !trajectory_path.empty();
      const SstReport rep = discrete ? monte_carlo_sst(*spec.kernel, replicas, seed, so)
                                     : monte_carlo_sst(*spec.generator, replicas, seed, so);
      if (so.keep_trajectories) write_trajectories(trajectory_path, rep.trajectories);
      if (rep.degenerate) warnings.push_back("fewer than two replicas: p-value undefined");
      result = sst_json(rep);
    } else if (sub == verify_cmd) {
      echo["profile"] = profile;
      VerifyOptions vo;
      vo.profile = parse_verify_profile(profile);
      vo.seed = verify_seed;
      vo.replicas = verify_replicas;
      vo.threads = threads;
      if (vo.profile == VerifyProfile::Full) {
        echo["replicas"] = verify_replicas;
        if (verify_seed) echo["seed"] = *verify_seed;
      }
      const VerifyReport vr = verify(spec, vo);
      result = to_json(vr);
      if (!vr.passed()) status = 1;
    }

    report["command"] = echo;
    report["result"] = result;
    report["warnings"] = warnings;
    report["status"] = status == 0 ? "ok" : "failed";
    if (common.format == "csv" && !csv_written)
      throw Error(ErrorCode::InvalidArgument, "csv output is available for eigen, absorb --pmf and absorb --cdf");
    if (!csv_written) out.stream() << report.dump(2) << '\n';
    std::cerr << "bdssd: " << echo.dump() << '\n';
    return status;
  } catch (const Error& e) {
    report["command"] = echo;
    report["status"] = "error";
    report["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
    report["warnings"] = warnings;
    std::cout << report.dump(2) << '\n';
    std::cerr << "bdssd: " << e.what() << '\n';
    return 2;
  }
}
