#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bdssd/absorption.hpp"
#include "bdssd/chain_io.hpp"
#include "bdssd/coupling.hpp"
#include "bdssd/duality.hpp"
#include "bdssd/spectral.hpp"
#include "bdssd/verify.hpp"

namespace py = pybind11;
using namespace bdssd;

namespace {

using Rows = std::vector<std::vector<double>>;

Rows rows_of(const Matrix<double>& m) {
  Rows out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i].assign(m.row(i).begin(), m.row(i).end());
  return out;
}

std::vector<std::vector<std::string>> rows_of(const Matrix<Rational>& m) {
  std::vector<std::vector<std::string>> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i].push_back(m(i, j).get_str());
  return out;
}

std::vector<double> vec(std::span<const double> s) { return {s.begin(), s.end()}; }

std::vector<Rational> rationals(const std::vector<std::string>& xs) {
  std::vector<Rational> out;
  for (const auto& x : xs) out.push_back(parse_number(x).exact);
  return out;
}

std::vector<std::string> strings(std::span<const Rational> xs) {
  std::vector<std::string> out;
  for (const auto& x : xs) out.push_back(x.get_str());
  return out;
}

py::dict report_dict(const ValidationReport& r) {
  py::dict d;
  d["ok"] = r.ok();
  d["ergodic"] = r.ergodic;
  d["absorbing_top"] = r.absorbing_top;
  d["monotone"] = r.monotone;
  d["strictly_monotone"] = r.strictly_monotone;
  py::list v;
  for (const auto& x : r.violations) v.append(py::make_tuple(std::string(to_string(x.code)), x.index, x.detail));
  d["violations"] = v;
  return d;
}

template <class Chain>
py::dict pair_dict(const DualPair<Chain>& p) {
  py::dict d;
  d["primal"] = p.primal;
  d["dual"] = p.dual;
  d["link"] = rows_of(p.link);
  if constexpr (std::is_same_v<typename Chain::value_type, Rational>)
    d["residual"] = p.residual.get_str();
  else
    d["residual"] = p.residual;
  d["sharp"] = p.sharp;
  return d;
}

py::dict trajectory_dict(const CoupledTrajectory& t) {
  py::dict d;
  d["times"] = t.times;
  d["primal"] = t.primal;
  d["dual"] = t.dual;
  d["absorption_time"] = t.absorption_time;
  d["sojourns"] = t.sojourns;
  return d;
}

py::dict sst_dict(const SstReport& r) {
  py::dict d;
  d["replicas"] = r.replicas;
  d["degenerate"] = r.degenerate;
  d["ks"] = r.ks;
  d["tv"] = r.tv;
  d["chi_square"] = r.independence.statistic;
  d["dof"] = r.independence.dof;
  d["p_value"] = r.independence.p_value ? py::object(py::float_(*r.independence.p_value)) : py::none();
  py::list levels;
  for (const auto& l : r.levels) levels.append(py::make_tuple(l.expected_mean, l.empirical_mean, l.z));
  d["sojourns"] = levels;
  d["max_sojourn_z"] = r.max_level_z;
  d["max_transition_z"] = r.max_transition_z;
  d["structural_violations"] = r.structural_violations;
  d["exit_distribution"] = r.exit_distribution;
  d["stationary"] = r.stationary;
  return d;
}

}  // namespace

PYBIND11_MODULE(_bdssd, m) {
  m.doc() = "Strong stationary duals of birth-and-death chains";

  static py::exception<Error> error(m, "BdssdError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error;
      py::object inst = exc(e.what());
      inst.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error.ptr(), inst.ptr());
    }
  });

  py::class_<DiscreteKernel>(m, "DiscreteKernel")
      .def(py::init<std::vector<double>, std::vector<double>, std::optional<std::vector<double>>>(),
           py::arg("birth"), py::arg("death"), py::arg("hold") = py::none())
      .def_property_readonly("d", &DiscreteKernel::d)
      .def_property_readonly("births", [](const DiscreteKernel& k) { return vec(k.births()); })
      .def_property_readonly("deaths", [](const DiscreteKernel& k) { return vec(k.deaths()); })
      .def_property_readonly("holds", [](const DiscreteKernel& k) { return vec(k.holds()); })
      .def("matrix", [](const DiscreteKernel& k) { return rows_of(k.matrix()); })
      .def("__repr__", [](const DiscreteKernel& k) { return "DiscreteKernel(d=" + std::to_string(k.d()) + ")"; });

  py::class_<ContinuousGenerator>(m, "ContinuousGenerator")
      .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("birth"), py::arg("death"))
      .def_property_readonly("d", &ContinuousGenerator::d)
      .def_property_readonly("births", [](const ContinuousGenerator& g) {
        std::vector<double> v;
        for (int i = 0; i <= g.d(); ++i) v.push_back(g.birth(i));
        return v;
      })
      .def_property_readonly("deaths", [](const ContinuousGenerator& g) {
        std::vector<double> v;
        for (int i = 0; i <= g.d(); ++i) v.push_back(g.death(i));
        return v;
      })
      .def("matrix", [](const ContinuousGenerator& g) { return rows_of(g.matrix()); })
      .def("__repr__",
           [](const ContinuousGenerator& g) { return "ContinuousGenerator(d=" + std::to_string(g.d()) + ")"; });

  py::class_<ExactKernel>(m, "ExactKernel")
      .def(py::init([](const std::vector<std::string>& b, const std::vector<std::string>& d,
                       const std::optional<std::vector<std::string>>& h) {
             std::optional<std::vector<Rational>> hold;
             if (h) hold = rationals(*h);
             return ExactKernel(rationals(b), rationals(d), hold);
           }),
           py::arg("birth"), py::arg("death"), py::arg("hold") = py::none())
      .def_property_readonly("d", &ExactKernel::d)
      .def_property_readonly("births", [](const ExactKernel& k) { return strings(k.births()); })
      .def_property_readonly("deaths", [](const ExactKernel& k) { return strings(k.deaths()); })
      .def_property_readonly("holds", [](const ExactKernel& k) { return strings(k.holds()); })
      .def("to_float", [](const ExactKernel& k) { return k.cast<double>(); })
      .def("__eq__", [](const ExactKernel& a, const ExactKernel& b) { return a == b; });

  m.def("load_chain", [](const std::string& path) -> py::object {
    const ChainSpec s = load_chain_spec(path);
    if (s.time == TimeType::Discrete) return py::cast(*s.kernel);
    return py::cast(*s.generator);
  }, py::arg("path"), "Read a chain-spec JSON file.");
  m.def("load_exact_kernel", [](const std::string& path) {
    const ChainSpec s = load_chain_spec(path);
    if (!s.exact_kernel) throw Error(ErrorCode::InvalidArgument, path + " is not a discrete chain");
    return *s.exact_kernel;
  }, py::arg("path"));

  m.def("validate", [](const DiscreteKernel& k) { return report_dict(validate_discrete(k)); });
  m.def("validate", [](const ContinuousGenerator& g) { return report_dict(validate_generator(g)); });
  m.def("stationary_pmf", [](const DiscreteKernel& k) { return vec(stationary_pmf(k).weights()); });
  m.def("stationary_pmf", [](const ContinuousGenerator& g) { return vec(stationary_pmf(g).weights()); });
  m.def("lazy", [](const DiscreteKernel& k, double eps) { return lazy(k, eps); });
  m.def("discretize", [](const ContinuousGenerator& g, std::optional<double> eps) {
    return discretize(g, eps ? *eps : auto_eps(g));
  }, py::arg("gen"), py::arg("eps") = py::none());

  m.def("eigenvalues", [](const DiscreteKernel& k) { return eigenvalues_discrete(k).values; });
  m.def("eigenvalues", [](const ContinuousGenerator& g) { return eigenvalues_generator(g).values; });

  m.def("classical_dual", [](const DiscreteKernel& k) { return pair_dict(classical_dual(k)); });
  m.def("classical_dual", [](const ContinuousGenerator& g) { return pair_dict(classical_dual(g)); });
  m.def("classical_dual", [](const ExactKernel& k) { return pair_dict(classical_dual(k)); });
  m.def("anti_dual", [](const DiscreteKernel& k, std::optional<double> eta, double margin) {
    AntiDualOptions<double> o;
    o.eta = eta;
    o.margin = margin;
    auto r = anti_dual(k, o);
    py::dict d = pair_dict(r.pair);
    d["eta"] = r.eta;
    d["halvings"] = r.halvings;
    d["cdf"] = r.cdf;
    return d;
  }, py::arg("dual"), py::arg("eta") = py::none(), py::arg("margin") = 1e-3);
  m.def("anti_dual", [](const ExactKernel& k, std::optional<std::string> eta, std::string margin) {
    AntiDualOptions<Rational> o;
    if (eta) o.eta = parse_number(*eta).exact;
    o.margin = parse_number(margin).exact;
    auto r = anti_dual(k, o);
    py::dict d = pair_dict(r.pair);
    d["eta"] = r.eta.get_str();
    d["halvings"] = r.halvings;
    d["cdf"] = strings(r.cdf);
    return d;
  }, py::arg("dual"), py::arg("eta") = py::none(), py::arg("margin") = "1/1000");
  m.def("anti_dual", [](const ContinuousGenerator& g, std::optional<double> eta, double margin) {
    AntiDualOptions<double> o;
    o.eta = eta;
    o.margin = margin;
    auto r = anti_dual_generator(g, o);
    py::dict d = pair_dict(r.pair);
    d["eta"] = r.eta;
    d["cdf"] = r.cdf;
    d["warnings"] = r.warnings;
    return d;
  }, py::arg("dual"), py::arg("eta") = py::none(), py::arg("margin") = 1e-3);
  m.def("spectral_dual", [](const DiscreteKernel& k) { return pair_dict(spectral_dual_discrete(k)); });
  m.def("spectral_dual", [](const ContinuousGenerator& g) { return pair_dict(spectral_dual_generator(g)); });

  m.def("absorption_pmf", [](const DiscreteKernel& k, double tol) {
    const LatticePmf p = absorption_pmf(k, tol);
    return py::make_tuple(p.weights, p.tail);
  }, py::arg("kernel"), py::arg("tol") = kDefaultTailTol);
  m.def("geometric_convolution", [](const std::vector<double>& thetas, double tol) {
    const LatticePmf p = geometric_convolution(thetas, tol);
    return py::make_tuple(p.weights, p.tail);
  }, py::arg("thetas"), py::arg("tol") = kDefaultTailTol);
  m.def("pgf_product", [](const std::vector<double>& thetas, double u) { return pgf_product(thetas, u); });
  m.def("absorption_cdf", [](const ContinuousGenerator& g, const std::vector<double>& t) {
    return absorption_cdf_continuous(g, t).values;
  });
  m.def("hypoexponential_cdf", [](const std::vector<double>& rates, const std::vector<double>& t) {
    return hypoexponential_cdf(rates, t).values;
  });
  m.def("occupation_laplace", [](const ContinuousGenerator& g, const std::vector<double>& u) {
    return occupation_laplace(g, OccupationQuery(u));
  });
  m.def("gaussian_split_residual", [](const ContinuousGenerator& g, const std::vector<double>& u) {
    return gaussian_split_residual(g, OccupationQuery(u));
  });

  m.def("run_coupled", [](const DiscreteKernel& k, std::uint64_t seed, std::uint64_t replica) {
    return trajectory_dict(run_coupled_discrete(k, {seed, replica}));
  }, py::arg("kernel"), py::arg("seed"), py::arg("replica") = 0);
  m.def("run_coupled", [](const ContinuousGenerator& g, std::uint64_t seed, std::uint64_t replica) {
    return trajectory_dict(run_coupled_continuous(g, {seed, replica}));
  }, py::arg("gen"), py::arg("seed"), py::arg("replica") = 0);
  m.def("run_coordinate_dual", [](int d, std::uint64_t seed, std::uint64_t replica) {
    return trajectory_dict(run_coordinate_dual(d, {seed, replica}));
  }, py::arg("d"), py::arg("seed"), py::arg("replica") = 0);
  m.def("monte_carlo_sst", [](const DiscreteKernel& k, std::size_t n, std::uint64_t seed, bool coordinate,
                              unsigned threads) {
    SimulationOptions o;
    o.coordinate_dual = coordinate;
    o.threads = threads;
    SstReport r;
    {
      py::gil_scoped_release release;
      r = monte_carlo_sst(k, n, seed, o);
    }
    return sst_dict(r);
  }, py::arg("kernel"), py::arg("replicas"), py::arg("seed"), py::arg("coordinate_dual") = false,
     py::arg("threads") = 0);
  m.def("monte_carlo_sst", [](const ContinuousGenerator& g, std::size_t n, std::uint64_t seed, unsigned threads) {
    SimulationOptions o;
    o.threads = threads;
    SstReport r;
    {
      py::gil_scoped_release release;
      r = monte_carlo_sst(g, n, seed, o);
    }
    return sst_dict(r);
  }, py::arg("gen"), py::arg("replicas"), py::arg("seed"), py::arg("threads") = 0);

  m.def("verify", [](const std::string& path, const std::string& profile, std::optional<std::uint64_t> seed,
                     std::size_t replicas) {
    VerifyOptions o;
    o.profile = parse_verify_profile(profile);
    o.seed = seed;
    o.replicas = replicas;
    const VerifyReport r = verify(load_chain_spec(path), o);
    py::list checks;
    for (const auto& c : r.checks) {
      py::dict d;
      d["name"] = c.name;
      d["status"] = std::string(to_string(c.status));
      d["measured"] = c.measured ? py::object(py::float_(*c.measured)) : py::none();
      d["detail"] = c.detail;
      checks.append(d);
    }
    return py::make_tuple(r.passed(), checks);
  }, py::arg("path"), py::arg("profile") = "exact", py::arg("seed") = py::none(), py::arg("replicas") = 100000);
}
