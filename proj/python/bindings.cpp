#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ricci_bound/bounds.hpp"
#include "ricci_bound/chain.hpp"
#include "ricci_bound/curvature.hpp"
#include "ricci_bound/equilibrium.hpp"
#include "ricci_bound/error.hpp"
#include "ricci_bound/jump_process.hpp"
#include "ricci_bound/transport.hpp"

namespace py = pybind11;
using namespace ricci;

namespace {

py::array_t<double> to_numpy(const Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

Matrix from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw DomainError("expected a 2-d array");
  Matrix m(a.shape(0), a.shape(1));
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    for (py::ssize_t j = 0; j < a.shape(1); ++j) m(i, j) = a.at(i, j);
  }
  return m;
}

MetricChain make_chain(std::vector<std::string> points, const py::array_t<double>& dist,
                       const py::array_t<double>& kernel, std::optional<std::size_t> origin_hint) {
  // round-trip through the JSON parser so the same validation applies
  nlohmann::json doc;
  doc["points"] = points;
  doc["dist"] = nlohmann::json::array();
  doc["kernel"] = nlohmann::json::array();
  const Matrix d = from_numpy(dist);
  const Matrix k = from_numpy(kernel);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    auto r = d.row(i);
    doc["dist"].push_back(std::vector<double>(r.begin(), r.end()));
  }
  for (std::size_t i = 0; i < k.rows(); ++i) {
    auto r = k.row(i);
    doc["kernel"].push_back(std::vector<double>(r.begin(), r.end()));
  }
  if (origin_hint) doc["origin_hint"] = *origin_hint;
  return parse_chain(doc);
}

SearchStrategy strategy_of(const std::string& s) {
  if (s == "paper") return SearchStrategy::PaperDefault;
  if (s == "grid") return SearchStrategy::Grid;
  if (s == "convex") return SearchStrategy::AlphaConvexity;
  throw DomainError("strategy must be paper, grid or convex");
}

SubGaussianMethod s2_method_of(const std::string& s) {
  if (s == "hoeffding") return SubGaussianMethod::HoeffdingSupport;
  if (s == "gaussian") return SubGaussianMethod::GaussianVariance;
  if (s == "user") return SubGaussianMethod::UserSupplied;
  throw DomainError("s2_method must be hoeffding, gaussian or user");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Coarse Ricci curvature and concentration bounds for Markov chains";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ChainError>(m, "ChainError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());

  py::class_<MetricChain>(m, "MetricChain")
      .def(py::init(&make_chain), py::arg("points"), py::arg("dist"), py::arg("kernel"),
           py::arg("origin_hint") = std::nullopt)
      .def_readonly("points", &MetricChain::points)
      .def_property_readonly("dist", [](const MetricChain& c) { return to_numpy(c.dist); })
      .def_property_readonly("kernel", [](const MetricChain& c) { return to_numpy(c.kernel); })
      .def_readonly("origin_hint", &MetricChain::origin_hint)
      .def_readonly("coords", &MetricChain::coords)
      .def_readonly("kernel_variance", &MetricChain::kernel_variance)
      .def("__len__", &MetricChain::size)
      .def("to_json", [](const MetricChain& c) { return chain_to_json(c).dump(); });

  m.def("build_mmk_chain", [](int n0, int k, std::optional<int> truncation) {
    return build_mmk_chain(n0, k, truncation.value_or(default_mmk_truncation(n0, k)));
  }, py::arg("n0"), py::arg("k"), py::arg("truncation") = std::nullopt);
  m.def("build_discrete_ou_chain", &build_discrete_ou_chain, py::arg("alpha"), py::arg("grid_half_width"),
        py::arg("grid_step"));
  m.def("build_reflected_walk", &build_reflected_walk, py::arg("p"), py::arg("truncation"));
  m.def("load_chain", &load_chain, py::arg("path"));
  m.def("parse_chain", [](const std::string& text) { return parse_chain(nlohmann::json::parse(text)); },
        py::arg("text"));
  m.def("is_epsilon_geodesic", [](const MetricChain& c, double eps) {
    return check_epsilon_geodesic(c, eps).is_geodesic;
  }, py::arg("chain"), py::arg("epsilon"));

  m.def("w1", [](const MetricChain& c, std::vector<double> mu, std::vector<double> nu) {
    return w1_flow(DiscreteMeasure::from_dense(mu), DiscreteMeasure::from_dense(nu), c);
  }, py::arg("chain"), py::arg("mu"), py::arg("nu"), "W1 between dense probability vectors (min-cost flow)");
  m.def("kappa_pair", [](const MetricChain& c, std::size_t x, std::size_t y) { return kappa_pair(c, x, y); },
        py::arg("chain"), py::arg("x"), py::arg("y"));

  py::class_<Envelope>(m, "Envelope")
      .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("breakpoints"), py::arg("values"))
      .def("__call__", &Envelope::operator())
      .def("integral", &Envelope::integral)
      .def("support_end", &Envelope::support_end)
      .def_property_readonly("breakpoints", &Envelope::breakpoints)
      .def_property_readonly("values", &Envelope::values);

  py::class_<CurvatureProfile>(m, "CurvatureProfile")
      .def_readonly("epsilon", &CurvatureProfile::epsilon)
      .def_readonly("origin", &CurvatureProfile::origin)
      .def_readonly("kappa_local", &CurvatureProfile::kappa_local)
      .def_readonly("isolated", &CurvatureProfile::isolated)
      .def_readonly("envelope", &CurvatureProfile::envelope)
      .def_readonly("rho", &CurvatureProfile::rho)
      .def_readonly("j0", &CurvatureProfile::j0)
      .def_readonly("s2", &CurvatureProfile::s2)
      .def_readonly("notes", &CurvatureProfile::notes);

  m.def("compute_profile", [](const MetricChain& c, double eps, std::optional<std::size_t> origin,
                              const std::string& s2_method, double user_s2) {
    ProfileOptions opt;
    opt.s2_method = s2_method_of(s2_method);
    opt.user_s2 = user_s2;
    return compute_profile(c, eps, origin.value_or(c.origin_hint.value_or(0)), opt);
  }, py::arg("chain"), py::arg("epsilon"), py::arg("origin") = std::nullopt, py::arg("s2_method") = "hoeffding",
     py::arg("user_s2") = 0.0);

  m.def("F", &F_of);
  m.def("phi", &phi_of);
  m.def("Phi", &Phi_of);
  m.def("C_alpha_d0", &C_alpha_d0, py::arg("profile"), py::arg("alpha"), py::arg("d0"));
  m.def("Cprime_alpha_d0", &Cprime_alpha_d0, py::arg("profile"), py::arg("alpha"), py::arg("d0"));
  m.def("log_bound_princ", &log_bound_princ, py::arg("profile"), py::arg("alpha"), py::arg("d0"), py::arg("l"));

  py::class_<BoundParams>(m, "BoundParams")
      .def_readonly("alpha", &BoundParams::alpha)
      .def_readonly("d0", &BoundParams::d0)
      .def_readonly("epsilon", &BoundParams::epsilon)
      .def_readonly("admissible", &BoundParams::admissible);
  m.def("make_params", &make_params, py::arg("profile"), py::arg("alpha"), py::arg("d0"));
  m.def("search_params", [](const CurvatureProfile& p, const std::string& strategy,
                            std::optional<double> reference_level) {
    SearchOptions so;
    so.reference_level = reference_level;
    return search_params(p, strategy_of(strategy), so);
  }, py::arg("profile"), py::arg("strategy") = "paper", py::arg("reference_level") = std::nullopt);

  py::class_<TailCurve>(m, "TailCurve")
      .def_readonly("levels", &TailCurve::levels)
      .def_readonly("values", &TailCurve::values)
      .def_readonly("log_values", &TailCurve::log_values)
      .def_property_readonly("kind", [](const TailCurve& t) { return std::string(to_string(t.kind)); });
  m.def("bound_princ", &bound_princ, py::arg("profile"), py::arg("params"), py::arg("levels"));

  py::class_<Theorem1Result>(m, "Theorem1Result")
      .def_readonly("d_star", &Theorem1Result::d_star)
      .def_readonly("params", &Theorem1Result::params)
      .def_readonly("closed_form", &Theorem1Result::closed_form)
      .def_readonly("via_princ", &Theorem1Result::via_princ);
  m.def("bound_theorem1", &bound_theorem1, py::arg("profile"), py::arg("levels"));

  m.def("epsilon_sweep", [](const MetricChain& c, std::size_t origin, std::vector<double> eps, double ref) {
    return sweep_to_json(epsilon_sweep(c, origin, eps, ref)).dump();
  }, py::arg("chain"), py::arg("origin"), py::arg("epsilons"), py::arg("reference_level"),
     "Sweep table as a JSON string");

  py::class_<StationaryResult>(m, "StationaryResult")
      .def_readonly("distribution", &StationaryResult::distribution)
      .def_readonly("residual", &StationaryResult::residual)
      .def_readonly("iterations", &StationaryResult::iterations)
      .def_property_readonly("method", [](const StationaryResult& r) { return std::string(to_string(r.method)); });
  m.def("stationary_birth_death", &stationary_birth_death, py::arg("chain"));
  m.def("stationary_power", [](const MetricChain& c, double tol, std::size_t max_iters) {
    return stationary_power(c, tol, max_iters);
  }, py::arg("chain"), py::arg("tol") = 1e-14, py::arg("max_iters") = 1000000);
  m.def("stationary_cesaro", &stationary_cesaro, py::arg("chain"), py::arg("start"), py::arg("n"));
  m.def("empirical_tail", &empirical_tail, py::arg("result"), py::arg("chain"), py::arg("origin"),
        py::arg("levels"));

  m.def("simulate_paths", [](double alpha, double horizon, std::size_t n_paths, std::uint64_t seed) {
    JumpProcessConfig cfg;
    cfg.drift_alpha = alpha;
    cfg.horizon_T = horizon;
    cfg.n_paths = n_paths;
    cfg.seed = seed;
    cfg.validate();
    const auto s = simulate_paths(cfg);
    py::array_t<double> out(static_cast<py::ssize_t>(s.size()));
    std::copy(s.begin(), s.end(), out.mutable_data());
    return out;
  }, py::arg("alpha") = 1.0, py::arg("horizon") = 25.0, py::arg("n_paths") = 100000, py::arg("seed") = 1);
  m.def("transform_I", [](double lambda) { return transform_I(lambda); }, py::arg("lam"));
  m.def("stationary_laplace_G", &stationary_laplace_G, py::arg("lam"), py::arg("alpha"));
  m.def("poissonian_tail_bound", &poissonian_tail_bound, py::arg("l"), py::arg("alpha"));
  m.def("clopper_pearson", &clopper_pearson, py::arg("successes"), py::arg("trials"), py::arg("confidence") = 0.99);
}
