#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ricci_bound/bounds.hpp"
#include "ricci_bound/chain.hpp"
#include "ricci_bound/curvature.hpp"
#include "ricci_bound/equilibrium.hpp"
#include "ricci_bound/error.hpp"
#include "ricci_bound/jump_process.hpp"

namespace ricci::cli {
namespace {

constexpr double kSlack = 1e-12;

struct Model {
  MetricChain chain;
  std::size_t origin = 0;
  ProfileOptions options;
  std::string description;
};

Model load_model(const RunConfig& c) {
  Model m;
  if (c.chain_file) {
    m.chain = load_chain(*c.chain_file);
    m.description = "chain file " + c.chain_file->string();
  } else if (c.model == "mmk") {
    m.chain = build_mmk_chain(c.n0, c.k, c.trunc.value_or(default_mmk_truncation(c.n0, c.k)));
    m.description = "M/M/k chain n0=" + std::to_string(c.n0) + " k=" + std::to_string(c.k);
  } else if (c.model == "ou") {
    m.chain = build_discrete_ou_chain(c.alpha.value_or(0.5), c.grid_width, c.grid_step);
    m.options.s2_method = SubGaussianMethod::GaussianVariance;
    m.description = "discretized OU chain";
  } else if (c.model == "walk") {
    m.chain = build_reflected_walk(c.walk_p, c.trunc.value_or(60));
    m.description = "reflected walk";
  } else {
    throw DomainError("unknown model '" + c.model + "'");
  }
  m.origin = c.origin.value_or(m.chain.origin_hint.value_or(0));
  if (m.origin >= m.chain.size()) throw DomainError("origin index out of range");
  return m;
}

SearchStrategy strategy_of(const std::string& s) {
  if (s == "paper") return SearchStrategy::PaperDefault;
  if (s == "grid") return SearchStrategy::Grid;
  if (s == "convex") return SearchStrategy::AlphaConvexity;
  throw DomainError("unknown strategy '" + s + "'");
}

std::ofstream open_out(const RunConfig& c, const std::string& name) {
  std::filesystem::create_directories(c.out);
  std::ofstream f(c.out / name);
  if (!f) throw Error("cannot write " + (c.out / name).string());
  return f;
}

void write_json(const RunConfig& c, const std::string& name, const nlohmann::json& doc) {
  open_out(c, name) << doc.dump(2) << '\n';
}

double max_distance(const MetricChain& chain, std::size_t origin) {
  double d = 0.0;
  for (std::size_t x = 0; x < chain.size(); ++x) d = std::max(d, chain.dist(x, origin));
  return d;
}

// Levels for a comparison: the user's range, else d0 followed by every
// distinct distance beyond it.
std::vector<double> comparison_levels(const RunConfig& c, const MetricChain& chain, std::size_t origin,
                                      double from, std::ostream& log) {
  std::vector<double> out;
  if (c.levels) {
    for (double l : parse_range(*c.levels)) {
      if (l >= from) out.push_back(l);
    }
    if (out.empty()) throw DomainError("every requested level lies below d0 = " + std::to_string(from));
    if (out.front() > from + 1e-12 && parse_range(*c.levels).front() < from) {
      log << "note: levels below d0 = " << from << " dropped\n";
    }
    return out;
  }
  out.push_back(from);
  std::vector<double> d;
  for (std::size_t x = 0; x < chain.size(); ++x) {
    const double v = chain.dist(x, origin);
    if (v > from) d.push_back(v);
  }
  std::sort(d.begin(), d.end());
  for (double v : d) {
    if (v - out.back() > 1e-9) out.push_back(v);
  }
  return out;
}

StationaryResult ground_truth(const MetricChain& chain) {
  try {
    return stationary_birth_death(chain);
  } catch (const DomainError&) {
    return stationary_power(chain);
  }
}

struct Comparison {
  std::vector<double> levels;
  std::vector<double> empirical;
  std::vector<double> bound;
  std::size_t violations = 0;
};

Comparison compare(const TailCurve& bound, const TailCurve& tail) {
  Comparison cmp;
  cmp.levels = bound.levels;
  cmp.bound = bound.values;
  cmp.empirical = tail.values;
  for (std::size_t i = 0; i < cmp.levels.size(); ++i) {
    if (!(cmp.bound[i] - cmp.empirical[i] >= -kSlack)) ++cmp.violations;
  }
  return cmp;
}

void write_comparison(const RunConfig& c, const Comparison& cmp) {
  if (c.format == "json") {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < cmp.levels.size(); ++i) {
      const double b = cmp.bound[i];
      rows.push_back({{"l", cmp.levels[i]},
                      {"empirical", cmp.empirical[i]},
                      {"bound", std::isfinite(b) ? nlohmann::json(b) : nlohmann::json(nullptr)},
                      {"holds", b - cmp.empirical[i] >= -kSlack}});
    }
    write_json(c, "comparison.json", rows);
    return;
  }
  auto f = open_out(c, "comparison.csv");
  f << "l,empirical,bound,holds\n" << std::setprecision(17);
  for (std::size_t i = 0; i < cmp.levels.size(); ++i) {
    f << cmp.levels[i] << ',' << cmp.empirical[i] << ',' << cmp.bound[i] << ','
      << (cmp.bound[i] - cmp.empirical[i] >= -kSlack ? 1 : 0) << '\n';
  }
}

void write_bounds(const RunConfig& c, const std::vector<TailCurve>& curves) {
  if (c.format == "json") {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& curve : curves) {
      nlohmann::json raw = nlohmann::json::array();
      for (double v : curve.values) raw.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
      doc.push_back({{"kind", to_string(curve.kind)}, {"levels", curve.levels}, {"bound_raw", raw}});
    }
    write_json(c, "bounds.json", doc);
    return;
  }
  auto f = open_out(c, "bounds.csv");
  write_tail_csv(f, curves);
}

void write_stationary(const RunConfig& c, const StationaryResult& r, const MetricChain& chain) {
  if (c.format == "json") {
    write_json(c, "stationary.json",
               {{"method", to_string(r.method)}, {"residual", r.residual}, {"points", chain.points},
                {"mass", r.distribution}});
    return;
  }
  auto f = open_out(c, "stationary.csv");
  write_stationary_csv(f, r, chain);
}

void write_verdict(const RunConfig& c, const std::string& text) { open_out(c, "verdict.txt") << text << '\n'; }

double epsilon_or(const RunConfig& c, double fallback) { return c.epsilon.value_or(fallback); }

int cmd_curvature(const RunConfig& c, std::ostream& log) {
  const auto m = load_model(c);
  const auto p = compute_profile(m.chain, epsilon_or(c, 1.0), m.origin, m.options);
  write_json(c, "profile.json", profile_to_json(p));
  if (c.format == "csv") {
    auto f = open_out(c, "curvature.csv");
    f << "point,distance,kappa_local,envelope\n" << std::setprecision(17);
    for (std::size_t x = 0; x < m.chain.size(); ++x) {
      const double d = m.chain.dist(x, m.origin);
      f << m.chain.points[x] << ',' << d << ',' << p.kappa_local[x] << ',' << p.envelope(d) << '\n';
    }
  }
  log << m.description << ", epsilon=" << p.epsilon << ": rho=" << p.rho << " J=" << p.j0 << " s2=" << p.s2
      << " K(0)=" << p.envelope(0.0) << "\n";
  for (const auto& n : p.notes) log << "note: " << n << "\n";
  return kPass;
}

struct BoundRun {
  CurvatureProfile profile;
  BoundParams params;
  std::vector<TailCurve> curves;  // the selected princ curve first
};

BoundRun bound_pipeline(const RunConfig& c, const Model& m, double eps, const std::vector<double>* levels_in,
                        std::ostream& log) {
  BoundRun r;
  r.profile = compute_profile(m.chain, eps, m.origin, m.options);
  for (const auto& n : r.profile.notes) log << "note: " << n << "\n";
  SearchOptions so;
  so.reference_level = c.reference;
  r.params = search_params(r.profile, strategy_of(c.strategy), so);
  write_json(c, "profile.json", profile_to_json(r.profile));
  write_json(c, "params.json", params_to_json(r.params));
  if (!r.params.admissible) {
    std::vector<std::string> lines;
    for (const auto& ch : r.params.admissibility_report) {
      if (!ch.holds) lines.push_back(ch.condition + " fails");
    }
    throw InfeasibleError("the selected parameters are not admissible", lines);
  }
  const auto levels = levels_in ? *levels_in : comparison_levels(c, m.chain, m.origin, r.params.d0, log);
  r.curves.push_back(bound_princ(r.profile, r.params, levels));
  if (r.params.d0 == paper_d0(r.profile)) {
    // the same pair also has the closed form
    r.curves.push_back(bound_theorem1(r.profile, levels).closed_form);
  }
  write_bounds(c, r.curves);
  log << m.description << ", epsilon=" << eps << ": rho=" << r.profile.rho << " s2=" << r.profile.s2
      << "; strategy " << c.strategy << " gives alpha=" << r.params.alpha << " d0=" << r.params.d0 << "\n";
  return r;
}

int cmd_bound(const RunConfig& c, std::ostream& log) {
  const auto m = load_model(c);
  bound_pipeline(c, m, epsilon_or(c, 1.0), nullptr, log);
  return kPass;
}

int cmd_stationary(const RunConfig& c, std::ostream& log) {
  const auto m = load_model(c);
  const auto r = ground_truth(m.chain);
  write_stationary(c, r, m.chain);
  log << m.description << ": " << to_string(r.method) << ", residual " << r.residual << ", last-10 mass "
      << truncation_mass(r) << "\n";
  return kPass;
}

int verify_model(const RunConfig& c, const Model& m, double eps, std::ostream& log) {
  const auto run = bound_pipeline(c, m, eps, nullptr, log);
  const auto pi = ground_truth(m.chain);
  write_stationary(c, pi, m.chain);
  const double tail_mass = truncation_mass(pi);
  if (tail_mass > 1e-10) {
    log << "warning: stationary mass " << tail_mass << " on the last 10 states; truncation may bias the tail\n";
  }
  const auto& bound = run.curves.front();
  auto cmp = compare(bound, empirical_tail(pi, m.chain, m.origin, bound.levels));
  for (std::size_t i = 1; i < run.curves.size(); ++i) {
    cmp.violations += compare(run.curves[i], empirical_tail(pi, m.chain, m.origin, run.curves[i].levels)).violations;
  }
  write_comparison(c, cmp);
  const bool pass = cmp.violations == 0;
  std::ostringstream verdict;
  verdict << (pass ? "PASS" : "FAIL") << ": " << cmp.levels.size() << " levels, " << cmp.violations
          << " violations";
  write_verdict(c, verdict.str());
  log << verdict.str() << "\n";
  return pass ? kPass : kViolation;
}

int cmd_verify(const RunConfig& c, std::ostream& log) {
  const auto m = load_model(c);
  return verify_model(c, m, epsilon_or(c, 1.0), log);
}

// Stationary density of d(x, x0) next to the bound, one file per regime.
void write_regime(const RunConfig& c, const std::string& name, int n0, int k, std::ostream& log) {
  const auto chain = build_mmk_chain(n0, k, default_mmk_truncation(n0, k));
  const auto origin = static_cast<std::size_t>(n0);
  std::vector<double> eps;
  for (int e = 1; e <= 10; ++e) eps.push_back(e);
  const double top = max_distance(chain, origin);
  const auto sweep = epsilon_sweep(chain, origin, eps, top);
  if (!sweep.argmin_onset_epsilon) throw InfeasibleError("no usable epsilon for " + name, {});
  const auto p = compute_profile(chain, *sweep.argmin_onset_epsilon, origin);
  const auto params = search_params(p, SearchStrategy::Grid);
  const auto pi = stationary_birth_death(chain);

  std::vector<double> levels;
  for (double l = 0.0; l <= top + 1e-9; l += 1.0) levels.push_back(l);
  const auto tail = empirical_tail(pi, chain, origin, levels);
  auto f = open_out(c, name + ".csv");
  f << "l,stationary_density,stationary_tail,bound_raw,bound_clamped\n" << std::setprecision(17);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double l = levels[i];
    const double next = i + 1 < levels.size() ? tail.values[i + 1] : 0.0;
    f << l << ',' << tail.values[i] - next << ',' << tail.values[i] << ',';
    if (l >= params.d0) {
      const double b = std::exp(log_bound_princ(p, params.alpha, params.d0, l));
      f << b << ',' << std::min(b, 1.0);
    } else {
      f << ',';
    }
    f << '\n';
  }
  log << name << ": n0=" << n0 << " k=" << k << " epsilon=" << p.epsilon << " alpha=" << params.alpha
      << " d0=" << params.d0 << "\n";
}

int cmd_example_mmk(const RunConfig& c, std::ostream& log) {
  RunConfig cc = c;
  cc.model = "mmk";
  cc.chain_file.reset();
  const auto m = load_model(cc);
  const int status = verify_model(cc, m, epsilon_or(cc, 1.0), log);
  write_regime(cc, "regime_sqrt_gap", 25, 30, log);
  write_regime(cc, "regime_small_gap", 25, 27, log);
  write_regime(cc, "regime_large_gap", 5, 15, log);
  return status;
}

int cmd_example_ou(const RunConfig& c, std::ostream& log) {
  RunConfig cc = c;
  cc.model = "ou";
  cc.chain_file.reset();
  const auto m = load_model(cc);
  return verify_model(cc, m, epsilon_or(cc, 1.5), log);
}

int cmd_example_jump(const RunConfig& c, std::ostream& log) {
  JumpProcessConfig jc;
  jc.drift_alpha = c.alpha.value_or(1.0);
  jc.horizon_T = c.horizon;
  jc.n_paths = c.paths;
  jc.seed = c.seed;
  jc.validate();
  const auto sample = simulate_paths(jc);
  const auto levels = parse_range(c.levels.value_or("2:6:1"));
  const auto rows = jump_tail_table(sample, levels, jc.drift_alpha);
  std::size_t violations = 0;
  for (const auto& r : rows) {
    if (!(r.ci_high <= r.bound)) ++violations;
  }
  if (c.format == "json") {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& r : rows) {
      doc.push_back({{"l", r.level}, {"empirical", r.empirical}, {"empirical_CI_high", r.ci_high}, {"bound", r.bound}});
    }
    write_json(c, "jump_tail.json", doc);
  } else {
    auto f = open_out(c, "jump_tail.csv");
    write_jump_tail_csv(f, rows);
  }
  if (c.write_samples) {
    auto f = open_out(c, "samples.csv");
    write_sample_csv(f, sample);
  }
  const auto mom = sample_moments(sample);
  log << "jump process alpha=" << jc.drift_alpha << " T=" << jc.horizon_T << " paths=" << jc.n_paths
      << ": mean " << mom.mean << " (1/alpha = " << 1.0 / jc.drift_alpha << ", s.e. " << mom.standard_error
      << ")\n";
  std::ostringstream verdict;
  verdict << (violations == 0 ? "PASS" : "FAIL") << ": " << rows.size()
          << " levels, " << violations << " with the 99% upper confidence end above the bound";
  write_verdict(c, verdict.str());
  log << verdict.str() << "\n";
  return violations == 0 ? kPass : kViolation;
}

int cmd_sweep(const RunConfig& c, std::ostream& log) {
  const auto m = load_model(c);
  const auto eps = parse_range(c.epsilons.value_or("1:10:1"));
  const double reference = c.reference.value_or(0.5 * max_distance(m.chain, m.origin));
  const auto table = epsilon_sweep(m.chain, m.origin, eps, reference, m.options);
  if (c.format == "json") {
    write_json(c, "sweep.json", sweep_to_json(table));
  } else {
    auto f = open_out(c, "sweep.csv");
    f << "epsilon,geodesic,skipped,rho,j0,envelope_at_origin,envelope_support_end,d0_paper,best_log_bound,"
         "best_strategy,alpha,d0,note\n"
      << std::setprecision(17);
    for (const auto& r : table.rows) {
      f << r.epsilon << ',' << r.geodesic << ',' << r.skipped << ',' << r.rho << ',' << r.j0 << ','
        << r.envelope_at_origin << ',' << r.envelope_support_end << ',' << r.d0_paper << ',' << r.best_log_bound
        << ',' << r.best_strategy << ',';
      if (r.best_params) {
        f << r.best_params->alpha << ',' << r.best_params->d0;
      } else {
        f << ',';
      }
      f << ",\"" << r.note << "\"\n";
    }
  }
  log << m.description << ": reference level " << reference;
  if (table.argmin_bound_epsilon) log << ", best bound at epsilon=" << *table.argmin_bound_epsilon;
  if (table.argmin_onset_epsilon) log << ", earliest onset at epsilon=" << *table.argmin_onset_epsilon;
  log << "\n";
  return table.argmin_bound_epsilon ? kPass : kInfeasible;
}

}  // namespace

std::vector<double> parse_range(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw DomainError("range '" + text + "' is not of the form a:b:step");
    }
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
    throw DomainError("range '" + text + "' is not of the form a:b:step with a <= b and step > 0");
  }
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  for (std::size_t i = 0; i <= count; ++i) out.push_back(parts[0] + parts[2] * static_cast<double>(i));
  return out;
}

int run(const RunConfig& config, std::ostream& log) {
  try {
    if (config.format != "csv" && config.format != "json") throw DomainError("format must be csv or json");
    const auto& cmd = config.command;
    if (cmd == "curvature") return cmd_curvature(config, log);
    if (cmd == "bound") return cmd_bound(config, log);
    if (cmd == "stationary") return cmd_stationary(config, log);
    if (cmd == "verify") return cmd_verify(config, log);
    if (cmd == "example-mmk") return cmd_example_mmk(config, log);
    if (cmd == "example-ou") return cmd_example_ou(config, log);
    if (cmd == "example-jump") return cmd_example_jump(config, log);
    if (cmd == "sweep") return cmd_sweep(config, log);
    throw DomainError("unknown command '" + cmd + "'");
  } catch (const InfeasibleError& e) {
    log << "infeasible: " << e.what() << "\n";
    for (const auto& line : e.report()) log << "  " << line << "\n";
    return kInfeasible;
  } catch (const ChainError& e) {
    log << "chain error: " << e.what();
    if (e.row() >= 0) log << " (row " << e.row() << (e.column() >= 0 ? ", column " + std::to_string(e.column()) : "") << ")";
    log << "\n";
    return kInputError;
  } catch (const DomainError& e) {
    log << "error: " << e.what() << "\n";
    // no attractive point: the theorem says nothing here
    if (std::string(e.what()).find("no attractive point") != std::string::npos) return kInfeasible;
    return kInputError;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kInputError;
  }
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Coarse Ricci curvature and concentration bounds for Markov chains"};
  app.require_subcommand(1);
  RunConfig config;

  auto add_chain = [&](CLI::App* sub) {
    sub->add_option("--chain", config.chain_file, "Chain-spec JSON file");
    sub->add_option("--model", config.model, "Builder when no file is given")
        ->check(CLI::IsMember({"mmk", "ou", "walk"}));
    sub->add_option("--n0", config.n0, "M/M/k arrival parameter");
    sub->add_option("--k", config.k, "M/M/k server count");
    sub->add_option("--trunc", config.trunc, "Truncation (largest state)");
    sub->add_option("--alpha", config.alpha, "OU contraction (default 0.5) or jump drift (default 1)");
    sub->add_option("--grid-step", config.grid_step, "OU grid step");
    sub->add_option("--grid-width", config.grid_width, "OU grid half width");
    sub->add_option("--p", config.walk_p, "Reflected walk up-probability");
    sub->add_option("--origin", config.origin, "Origin point index");
  };
  auto add_bound = [&](CLI::App* sub) {
    sub->add_option("--epsilon", config.epsilon, "Curvature scale");
    sub->add_option("--strategy", config.strategy, "Parameter search")
        ->check(CLI::IsMember({"paper", "grid", "convex"}));
    sub->add_option("--levels", config.levels, "Levels a:b:step");
    sub->add_option("--reference", config.reference, "Reference level for grid/convex searches and sweeps");
  };
  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--out", config.out, "Output directory");
    sub->add_option("--format", config.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
  };

  struct Sub {
    const char* name;
    const char* help;
    bool chain;
    bool bound;
  };
  const std::vector<Sub> subs{
      {"curvature", "Local curvature, envelope, rho, J and s^2", true, true},
      {"bound", "Tail bound curve for the chosen parameters", true, true},
      {"stationary", "Stationary distribution of the chain", true, false},
      {"verify", "Bound against the exact stationary tail, with a verdict", true, true},
      {"example-mmk", "M/M/k example end to end, plus the three regime tables", true, true},
      {"example-ou", "Discretized Ornstein-Uhlenbeck example end to end", true, true},
      {"example-jump", "Drift-jump process: Monte Carlo tail against the Poissonian bound", false, false},
      {"sweep", "Bounds across a range of curvature scales", true, true},
  };
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    if (s.chain) add_chain(sub);
    if (s.bound) add_bound(sub);
    add_output(sub);
    sub->callback([&config, name = std::string(s.name)] { config.command = name; });
    if (std::string(s.name) == "sweep") sub->add_option("--epsilons", config.epsilons, "Scales a:b:step");
    if (std::string(s.name) == "example-jump") {
      sub->add_option("--alpha", config.alpha, "Drift (default 1)");
      sub->add_option("--levels", config.levels, "Levels a:b:step (default 2:6:1)");
      sub->add_option("--seed", config.seed, "Random seed");
      sub->add_option("--paths", config.paths, "Number of simulated paths");
      sub->add_option("--horizon", config.horizon, "Simulation horizon T");
      sub->add_flag("--write-samples", config.write_samples, "Also write samples.csv");
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e);
    return status == 0 ? kPass : kInputError;
  }
  return run(config, std::cout);
}

}  // namespace ricci::cli
