#include "ricci_bound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "ricci_bound/error.hpp"
#include "ricci_bound/parallel.hpp"

namespace ricci {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// int_a^b max(floor, g) for g linear from ga to gb
double integral_of_max(double floor, double a, double b, double ga, double gb) {
  const double len = b - a;
  if (ga >= floor && gb >= floor) return 0.5 * (ga + gb) * len;
  if (ga <= floor && gb <= floor) return floor * len;
  const double t = a + (floor - ga) / (gb - ga) * len;
  if (ga < floor) return floor * (t - a) + 0.5 * (floor + gb) * (b - t);
  return 0.5 * (ga + floor) * (t - a) + floor * (b - t);
}

void require_attractive(const CurvatureProfile& p) {
  if (!(p.rho > 0.0)) {
    throw DomainError("no attractive point at this epsilon (rho = " + fmt(p.rho) +
                      "); increase epsilon or abort");
  }
}

std::vector<std::string> describe_failures(const BoundParams& bp) {
  std::vector<std::string> lines;
  for (const auto& c : bp.admissibility_report) {
    if (!c.holds) {
      lines.push_back("alpha=" + fmt(bp.alpha) + " d0=" + fmt(bp.d0) + ": " + c.condition +
                      " fails (" + fmt(c.lhs) + " vs " + fmt(c.rhs) + ")");
    }
  }
  return lines;
}

}  // namespace

double F_of(const CurvatureProfile& p, double l) {
  const double e = p.epsilon;
  if (l <= e) return -p.j0;
  if (l < 2 * e) return p.rho;
  return p.rho + p.envelope.integral(2 * e, l);
}

double phi_of(const CurvatureProfile& p, double l) {
  const double e = p.epsilon;
  if (l <= e) return -p.j0 * l;
  if (l < 2 * e) return -p.j0 * e + p.rho * (l - e);
  return -p.j0 * e + p.rho * (l - e) + p.envelope.iterated_integral(2 * e, l);
}

double Phi_of(const CurvatureProfile& p, double l) {
  if (l < 2 * p.epsilon) throw DomainError("Phi is defined for l >= 2 epsilon only");
  return p.rho * l + p.envelope.iterated_integral(2 * p.epsilon, l);
}

double log_C_alpha_d0(const CurvatureProfile& p, double alpha, double d0) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be finite and >= 0");
  const double q = alpha * p.s2 * p.envelope(d0);
  if (q >= 1.0) {
    throw DomainError("alpha s^2 K(d0) = " + fmt(q) + " >= 1: outside the domain of C");
  }
  const double f = F_of(p, d0);
  return -alpha * f * f * (1.0 - alpha * p.s2 / (2.0 * (1.0 - q))) - 0.5 * std::log1p(-q);
}

double C_alpha_d0(const CurvatureProfile& p, double alpha, double d0) {
  return std::exp(log_C_alpha_d0(p, alpha, d0));
}

double log_Cprime_alpha_d0(const CurvatureProfile& p, double alpha, double d0) {
  const double e = p.epsilon;
  const double f0 = F_of(p, d0);
  const double lo = d0 - f0;
  const double hi = p.j0 + e;
  if (!(hi > lo) || alpha == 0.0) return 0.0;

  std::vector<double> cuts{lo, hi};
  for (double c : {e, 2 * e}) {
    if (c > lo && c < hi) cuts.push_back(c);
  }
  for (double r : p.envelope.breakpoints()) {
    if (r > 2 * e && r > lo && r < hi) cuts.push_back(r);
  }
  std::sort(cuts.begin(), cuts.end());

  // F is linear between consecutive cuts
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    if (!(b > a)) continue;
    const double mid = 0.5 * (a + b);
    const double slope = mid > 2 * e ? p.envelope(mid) : 0.0;
    const double fm = F_of(p, mid);
    total += integral_of_max(f0, a, b, fm - slope * (mid - a), fm + slope * (b - mid));
  }
  return alpha * total;
}

double Cprime_alpha_d0(const CurvatureProfile& p, double alpha, double d0) {
  return std::exp(log_Cprime_alpha_d0(p, alpha, d0));
}

BoundParams make_params(const CurvatureProfile& p, double alpha, double d0) {
  BoundParams bp;
  bp.alpha = alpha;
  bp.d0 = d0;
  bp.epsilon = p.epsilon;

  const double k = p.envelope(d0);
  const double f = F_of(p, d0);
  const double q = alpha * p.s2 * k;
  bp.admissibility_report.push_back({"d0 >= 2 epsilon", d0 >= 2 * p.epsilon, d0, 2 * p.epsilon});
  bp.admissibility_report.push_back(
      {"F(d0) > s^2 K(d0) / 2", f > p.s2 * k / 2, f, p.s2 * k / 2});
  bp.admissibility_report.push_back({"alpha s^2 K(d0) < 1", q < 1.0, q, 1.0});
  if (q < 1.0 && alpha >= 0.0) {
    const double c = C_alpha_d0(p, alpha, d0);
    bp.admissibility_report.push_back({"C(alpha, d0) < 1", c < 1.0, c, 1.0});
  } else {
    bp.admissibility_report.push_back({"C(alpha, d0) < 1", false, kInf, 1.0});
  }
  bp.admissible = alpha > 0.0 && std::all_of(bp.admissibility_report.begin(),
                                             bp.admissibility_report.end(),
                                             [](const AdmissibilityCheck& c) { return c.holds; });
  return bp;
}

const char* to_string(TailKind kind) {
  switch (kind) {
    case TailKind::Theorem1: return "theorem1";
    case TailKind::TheoremPrinc: return "theorem_princ";
    case TailKind::Empirical: return "empirical";
    case TailKind::Poissonian: return "poissonian";
  }
  return "unknown";
}

double log_bound_princ(const CurvatureProfile& p, double alpha, double d0, double l) {
  if (alpha * p.s2 * p.envelope(d0) >= 1.0) return kInf;
  const double lc = log_C_alpha_d0(p, alpha, d0);
  if (!(lc < 0.0)) return kInf;
  return log_Cprime_alpha_d0(p, alpha, d0) + lc - std::log(-std::expm1(lc)) -
         alpha * (phi_of(p, l) - phi_of(p, d0));
}

TailCurve bound_princ(const CurvatureProfile& p, const BoundParams& params,
                      const std::vector<double>& levels) {
  if (!params.admissible) {
    throw InfeasibleError("parameters are not admissible", describe_failures(params));
  }
  TailCurve curve;
  curve.kind = TailKind::TheoremPrinc;
  for (double l : levels) {
    if (l < params.d0) throw DomainError("level " + fmt(l) + " lies below d0 = " + fmt(params.d0));
    const double lv = log_bound_princ(p, params.alpha, params.d0, l);
    curve.levels.push_back(l);
    curve.log_values.push_back(lv);
    curve.values.push_back(std::exp(lv));
  }
  return curve;
}

double paper_d0(const CurvatureProfile& p) {
  require_attractive(p);
  return 2 * p.epsilon + std::numbers::ln2 * p.s2 / p.rho;
}

Theorem1Result bound_theorem1(const CurvatureProfile& p, const std::vector<double>& levels) {
  require_attractive(p);
  Theorem1Result r;
  const double e = p.epsilon;
  const double s2 = p.s2;
  const double rho = p.rho;
  r.d_star = paper_d0(p);
  r.params = make_params(p, 1.0 / (2.0 * s2), r.d_star);

  const double gap = rho * rho / (4.0 * s2);
  r.log_C0 = 3.0 * e / (2.0 * s2) * std::max(3.0 * e, rho + std::numbers::ln2 * s2 / rho) - gap +
             Phi_of(p, r.d_star) / (2.0 * s2) - std::log(-std::expm1(-gap));

  r.closed_form.kind = TailKind::Theorem1;
  r.via_princ.kind = TailKind::TheoremPrinc;
  for (double l : levels) {
    if (l < r.d_star) {
      throw DomainError("level " + fmt(l) + " lies below 2 eps + ln(2) s^2 / rho = " + fmt(r.d_star));
    }
    const double closed = r.log_C0 - Phi_of(p, l) / (2.0 * s2);
    r.closed_form.levels.push_back(l);
    r.closed_form.log_values.push_back(closed);
    r.closed_form.values.push_back(std::exp(closed));

    const double via = log_bound_princ(p, r.params.alpha, r.d_star, l);
    r.via_princ.levels.push_back(l);
    r.via_princ.log_values.push_back(via);
    r.via_princ.values.push_back(std::exp(via));
  }
  return r;
}

namespace {

struct Candidate {
  double log_bound = kInf;
  std::optional<BoundParams> params;
  std::vector<std::string> failures;
};

BoundParams grid_search(const CurvatureProfile& p, double reference, const SearchOptions& o) {
  const double e = p.epsilon;
  const double s2 = p.s2;
  const double d_star = paper_d0(p);

  std::vector<double> d0s;
  const double span = 10.0 * (p.rho + s2 / p.rho);
  const std::size_t nd = std::max<std::size_t>(o.d0_points, 2);
  for (std::size_t i = 0; i < nd; ++i) {
    d0s.push_back(2 * e + span * static_cast<double>(i) / static_cast<double>(nd - 1));
  }
  d0s.push_back(d_star);

  std::vector<Candidate> best(d0s.size());
  parallel_for(d0s.size(), [&](std::size_t i) {
    const double d0 = d0s[i];
    Candidate& c = best[i];
    if (d0 > reference) {
      c.failures.push_back("d0=" + fmt(d0) + ": beyond the reference level " + fmt(reference));
      return;
    }
    const double k = p.envelope(d0);
    const double upper = std::min(k > 0.0 ? 1.0 / (s2 * k) : kInf, 2.0 / s2);
    std::vector<double> alphas;
    const std::size_t na = std::max<std::size_t>(o.alpha_points, 2);
    for (std::size_t j = 0; j < na; ++j) {
      const double expo = -3.0 * static_cast<double>(na - 1 - j) / static_cast<double>(na - 1);
      alphas.push_back(0.99 * upper * std::pow(10.0, expo));
    }
    alphas.push_back(1.0 / (2.0 * s2));

    std::size_t rejected = 0;
    std::optional<BoundParams> first_reject;
    for (double a : alphas) {
      BoundParams bp = make_params(p, a, d0);
      if (!bp.admissible) {
        if (!first_reject) first_reject = bp;
        ++rejected;
        continue;
      }
      const double v = log_bound_princ(p, a, d0, reference);
      if (v < c.log_bound) {
        c.log_bound = v;
        c.params = std::move(bp);
      }
    }
    if (!c.params && first_reject) {
      auto lines = describe_failures(*first_reject);
      c.failures.push_back("d0=" + fmt(d0) + ": all " + std::to_string(rejected) +
                           " alpha values rejected, e.g. " + (lines.empty() ? "" : lines.front()));
    }
  });

  Candidate chosen;
  std::vector<std::string> report;
  for (auto& c : best) {
    if (c.params && c.log_bound < chosen.log_bound) {
      chosen.log_bound = c.log_bound;
      chosen.params = c.params;
    }
    report.insert(report.end(), c.failures.begin(), c.failures.end());
  }
  if (!chosen.params) {
    throw InfeasibleError("no admissible (alpha, d0) pair on the search lattice", report);
  }
  return *chosen.params;
}

BoundParams convexity_search(const CurvatureProfile& p, double reference, double d0) {
  if (reference < d0) {
    throw DomainError("reference level " + fmt(reference) + " lies below d0 = " + fmt(d0));
  }
  const double k = p.envelope(d0);
  const double f = F_of(p, d0);
  const double s2 = p.s2;

  BoundParams probe = make_params(p, 0.0, d0);
  std::vector<std::string> report;
  for (std::size_t i = 0; i < 2; ++i) {
    if (!probe.admissibility_report[i].holds) {
      const auto& c = probe.admissibility_report[i];
      report.push_back("d0=" + fmt(d0) + ": " + c.condition + " fails (" + fmt(c.lhs) + " vs " +
                       fmt(c.rhs) + ")");
    }
  }
  // ln C has slope -F^2 + s^2 K / 2 at alpha = 0; it must dip below 0
  if (report.empty() && !(f * f > s2 * k / 2)) {
    report.push_back("d0=" + fmt(d0) + ": F(d0)^2 = " + fmt(f * f) + " <= s^2 K(d0)/2 = " +
                     fmt(s2 * k / 2) + ", so C >= 1 for every alpha");
  }
  if (!report.empty()) throw InfeasibleError("no alpha gives C < 1 at this d0", report);

  // root of ln C on (0, upper); ln C < 0 to its left by convexity
  double alpha_root = 0.0;
  if (k == 0.0) {
    alpha_root = 2.0 / s2;
  } else {
    double lo = 0.0;
    double hi = 1.0 / (s2 * k);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (log_C_alpha_d0(p, mid, d0) < 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    alpha_root = lo;
  }

  auto h = [&](double a) { return log_bound_princ(p, a, d0, reference); };
  const auto [alpha, value] = boost::math::tools::brent_find_minima(h, 0.0, alpha_root, 52);
  (void)value;
  BoundParams bp = make_params(p, alpha, d0);
  if (!bp.admissible) {
    throw InfeasibleError("line search ended outside the admissible region", describe_failures(bp));
  }
  return bp;
}

}  // namespace

BoundParams search_params(const CurvatureProfile& p, SearchStrategy strategy,
                          const SearchOptions& options) {
  require_attractive(p);
  const double d_star = paper_d0(p);
  const double reference = options.reference_level.value_or(2.0 * d_star);
  switch (strategy) {
    case SearchStrategy::PaperDefault:
      return make_params(p, 1.0 / (2.0 * p.s2), d_star);
    case SearchStrategy::Grid:
      return grid_search(p, reference, options);
    case SearchStrategy::AlphaConvexity:
      return convexity_search(p, reference, options.d0.value_or(d_star));
  }
  throw DomainError("unknown search strategy");
}

SweepTable epsilon_sweep(const MetricChain& chain, std::size_t origin,
                         const std::vector<double>& epsilons, double reference_level,
                         const ProfileOptions& options) {
  SweepTable table;
  table.reference_level = reference_level;
  double best_bound = kInf;
  double best_onset = kInf;

  for (double eps : epsilons) {
    SweepRow row;
    row.epsilon = eps;
    row.best_log_bound = kInf;
    row.geodesic = check_epsilon_geodesic(chain, eps).is_geodesic;
    if (!row.geodesic) {
      row.skipped = true;
      row.note = "space is not epsilon-geodesic at this epsilon";
      table.rows.push_back(std::move(row));
      continue;
    }

    CurvatureProfile prof;
    try {
      prof = compute_profile(chain, eps, origin, options);
    } catch (const DomainError& ex) {
      row.skipped = true;
      row.note = ex.what();
      table.rows.push_back(std::move(row));
      continue;
    }
    row.rho = prof.rho;
    row.j0 = prof.j0;
    row.envelope_at_origin = prof.envelope(0.0);
    row.envelope_support_end = prof.envelope.support_end();
    if (!(prof.rho > 0.0)) {
      row.skipped = true;
      row.note = "rho <= 0: origin is not attractive at this epsilon";
      table.rows.push_back(std::move(row));
      continue;
    }
    row.d0_paper = paper_d0(prof);

    SearchOptions so;
    so.reference_level = reference_level;
    const BoundParams paper = search_params(prof, SearchStrategy::PaperDefault, so);
    if (paper.admissible && paper.d0 <= reference_level) {
      row.best_log_bound = log_bound_princ(prof, paper.alpha, paper.d0, reference_level);
      row.best_params = paper;
      row.best_strategy = "paper";
    }
    try {
      const BoundParams grid = search_params(prof, SearchStrategy::Grid, so);
      const double v = log_bound_princ(prof, grid.alpha, grid.d0, reference_level);
      if (v < row.best_log_bound) {
        row.best_log_bound = v;
        row.best_params = grid;
        row.best_strategy = "grid";
      }
    } catch (const InfeasibleError&) {
      if (!row.best_params) row.note = "no admissible parameters at the reference level";
    }

    if (row.best_log_bound < best_bound) {
      best_bound = row.best_log_bound;
      table.argmin_bound_epsilon = eps;
    }
    if (row.d0_paper < best_onset) {
      best_onset = row.d0_paper;
      table.argmin_onset_epsilon = eps;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_tail_csv(std::ostream& out, const std::vector<TailCurve>& curves) {
  out << "l,bound_raw,bound_clamped,kind\n";
  out << std::setprecision(17);
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.levels.size(); ++i) {
      out << c.levels[i] << ',' << c.values[i] << ',' << std::clamp(c.values[i], 0.0, 1.0) << ','
          << to_string(c.kind) << '\n';
    }
  }
}

namespace {

nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json params_to_json(const BoundParams& params) {
  nlohmann::json doc;
  doc["alpha"] = params.alpha;
  doc["d0"] = params.d0;
  doc["epsilon"] = params.epsilon;
  doc["admissible"] = params.admissible;
  nlohmann::json report = nlohmann::json::array();
  for (const auto& c : params.admissibility_report) {
    report.push_back({{"condition", c.condition},
                      {"holds", c.holds},
                      {"lhs", finite_or_null(c.lhs)},
                      {"rhs", finite_or_null(c.rhs)}});
  }
  doc["admissibility_report"] = std::move(report);
  return doc;
}

nlohmann::json sweep_to_json(const SweepTable& table) {
  nlohmann::json doc;
  doc["reference_level"] = table.reference_level;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    nlohmann::json row{{"epsilon", r.epsilon},
                       {"geodesic", r.geodesic},
                       {"skipped", r.skipped},
                       {"note", r.note},
                       {"rho", r.rho},
                       {"j0", r.j0},
                       {"envelope_at_origin", r.envelope_at_origin},
                       {"envelope_support_end", finite_or_null(r.envelope_support_end)},
                       {"d0_paper", r.d0_paper},
                       {"best_log_bound", finite_or_null(r.best_log_bound)},
                       {"best_strategy", r.best_strategy}};
    if (r.best_params) row["best_params"] = params_to_json(*r.best_params);
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);
  doc["argmin_bound_epsilon"] =
      table.argmin_bound_epsilon ? nlohmann::json(*table.argmin_bound_epsilon) : nlohmann::json(nullptr);
  doc["argmin_onset_epsilon"] =
      table.argmin_onset_epsilon ? nlohmann::json(*table.argmin_onset_epsilon) : nlohmann::json(nullptr);
  return doc;
}

}  // namespace ricci
