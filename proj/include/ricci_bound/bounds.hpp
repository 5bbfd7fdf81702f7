#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ricci_bound/chain.hpp"
#include "ricci_bound/curvature.hpp"

namespace ricci {

/// F(l): -J for l <= eps, rho on (eps, 2 eps), rho + int_{2eps}^l K beyond.
double F_of(const CurvatureProfile& p, double l);

/// phi(l) = int_0^l F, exact over the pieces of F.
double phi_of(const CurvatureProfile& p, double l);

/// Phi(l) = rho l + int_{2eps}^l int_{2eps}^u K. Requires l >= 2 eps.
double Phi_of(const CurvatureProfile& p, double l);

double log_C_alpha_d0(const CurvatureProfile& p, double alpha, double d0);
double C_alpha_d0(const CurvatureProfile& p, double alpha, double d0);

double log_Cprime_alpha_d0(const CurvatureProfile& p, double alpha, double d0);
double Cprime_alpha_d0(const CurvatureProfile& p, double alpha, double d0);

struct AdmissibilityCheck {
  std::string condition;
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct BoundParams {
  double alpha = 0.0;
  double d0 = 0.0;
  double epsilon = 0.0;
  bool admissible = false;
  /// In order: d0 >= 2 eps, F(d0) > s^2 K(d0)/2, alpha < 1/(s^2 K(d0)), C < 1.
  std::vector<AdmissibilityCheck> admissibility_report;
};

BoundParams make_params(const CurvatureProfile& p, double alpha, double d0);

enum class TailKind { Theorem1, TheoremPrinc, Empirical, Poissonian };

const char* to_string(TailKind kind);

struct TailCurve {
  std::vector<double> levels;
  std::vector<double> values;
  /// ln(values) kept separately so huge or tiny bounds survive.
  std::vector<double> log_values;
  TailKind kind = TailKind::Empirical;
};

/// ln of C' C / (1 - C) e^{-alpha (phi(l) - phi(d0))}; +inf when C >= 1.
double log_bound_princ(const CurvatureProfile& p, double alpha, double d0, double l);

/// Throws InfeasibleError for inadmissible params and DomainError for a
/// level below d0.
TailCurve bound_princ(const CurvatureProfile& p, const BoundParams& params,
                      const std::vector<double>& levels);

struct Theorem1Result {
  double d_star = 0.0;
  double log_C0 = 0.0;
  /// alpha = 1/(2 s^2), d0 = d_star; may be inadmissible, see its report.
  BoundParams params;
  /// C0 e^{-Phi(l)/(2 s^2)}
  TailCurve closed_form;
  /// The same parameters fed through the general bound.
  TailCurve via_princ;
};

/// Levels must exceed d_star. Throws DomainError when rho <= 0.
Theorem1Result bound_theorem1(const CurvatureProfile& p, const std::vector<double>& levels);

/// 2 eps + ln(2) s^2 / rho
double paper_d0(const CurvatureProfile& p);

enum class SearchStrategy { PaperDefault, Grid, AlphaConvexity };

struct SearchOptions {
  /// Level at which grid and alpha_convexity minimize the bound. Defaults to
  /// twice the default d0.
  std::optional<double> reference_level;
  /// Fixed d0 for alpha_convexity; defaults to the default d0.
  std::optional<double> d0;
  std::size_t alpha_points = 32;
  std::size_t d0_points = 32;
};

/// Throws InfeasibleError (with a per-d0 report) when no admissible pair
/// exists. paper_default returns the proof's pair even when it is
/// inadmissible; the flags say so.
BoundParams search_params(const CurvatureProfile& p, SearchStrategy strategy,
                          const SearchOptions& options = {});

struct SweepRow {
  double epsilon = 0.0;
  bool geodesic = false;
  bool skipped = false;
  std::string note;
  double rho = 0.0;
  double j0 = 0.0;
  double envelope_at_origin = 0.0;
  double envelope_support_end = 0.0;
  double d0_paper = 0.0;
  /// ln of the best bound at the reference level; +inf if none applies.
  double best_log_bound = 0.0;
  std::optional<BoundParams> best_params;
  std::string best_strategy;
};

struct SweepTable {
  double reference_level = 0.0;
  std::vector<SweepRow> rows;
  std::optional<double> argmin_bound_epsilon;
  /// epsilon minimizing the default d0, where the tail estimate kicks in.
  std::optional<double> argmin_onset_epsilon;
};

SweepTable epsilon_sweep(const MetricChain& chain, std::size_t origin,
                         const std::vector<double>& epsilons, double reference_level,
                         const ProfileOptions& options = {});

void write_tail_csv(std::ostream& out, const std::vector<TailCurve>& curves);
nlohmann::json params_to_json(const BoundParams& params);
nlohmann::json sweep_to_json(const SweepTable& table);

}  // namespace ricci
