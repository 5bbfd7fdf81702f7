#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "ricci_bound/bounds.hpp"
#include "ricci_bound/chain.hpp"
#include "ricci_bound/curvature.hpp"
#include "ricci_bound/equilibrium.hpp"
#include "ricci_bound/error.hpp"

using namespace ricci;
using ricci::testing::mmk;
using ricci::testing::synthetic_profile;
using ricci::testing::trapezoid;

namespace {

CurvatureProfile mmk_profile(int n0, int k, double eps, int trunc = 0) {
  const auto c = trunc > 0 ? build_mmk_chain(n0, k, trunc) : mmk(n0, k);
  return compute_profile(c, eps, static_cast<std::size_t>(n0));
}

// phi by trapezoid on each smooth piece of F, endpoints nudged inside.
double phi_oracle(const CurvatureProfile& p, double l) {
  std::vector<double> cuts{0.0};
  for (double c : {p.epsilon, 2 * p.epsilon}) {
    if (c < l) cuts.push_back(c);
  }
  cuts.push_back(l);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    const double nudge = 1e-12 * std::max(1.0, b);
    auto f = [&](double u) { return F_of(p, std::clamp(u, a + nudge, b - nudge)); };
    total += trapezoid(f, a, b, 1000000);
  }
  return total;
}

// Phi by a double quadrature: cumulative midpoint sums of K on a grid of
// step 1/40000 (so integer breakpoints fall on nodes; l - 2 eps up to 26 means
// about 10^6 cells), then the trapezoid rule on the cumulative values.
double Phi_oracle(const CurvatureProfile& p, double l) {
  const double a = 2 * p.epsilon;
  const auto n = static_cast<std::size_t>(std::llround((l - a) * 40000.0));
  const double h = (l - a) / static_cast<double>(n);
  double inner = 0.0;
  double outer = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double next = inner + h * p.envelope(a + h * (static_cast<double>(i) + 0.5));
    outer += 0.5 * h * (inner + next);
    inner = next;
  }
  return p.rho * l + outer;
}

}  // namespace

TEST(F, ZeroCurvature) {
  const auto p = synthetic_profile(1.0, 0.3, 0.5, 1.0, Envelope::constant(0.0));
  EXPECT_DOUBLE_EQ(F_of(p, 3.0), 0.3);
  EXPECT_DOUBLE_EQ(F_of(p, 0.5), -0.5);
}

TEST(F, ConstantCurvature) {
  const auto p = synthetic_profile(1.0, 0.3, 0.5, 1.0, Envelope::constant(0.2));
  for (double l : {2.0, 3.5, 10.0}) EXPECT_NEAR(F_of(p, l), 0.3 + 0.2 * (l - 2.0), 1e-14);
}

TEST(F, MmkUnitScale) {
  const auto p = mmk_profile(2, 4, 1.0, 40);
  EXPECT_NEAR(F_of(p, 4.0), 1.0 / 6.0, 1e-12);
  EXPECT_NEAR(F_of(p, 1.5), 1.0 / 6.0, 1e-12);
}

TEST(Phi, ZeroCurvatureNoDrift) {
  const auto p = synthetic_profile(1.0, 0.3, 0.0, 1.0, Envelope::constant(0.0));
  EXPECT_NEAR(phi_of(p, 2.0), 0.3, 1e-14);
  EXPECT_NEAR(Phi_of(p, 5.0), 1.5, 1e-14);
}

TEST(Phi, ConstantCurvature) {
  const double c = 0.2;
  const auto p = synthetic_profile(1.0, 0.3, 0.5, 1.0, Envelope::constant(c));
  for (double l : {2.0, 3.0, 7.5}) {
    EXPECT_NEAR(phi_of(p, l), phi_of(p, 2.0) + 0.3 * (l - 2.0) + c * (l - 2.0) * (l - 2.0) / 2, 1e-12);
    EXPECT_NEAR(Phi_of(p, l), 0.3 * l + c * (l - 2.0) * (l - 2.0) / 2, 1e-12);
  }
}

TEST(Phi, MmkAgainstQuadrature) {
  for (auto [n0, k, eps] : {std::tuple{2, 4, 1.0}, std::tuple{25, 30, 2.0}, std::tuple{5, 15, 3.0}}) {
    const auto p = mmk_profile(n0, k, eps);
    for (double l : {0.7 * eps, 1.5 * eps, 4.0, 7.3, 12.0, 30.0}) {
      EXPECT_NEAR(phi_of(p, l), phi_oracle(p, l), 1e-7) << n0 << "," << k << " l=" << l;
      if (l >= 2 * eps) EXPECT_NEAR(Phi_of(p, l), Phi_oracle(p, l), 1e-7) << n0 << "," << k << " l=" << l;
    }
  }
}

TEST(Phi, RejectsLevelsBelowTwoEpsilon) {
  const auto p = synthetic_profile(1.0, 0.3, 0.5, 1.0, Envelope::constant(0.0));
  EXPECT_THROW(Phi_of(p, 1.5), DomainError);
}

TEST(C, AlphaZeroIsOne) {
  const auto p = mmk_profile(5, 10, 1.0);
  for (double d0 : {2.0, 5.0, 12.0}) EXPECT_EQ(C_alpha_d0(p, 0.0, d0), 1.0);
}

TEST(C, ZeroCurvatureClosedForm) {
  const auto p = synthetic_profile(1.0, 0.3, 0.5, 2.0, Envelope::constant(0.0));
  const double a = 0.4;
  const double f = F_of(p, 4.0);
  EXPECT_NEAR(C_alpha_d0(p, a, 4.0), std::exp(-a * f * f * (1.0 - a * 2.0 / 2.0)), 1e-15);
}

TEST(C, TheoremOneChoiceBelowGap) {
  for (auto [n0, k, eps] : {std::tuple{2, 4, 1.0}, std::tuple{5, 10, 1.0}, std::tuple{25, 30, 4.0}}) {
    const auto p = mmk_profile(n0, k, eps);
    const double d0 = paper_d0(p);
    ASSERT_LE(p.envelope(d0), 1.0);
    EXPECT_LE(log_C_alpha_d0(p, 1.0 / (2 * p.s2), d0), -p.rho * p.rho / (4 * p.s2) + 1e-15);
  }
}

TEST(C, DomainErrorBeyondPole) {
  const auto p = synthetic_profile(1.0, 0.3, 0.5, 1.0, Envelope::constant(0.5));
  EXPECT_THROW(C_alpha_d0(p, 2.0, 3.0), DomainError);
}

TEST(CPrime, OneWhenIndicatorVanishes) {
  // J + eps <= d0 - F(d0)
  const auto p = synthetic_profile(1.0, 0.3, 0.5, 1.0, Envelope::constant(0.0));
  EXPECT_EQ(Cprime_alpha_d0(p, 0.7, 5.0), 1.0);
}

TEST(CPrime, AlphaZeroIsOne) {
  const auto p = mmk_profile(2, 4, 1.0, 40);
  EXPECT_EQ(Cprime_alpha_d0(p, 0.0, 2.0), 1.0);
}

TEST(CPrime, TheoremOneEstimate) {
  const auto p = mmk_profile(2, 4, 1.0, 40);
  const double e = p.epsilon;
  const double d0 = paper_d0(p);
  const double cap = 3 * e / (2 * p.s2) * std::max(3 * e, p.rho + std::numbers::ln2 * p.s2 / p.rho);
  EXPECT_LE(log_Cprime_alpha_d0(p, 1.0 / (2 * p.s2), d0), cap);
}

TEST(CPrime, MatchesQuadratureWhenActive) {
  // large drift J keeps the indicator on
  const auto p = synthetic_profile(1.0, 0.4, 3.0, 1.0, Envelope({0.0, 2.5, 4.0}, {0.3, 0.1, 0.0}));
  for (double d0 : {2.0, 2.6, 3.1}) {
    const double f0 = F_of(p, d0);
    const double lo = d0 - f0;
    const double hi = p.j0 + p.epsilon;
    ASSERT_LT(lo, hi);
    std::vector<double> cuts{lo, hi};
    for (double c : {1.0, 2.0, 2.5}) {
      if (c > lo && c < hi) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    double oracle = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double a = cuts[i];
      const double b = cuts[i + 1];
      oracle += trapezoid([&](double u) { return std::max(f0, F_of(p, std::clamp(u, a + 1e-12, b - 1e-12))); },
                          a, b, 1000000);
    }
    EXPECT_NEAR(log_Cprime_alpha_d0(p, 0.8, d0), 0.8 * oracle, 1e-7) << d0;
  }
}

TEST(BoundPrinc, AtD0) {
  const auto p = mmk_profile(5, 10, 1.0);
  const auto bp = search_params(p, SearchStrategy::PaperDefault);
  ASSERT_TRUE(bp.admissible);
  const auto curve = bound_princ(p, bp, {bp.d0});
  const double c = C_alpha_d0(p, bp.alpha, bp.d0);
  EXPECT_NEAR(curve.values[0], Cprime_alpha_d0(p, bp.alpha, bp.d0) * c / (1 - c), 1e-12 * curve.values[0]);
}

TEST(BoundPrinc, ZeroCurvatureDecaysAtRateAlphaRho) {
  const auto p = synthetic_profile(1.0, 0.3, 0.5, 1.0, Envelope::constant(0.0));
  const auto bp = make_params(p, 0.8, 4.0);
  ASSERT_TRUE(bp.admissible);
  const auto curve = bound_princ(p, bp, {4.0, 5.0, 6.0, 9.0});
  for (std::size_t i = 1; i < curve.levels.size(); ++i) {
    const double slope = (curve.log_values[i] - curve.log_values[i - 1]) / (curve.levels[i] - curve.levels[i - 1]);
    EXPECT_NEAR(slope, -0.8 * 0.3, 1e-12);
  }
}

TEST(BoundPrinc, DominatesExactTailMmk) {
  const auto c = mmk(5, 10);
  const auto p = compute_profile(c, 1.0, 5);
  const auto bp = search_params(p, SearchStrategy::PaperDefault);
  ASSERT_TRUE(bp.admissible);
  std::vector<double> levels{bp.d0};
  for (double l = std::ceil(bp.d0); l <= static_cast<double>(c.size()); l += 1.0) levels.push_back(l);
  const auto bound = bound_princ(p, bp, levels);
  const auto tail = empirical_tail(stationary_birth_death(c), c, 5, levels);
  for (std::size_t i = 0; i < levels.size(); ++i) EXPECT_GE(bound.values[i], tail.values[i]) << levels[i];
}

TEST(BoundPrinc, InadmissibleParamsCarryReport) {
  const auto p = mmk_profile(5, 10, 1.0);
  const auto bp = make_params(p, 0.5, 1.0);  // d0 < 2 eps
  EXPECT_FALSE(bp.admissible);
  try {
    bound_princ(p, bp, {3.0});
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    ASSERT_FALSE(e.report().empty());
    EXPECT_NE(e.report().front().find("2 epsilon"), std::string::npos);
  }
}

TEST(BoundPrinc, LevelBelowD0Rejected) {
  const auto p = mmk_profile(5, 10, 1.0);
  const auto bp = search_params(p, SearchStrategy::PaperDefault);
  EXPECT_THROW(bound_princ(p, bp, {bp.d0 - 1.0}), DomainError);
}

TEST(Theorem1, ZeroCurvatureIsExponential) {
  const auto p = synthetic_profile(1.0, 0.3, 0.5, 2.0, Envelope::constant(0.0));
  const double d = paper_d0(p);
  const auto r = bound_theorem1(p, {d, d + 1.0, d + 5.0});
  for (std::size_t i = 1; i < 3; ++i) {
    const double slope = (r.closed_form.log_values[i] - r.closed_form.log_values[i - 1]) /
                         (r.closed_form.levels[i] - r.closed_form.levels[i - 1]);
    EXPECT_NEAR(slope, -0.3 / (2 * 2.0), 1e-12);
  }
}

TEST(Theorem1, ConstantCurvatureQuadratic) {
  const double c = 0.2;
  const double s2 = 1.5;
  const auto p = synthetic_profile(1.0, 0.3, 0.5, s2, Envelope::constant(c));
  const double d = paper_d0(p);
  const auto r = bound_theorem1(p, {d, d + 1.0, d + 2.0});
  const auto& y = r.closed_form.log_values;
  EXPECT_NEAR((y[2] - 2 * y[1] + y[0]) / 2.0, -c / (4 * s2), 1e-12);
}

TEST(Theorem1, OuGaussianCoefficient) {
  const auto c = build_discrete_ou_chain(0.5, 10.0, 0.05);
  ProfileOptions o;
  o.s2_method = SubGaussianMethod::GaussianVariance;
  const auto p = compute_profile(c, 1.5, *c.origin_hint, o);
  const double d = paper_d0(p);
  const auto r = bound_theorem1(p, {d, d + 2.0, d + 4.0});
  const auto& y = r.closed_form.log_values;
  EXPECT_NEAR(-(y[2] - 2 * y[1] + y[0]) / 8.0, 0.5 / 4.0, 0.01);
}

TEST(Theorem1, NoAttractionMessage) {
  const auto p = synthetic_profile(1.0, -0.1, 0.5, 1.0, Envelope::constant(0.0));
  try {
    bound_theorem1(p, {5.0});
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("increase epsilon or abort"), std::string::npos);
  }
}

TEST(Theorem1, PrincPathBelowClosedForm) {
  for (auto [n0, k, eps] : {std::tuple{2, 4, 1.0}, std::tuple{5, 10, 1.0}, std::tuple{25, 30, 4.0}, std::tuple{5, 15, 3.0}}) {
    const auto p = mmk_profile(n0, k, eps);
    const double d = paper_d0(p);
    std::vector<double> levels;
    for (double l = d; l < d + 60.0; l += 0.5) levels.push_back(l);
    const auto r = bound_theorem1(p, levels);
    for (std::size_t i = 0; i < levels.size(); ++i) {
      EXPECT_LE(r.via_princ.log_values[i], r.closed_form.log_values[i] + 1e-12);
      if (i > 0) {
        EXPECT_LT(r.via_princ.log_values[i], r.via_princ.log_values[i - 1]);
        EXPECT_LT(r.closed_form.log_values[i], r.closed_form.log_values[i - 1]);
      }
    }
  }
}

TEST(Theorem1, LevelsBelowOnsetRejected) {
  const auto p = mmk_profile(5, 10, 1.0);
  EXPECT_THROW(bound_theorem1(p, {paper_d0(p) - 0.5}), DomainError);
}

TEST(Search, ZeroCurvatureDefaultAdmissible) {
  const auto p = synthetic_profile(1.0, 0.3, 0.5, 1.0, Envelope::constant(0.0));
  const auto bp = search_params(p, SearchStrategy::PaperDefault);
  EXPECT_TRUE(bp.admissible);
  EXPECT_LE(C_alpha_d0(p, bp.alpha, bp.d0), std::exp(-0.3 * 0.3 / 4.0));
}

TEST(Search, GridNoWorseThanDefault) {
  const auto p = mmk_profile(5, 10, 1.0);
  const auto def = search_params(p, SearchStrategy::PaperDefault);
  const auto grid = search_params(p, SearchStrategy::Grid);
  const double ref = 2 * def.d0;
  EXPECT_LE(log_bound_princ(p, grid.alpha, grid.d0, ref), log_bound_princ(p, def.alpha, def.d0, ref) + 1e-12);
}

TEST(Search, ConvexityNoWorseThanDefaultAtSameD0) {
  const auto p = mmk_profile(5, 10, 1.0);
  const auto def = search_params(p, SearchStrategy::PaperDefault);
  const auto conv = search_params(p, SearchStrategy::AlphaConvexity);
  EXPECT_TRUE(conv.admissible);
  EXPECT_DOUBLE_EQ(conv.d0, def.d0);
  const double ref = 2 * def.d0;
  EXPECT_LE(log_bound_princ(p, conv.alpha, conv.d0, ref), log_bound_princ(p, def.alpha, def.d0, ref) + 1e-9);
}

TEST(Search, SlopeConditionFailureReported) {
  // F(d0) tiny against s^2 K(d0) / 2
  const auto p = synthetic_profile(1.0, 0.01, 0.5, 4.0, Envelope::constant(0.05));
  SearchOptions o;
  o.d0 = 2.0;
  o.reference_level = 10.0;
  try {
    search_params(p, SearchStrategy::AlphaConvexity, o);
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    EXPECT_FALSE(e.report().empty());
  }
  // the grid restricted below the reference level finds nothing either
  SearchOptions g;
  g.reference_level = 2.5;
  EXPECT_THROW(search_params(p, SearchStrategy::Grid, g), InfeasibleError);
}

TEST(Search, ConvexityOfLogC) {
  const auto p = mmk_profile(25, 30, 2.0);
  for (double d0 : {4.0, 6.0, paper_d0(p)}) {
    const double k = p.envelope(d0);
    const double upper = k > 0 ? 1.0 / (p.s2 * k) : 4.0 / p.s2;
    std::vector<double> g;
    for (int j = 1; j <= 256; ++j) g.push_back(log_C_alpha_d0(p, upper * j / 257.0, d0));
    for (std::size_t j = 1; j + 1 < g.size(); ++j) EXPECT_GE(g[j + 1] - 2 * g[j] + g[j - 1], -1e-9);
  }
}

TEST(Sweep, OnsetScaleGrowsLikeRootN0) {
  for (auto [n0, k] : {std::pair{25, 35}, std::pair{100, 150}}) {
    const auto c = mmk(n0, k);
    std::vector<double> eps;
    for (int e = 1; e <= 30; ++e) eps.push_back(e);
    const auto t = epsilon_sweep(c, static_cast<std::size_t>(n0), eps, 2.0 * (k - n0));
    ASSERT_TRUE(t.argmin_onset_epsilon.has_value());
    const double ratio = *t.argmin_onset_epsilon / std::sqrt(static_cast<double>(n0));
    EXPECT_GE(ratio, 1.0 / 3.0) << n0;
    EXPECT_LE(ratio, 3.0) << n0;
  }
}

TEST(Sweep, OnsetScaleTracksSmallGap) {
  const int n0 = 25;
  const int k = 27;
  const auto c = mmk(n0, k);
  std::vector<double> eps;
  for (int e = 1; e <= 10; ++e) eps.push_back(e);
  const auto t = epsilon_sweep(c, n0, eps, 2.0 * n0);
  ASSERT_TRUE(t.argmin_onset_epsilon.has_value());
  EXPECT_GE(*t.argmin_onset_epsilon, (k - n0) / 3.0);
  EXPECT_LE(*t.argmin_onset_epsilon, 3.0 * (k - n0));
}

TEST(Sweep, SingleEpsilonMatchesPipeline) {
  const auto c = mmk(5, 10);
  const double ref = 30.0;
  const auto t = epsilon_sweep(c, 5, {1.0}, ref);
  ASSERT_EQ(t.rows.size(), 1u);
  const auto& row = t.rows[0];
  const auto p = compute_profile(c, 1.0, 5);
  EXPECT_DOUBLE_EQ(row.rho, p.rho);
  EXPECT_DOUBLE_EQ(row.d0_paper, paper_d0(p));
  SearchOptions o;
  o.reference_level = ref;
  const auto grid = search_params(p, SearchStrategy::Grid, o);
  const auto def = search_params(p, SearchStrategy::PaperDefault, o);
  const double expected = std::min(log_bound_princ(p, grid.alpha, grid.d0, ref),
                                   log_bound_princ(p, def.alpha, def.d0, ref));
  EXPECT_DOUBLE_EQ(row.best_log_bound, expected);
  EXPECT_EQ(*t.argmin_bound_epsilon, 1.0);
}

TEST(Sweep, NonGeodesicScaleSkipped) {
  std::vector<double> x{0, 1, 2, 3, 10, 11, 12};
  const auto c = ricci::testing::line_points(x);
  const auto t = epsilon_sweep(c, 0, {1.0}, 5.0);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_TRUE(t.rows[0].skipped);
  EXPECT_FALSE(t.argmin_bound_epsilon.has_value());
}

TEST(Export, TailCsvColumns) {
  TailCurve c;
  c.kind = TailKind::TheoremPrinc;
  c.levels = {1.0, 2.0};
  c.values = {3.0, 0.5};
  c.log_values = {std::log(3.0), std::log(0.5)};
  std::ostringstream os;
  write_tail_csv(os, {c});
  EXPECT_EQ(os.str(), "l,bound_raw,bound_clamped,kind\n1,3,1,theorem_princ\n2,0.5,0.5,theorem_princ\n");
}
