#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <utility>
#include <vector>

namespace ricci {

/// Drift -alpha x plus unit jumps at rate 1, started from X_0 = 0.
struct JumpProcessConfig {
  double drift_alpha = 1.0;
  double horizon_T = 25.0;
  std::size_t n_paths = 1000000;
  std::uint64_t seed = 1;

  /// Requires alpha > 0, T > 0 and e^{-alpha T} < 1e-8.
  void validate() const;
};

/// X_T = sum_{i <= N(T)} e^{-alpha (T - T_i)} per path, N(T) ~ Poisson(T),
/// T_i uniform on [0, T]. Paths come in blocks of 4096, block b drawing from
/// mt19937_64 seeded with seed_seq{seed, seed >> 32, b}, so the sample does
/// not depend on the thread count.
std::vector<double> simulate_paths(const JumpProcessConfig& config);

/// I(lambda) = sum_{n >= 1} lambda^n / (n n!), summed until a term drops
/// below tol (1 + |partial sum|). |lambda| <= 50.
double transform_I(double lambda, double tol = 1e-17);

/// int_0^lambda (e^z - 1)/z dz by adaptive Gauss-Kronrod.
double transform_I_quadrature(double lambda);

/// ln G(lambda) = I(lambda) / alpha, the stationary log-Laplace transform.
double log_stationary_laplace_G(double lambda, double alpha);
/// exp of the above; +inf once it overflows, use the log form then.
double stationary_laplace_G(double lambda, double alpha);

/// ln G_T(lambda) = (I(lambda) - I(lambda e^{-alpha T})) / alpha.
double log_laplace_G_T(double lambda, double alpha, double horizon);
double laplace_G_T(double lambda, double alpha, double horizon);

/// ln of e^{I(ln l)/alpha - l ln l}; l > 1.
double log_poissonian_tail_bound(double l, double alpha);
double poissonian_tail_bound(double l, double alpha);

/// Two-sided Clopper-Pearson interval for `successes` out of `trials`.
std::pair<double, double> clopper_pearson(std::size_t successes, std::size_t trials,
                                          double confidence = 0.99);

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;
  double standard_error = 0.0;
};

SampleMoments sample_moments(const std::vector<double>& sample);

struct JumpTailRow {
  double level = 0.0;
  std::size_t count = 0;
  double empirical = 0.0;
  double ci_high = 0.0;
  double bound = 0.0;
};

/// Empirical P(X >= l) per level with its 99% upper confidence end and the
/// Poissonian bound.
std::vector<JumpTailRow> jump_tail_table(const std::vector<double>& sample,
                                         const std::vector<double>& levels, double alpha,
                                         double confidence = 0.99);

void write_jump_tail_csv(std::ostream& out, const std::vector<JumpTailRow>& rows);
void write_sample_csv(std::ostream& out, const std::vector<double>& sample);

/// Exact stationary law: the generalized Dickman distribution with
/// theta = 1/alpha. Density c x^{theta-1} on (0, 1] with c = e^{-gamma theta}/Gamma(theta),
/// in closed form on (1, 2], and beyond from x f'(x) = (theta-1) f(x) - theta f(x-1)
/// integrated on a grid of step `step` with cubic Hermite cells.
class DickmanLaw {
 public:
  explicit DickmanLaw(double alpha, double step = 1e-3, double reach = 40.0);

  double density(double x) const;
  /// P(X >= l)
  double tail(double l) const;
  double theta() const noexcept { return theta_; }

 private:
  double closed_form(double x) const;
  double grid_integral(double a, double b) const;

  double theta_;
  double c_;
  double step_;
  double reach_;
  // grid on [2, reach]: values, derivatives, and suffix sums of cell integrals
  std::vector<double> f_;
  std::vector<double> df_;
  std::vector<double> suffix_;
  // int_{1 + i step}^2 f, cell by cell from the right
  std::vector<double> head_;
};

struct WitnessResult {
  /// (-ln tail)/l^2 at the last level relative to the first, minus 1.
  double quadratic_drift = 0.0;
  /// max/min - 1 of (-ln tail)/(l ln l) over the levels.
  double poissonian_variation = 0.0;
  bool defined = false;
};

/// Statistics behind the non-Gaussianity witness on levels > 1. Undefined
/// (defined = false) when any tail is 0 or 1.
WitnessResult non_gaussianity_statistics(const std::vector<double>& levels,
                                         const std::vector<double>& tails);

}  // namespace ricci
