#include "ricci_bound/jump_process.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ricci_bound/error.hpp"
#include "ricci_bound/parallel.hpp"

namespace ricci {
namespace {

constexpr std::size_t kBlock = 4096;
constexpr double kMaxLambda = 50.0;

}  // namespace

void JumpProcessConfig::validate() const {
  if (!(drift_alpha > 0.0) || !std::isfinite(drift_alpha)) throw DomainError("drift alpha must be > 0");
  if (!(horizon_T > 0.0) || !std::isfinite(horizon_T)) throw DomainError("horizon must be > 0");
  if (!(std::exp(-drift_alpha * horizon_T) < 1e-8)) {
    throw DomainError("horizon too short: e^{-alpha T} = " +
                      std::to_string(std::exp(-drift_alpha * horizon_T)) + " must be < 1e-8");
  }
}

std::vector<double> simulate_paths(const JumpProcessConfig& config) {
  config.validate();
  const double alpha = config.drift_alpha;
  const double T = config.horizon_T;
  std::vector<double> sample(config.n_paths, 0.0);
  const std::size_t blocks = (config.n_paths + kBlock - 1) / kBlock;

  parallel_for(blocks, [&](std::size_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                      static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(b)};
    std::mt19937_64 engine(seq);
    std::poisson_distribution<long> jumps(T);
    std::uniform_real_distribution<double> when(0.0, T);
    const std::size_t end = std::min(config.n_paths, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      const long n = jumps(engine);
      double x = 0.0;
      for (long j = 0; j < n; ++j) x += std::exp(-alpha * (T - when(engine)));
      sample[i] = x;
    }
  });
  return sample;
}

double transform_I(double lambda, double tol) {
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  if (!(std::abs(lambda) <= kMaxLambda)) throw DomainError("|lambda| must be at most 50");
  double power = 1.0;  // lambda^n / n!
  double sum = 0.0;
  for (int n = 1; n < 2000; ++n) {
    power *= lambda / n;
    const double term = power / n;
    sum += term;
    if (n > std::abs(lambda) && std::abs(term) < tol * (1.0 + std::abs(sum))) break;
  }
  return sum;
}

double transform_I_quadrature(double lambda) {
  if (lambda == 0.0) return 0.0;
  auto integrand = [](double z) { return z == 0.0 ? 1.0 : std::expm1(z) / z; };
  using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
  if (lambda > 0.0) return Rule::integrate(integrand, 0.0, lambda, 20, 1e-15);
  return -Rule::integrate(integrand, lambda, 0.0, 20, 1e-15);
}

double log_stationary_laplace_G(double lambda, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("alpha must be > 0");
  return transform_I(lambda) / alpha;
}

double stationary_laplace_G(double lambda, double alpha) {
  return std::exp(log_stationary_laplace_G(lambda, alpha));
}

double log_laplace_G_T(double lambda, double alpha, double horizon) {
  if (!(alpha > 0.0)) throw DomainError("alpha must be > 0");
  if (!(horizon >= 0.0)) throw DomainError("horizon must be >= 0");
  return (transform_I(lambda) - transform_I(lambda * std::exp(-alpha * horizon))) / alpha;
}

double laplace_G_T(double lambda, double alpha, double horizon) {
  return std::exp(log_laplace_G_T(lambda, alpha, horizon));
}

double log_poissonian_tail_bound(double l, double alpha) {
  if (!(l > 1.0)) throw DomainError("the Poissonian bound needs l > 1");
  if (!(alpha > 0.0)) throw DomainError("alpha must be > 0");
  const double ln_l = std::log(l);
  return transform_I(ln_l) / alpha - l * ln_l;
}

double poissonian_tail_bound(double l, double alpha) {
  return std::exp(log_poissonian_tail_bound(l, alpha));
}

std::pair<double, double> clopper_pearson(std::size_t successes, std::size_t trials,
                                          double confidence) {
  if (trials == 0 || successes > trials) throw DomainError("need 0 <= successes <= trials, trials > 0");
  if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("confidence must lie in (0, 1)");
  const double tail = (1.0 - confidence) / 2.0;
  const auto k = static_cast<double>(successes);
  const auto n = static_cast<double>(trials);
  double lo = 0.0;
  double hi = 1.0;
  if (successes > 0) lo = quantile(boost::math::beta_distribution<>(k, n - k + 1.0), tail);
  if (successes < trials) hi = quantile(boost::math::beta_distribution<>(k + 1.0, n - k), 1.0 - tail);
  return {lo, hi};
}

SampleMoments sample_moments(const std::vector<double>& sample) {
  if (sample.size() < 2) throw DomainError("need at least two samples");
  const auto n = static_cast<double>(sample.size());
  double mean = 0.0;
  for (double x : sample) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : sample) ss += (x - mean) * (x - mean);
  SampleMoments m;
  m.mean = mean;
  m.variance = ss / (n - 1.0);
  m.standard_error = std::sqrt(m.variance / n);
  return m;
}

std::vector<JumpTailRow> jump_tail_table(const std::vector<double>& sample,
                                         const std::vector<double>& levels, double alpha,
                                         double confidence) {
  std::vector<double> sorted = sample;
  std::sort(sorted.begin(), sorted.end());
  std::vector<JumpTailRow> rows;
  for (double l : levels) {
    JumpTailRow row;
    row.level = l;
    row.count = static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), l));
    row.empirical = static_cast<double>(row.count) / static_cast<double>(sample.size());
    row.ci_high = clopper_pearson(row.count, sample.size(), confidence).second;
    row.bound = poissonian_tail_bound(l, alpha);
    rows.push_back(row);
  }
  return rows;
}

void write_jump_tail_csv(std::ostream& out, const std::vector<JumpTailRow>& rows) {
  out << "l,empirical,empirical_CI_high,bound\n" << std::setprecision(17);
  for (const auto& r : rows) out << r.level << ',' << r.empirical << ',' << r.ci_high << ',' << r.bound << '\n';
}

void write_sample_csv(std::ostream& out, const std::vector<double>& sample) {
  out << "x_T\n" << std::setprecision(17);
  for (double x : sample) out << x << '\n';
}

DickmanLaw::DickmanLaw(double alpha, double step, double reach)
    : theta_(1.0 / alpha), step_(step), reach_(reach) {
  if (!(alpha > 0.0)) throw DomainError("alpha must be > 0");
  if (!(step > 0.0 && step <= 0.1)) throw DomainError("grid step must lie in (0, 0.1]");
  if (!(reach > 3.0)) throw DomainError("reach must exceed 3");
  c_ = std::exp(-std::numbers::egamma * theta_ - std::lgamma(theta_));

  // whole number of cells per unit so x - 1 lands on the grid
  const auto per_unit = static_cast<std::size_t>(std::llround(1.0 / step));
  step_ = 1.0 / static_cast<double>(per_unit);
  const auto cells = static_cast<std::size_t>(std::ceil((reach_ - 2.0) * static_cast<double>(per_unit)));
  reach_ = 2.0 + static_cast<double>(cells) * step_;
  f_.assign(cells + 1, 0.0);
  df_.assign(cells + 1, 0.0);
  std::vector<double> cell(cells, 0.0);

  const double th = theta_;
  const double h = step_;
  auto x_at = [&](std::size_t j) { return 2.0 + static_cast<double>(j) * h; };
  auto slope = [&](double x, double fx, double lagged) { return ((th - 1.0) * fx - th * lagged) / x; };

  f_[0] = closed_form(2.0);
  df_[0] = slope(2.0, f_[0], closed_form(1.0));
  // int_{1 + i h}^2 f over the closed-form stretch, summed from the right
  using GL = boost::math::quadrature::gauss<double, 10>;
  head_.assign(per_unit + 1, 0.0);
  auto& head_suffix = head_;
  for (std::size_t i = per_unit; i-- > 0;) {
    const double a = 1.0 + static_cast<double>(i) * h;
    head_suffix[i] = head_suffix[i + 1] + GL::integrate([&](double x) { return closed_form(x); }, a, a + h);
  }

  // x f(x) = theta int_{x-1}^x f: every term in the window is positive, which
  // keeps the relative error flat where the forward ODE would cancel
  for (std::size_t j = 1; j <= cells; ++j) {
    const double x = x_at(j);
    double window = 0.0;
    std::size_t first = 0;
    if (j < per_unit) {
      window += head_suffix[j];
    } else {
      first = j - per_unit;
    }
    for (std::size_t i = first; i + 1 < j; ++i) window += cell[i];

    const double lagged = j < per_unit ? closed_form(x - 1.0) : f_[j - per_unit];
    // last cell by Hermite-corrected trapezoid; f'(x) is linear in f(x)
    const double lhs = x - th * h / 2.0 + th * h * h * (th - 1.0) / (12.0 * x);
    const double rhs = th * (window + h * f_[j - 1] / 2.0 + h * h * df_[j - 1] / 12.0 +
                             h * h * th * lagged / (12.0 * x));
    f_[j] = rhs / lhs;
    df_[j] = slope(x, f_[j], lagged);
    cell[j - 1] = h * (f_[j - 1] + f_[j]) / 2.0 + h * h * (df_[j - 1] - df_[j]) / 12.0;
  }

  suffix_.assign(cells + 1, 0.0);
  for (std::size_t j = cells; j-- > 0;) suffix_[j] = suffix_[j + 1] + cell[j];
}

double DickmanLaw::closed_form(double x) const {
  if (x <= 0.0) return 0.0;
  if (x <= 1.0) return c_ * std::pow(x, theta_ - 1.0);
  // x^{1-theta} f(x) = c (1 - theta int_0^{1-1/x} s^{theta-1}/(1-s) ds)
  const double z = 1.0 - 1.0 / x;
  double series = 0.0;
  double zk = 1.0;
  for (int k = 0; k < 200; ++k) {
    const double term = zk / (theta_ + k);
    series += term;
    if (term < 1e-18 * series) break;
    zk *= z;
  }
  return c_ * std::pow(x, theta_ - 1.0) * (1.0 - theta_ * std::pow(z, theta_) * series);
}

double DickmanLaw::density(double x) const {
  if (x <= 2.0) return closed_form(x);
  if (x >= reach_) return 0.0;
  const double u = (x - 2.0) / step_;
  const auto j = std::min(static_cast<std::size_t>(u), f_.size() - 2);
  const double t = u - static_cast<double>(j);
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
  const double h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t);
  const double h11 = t * t * (t - 1);
  return h00 * f_[j] + h10 * step_ * df_[j] + h01 * f_[j + 1] + h11 * step_ * df_[j + 1];
}

double DickmanLaw::grid_integral(double a, double b) const {
  using GL = boost::math::quadrature::gauss<double, 7>;
  return GL::integrate([&](double x) { return density(x); }, a, b);
}

double DickmanLaw::tail(double l) const {
  if (l <= 0.0) return 1.0;
  if (l >= reach_) return 0.0;
  if (l >= 2.0) {
    const double u = (l - 2.0) / step_;
    const auto j = std::min(static_cast<std::size_t>(u), f_.size() - 2);
    const double next = 2.0 + static_cast<double>(j + 1) * step_;
    return grid_integral(l, next) + suffix_[j + 1];
  }
  if (l >= 1.0) {
    using GL = boost::math::quadrature::gauss<double, 10>;
    const auto i = std::min(static_cast<std::size_t>((l - 1.0) / step_), head_.size() - 2);
    const double next = 1.0 + static_cast<double>(i + 1) * step_;
    return GL::integrate([&](double x) { return closed_form(x); }, l, next) + head_[i + 1] + suffix_[0];
  }
  return c_ * (1.0 - std::pow(l, theta_)) / theta_ + tail(1.0);
}

WitnessResult non_gaussianity_statistics(const std::vector<double>& levels,
                                         const std::vector<double>& tails) {
  WitnessResult w;
  if (levels.size() != tails.size() || levels.size() < 2) return w;
  std::vector<double> quad;
  std::vector<double> pois;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double l = levels[i];
    const double t = tails[i];
    if (!(l > 1.0) || !(t > 0.0 && t < 1.0)) return w;
    quad.push_back(-std::log(t) / (l * l));
    pois.push_back(-std::log(t) / (l * std::log(l)));
  }
  w.defined = true;
  w.quadratic_drift = quad.back() / quad.front() - 1.0;
  w.poissonian_variation =
      *std::max_element(pois.begin(), pois.end()) / *std::min_element(pois.begin(), pois.end()) - 1.0;
  return w;
}

}  // namespace ricci
