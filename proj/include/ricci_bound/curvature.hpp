#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "ricci_bound/chain.hpp"

namespace ricci {

enum class TransportMethod {
  Automatic,  ///< CDF formula on line-embedded chains, min-cost flow otherwise
  Flow,
  Line,
};

/// Right-continuous, piecewise-constant function r -> K(r) on [0, inf):
/// K(r) = values[i] for breakpoints[i] <= r < breakpoints[i+1], and the last
/// value continues to infinity. breakpoints[0] is 0.
class Envelope {
 public:
  Envelope() : Envelope({0.0}, {0.0}) {}
  Envelope(std::vector<double> breakpoints, std::vector<double> values);

  static Envelope constant(double value) { return Envelope({0.0}, {value}); }

  double operator()(double r) const;

  /// Exact integral of K over [a, b] (a <= b, both >= 0).
  double integral(double a, double b) const;

  /// Exact iterated integral of K over a <= v <= u <= b.
  double iterated_integral(double a, double b) const;

  /// Smallest r with K = 0 on [r, inf); +inf when the tail value is positive.
  double support_end() const;

  bool is_nonincreasing() const;

  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::size_t segment(double r) const;

  std::vector<double> breakpoints_;
  std::vector<double> values_;
};

/// kappa(x, y) = 1 - W1(P_x, P_y) / d(x, y).
double kappa_pair(const MetricChain& chain, std::size_t x, std::size_t y,
                  TransportMethod method = TransportMethod::Flow);

struct LocalCurvature {
  /// K_eps(x); +inf for points with no other point within epsilon.
  std::vector<double> values;
  std::vector<std::size_t> isolated;
};

/// K_eps(x) = inf over 0 < d(x, y) <= epsilon of kappa(x, y). Pairs are
/// evaluated once each, in parallel.
LocalCurvature local_curvature(const MetricChain& chain, double epsilon,
                               TransportMethod method = TransportMethod::Automatic);

/// Largest nonincreasing, nonnegative K with K(d(x, origin)) <= K_eps(x) for
/// every point: K(r) = max(0, min over d(x, origin) <= r of K_eps(x)),
/// stepping at the distinct realized distances. Isolated points impose no
/// constraint; a segment left unconstrained is capped at 1 (kappa <= 1).
Envelope curvature_envelope(const MetricChain& chain, std::size_t origin,
                            const LocalCurvature& local);
Envelope curvature_envelope(const MetricChain& chain, double epsilon, std::size_t origin,
                            TransportMethod method = TransportMethod::Automatic);

/// rho = inf over epsilon <= d(x, origin) <= 2 epsilon of
/// d(x, origin) - W1(P_x, delta_origin). The closed inner edge makes the
/// lattice infimum agree with the continuum one.
double attraction_rho(const MetricChain& chain, double epsilon, std::size_t origin);

/// J(origin) = W1(P_origin, delta_origin).
double drift_j0(const MetricChain& chain, std::size_t origin);

enum class SubGaussianMethod { HoeffdingSupport, GaussianVariance, UserSupplied };

/// Sub-Gaussian constant s^2 shared by every kernel row.
double subgaussian_s2(const MetricChain& chain, SubGaussianMethod method, double user_value = 0.0);

struct CurvatureProfile {
  double epsilon = 0.0;
  std::size_t origin = 0;
  std::vector<double> kappa_local;
  std::vector<std::size_t> isolated;
  Envelope envelope;
  double rho = 0.0;
  double j0 = 0.0;
  double s2 = 1.0;
  /// Smallest finite K_eps; negative means the envelope was clamped at 0.
  double min_local = std::numeric_limits<double>::infinity();
  std::vector<std::string> notes;
};

struct ProfileOptions {
  SubGaussianMethod s2_method = SubGaussianMethod::HoeffdingSupport;
  double user_s2 = 0.0;
  TransportMethod transport = TransportMethod::Automatic;
};

CurvatureProfile compute_profile(const MetricChain& chain, double epsilon, std::size_t origin,
                                 const ProfileOptions& options = {});

nlohmann::json profile_to_json(const CurvatureProfile& profile);

}  // namespace ricci
