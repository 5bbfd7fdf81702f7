#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

#include "ricci_bound/bounds.hpp"
#include "ricci_bound/chain.hpp"

namespace ricci {

enum class StationaryMethod { BirthDeathExact, PowerIteration, Cesaro };

const char* to_string(StationaryMethod method);

struct StationaryResult {
  std::vector<double> distribution;
  StationaryMethod method = StationaryMethod::BirthDeathExact;
  /// TV(pi, pi P)
  double residual = 0.0;
  std::size_t iterations = 0;
};

double tv_distance(const std::vector<double>& a, const std::vector<double>& b);

/// pi P for a row vector pi.
std::vector<double> push_forward(const MetricChain& chain, const std::vector<double>& pi);

/// Detailed balance on a tridiagonal kernel (points in index order):
/// pi(n+1)/pi(n) = p(n, n+1)/p(n+1, n), accumulated in log space.
StationaryResult stationary_birth_death(const MetricChain& chain);

/// v <- vP from the uniform vector (or `initial`) until TV(v, vP) <= tol.
StationaryResult stationary_power(const MetricChain& chain, double tol = 1e-14,
                                  std::size_t max_iters = 1000000,
                                  const std::optional<std::vector<double>>& initial = std::nullopt);

/// (1/(n+1)) sum_{i=0}^n delta_start P^i
StationaryResult stationary_cesaro(const MetricChain& chain, std::size_t start, std::size_t n);

/// P(d(x, origin) >= l) under `result`, per level. Distances within 1e-9 of
/// a level count as reaching it.
TailCurve empirical_tail(const StationaryResult& result, const MetricChain& chain,
                         std::size_t origin, const std::vector<double>& levels);

/// Mass on the last `count` states (by index); runs on a truncated chain are
/// trusted only when this is below 1e-10.
double truncation_mass(const StationaryResult& result, std::size_t count = 10);

void write_stationary_csv(std::ostream& out, const StationaryResult& result,
                          const MetricChain& chain);

}  // namespace ricci
