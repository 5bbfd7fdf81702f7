#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ricci_bound/chain.hpp"
#include "ricci_bound/matrix.hpp"
#include "ricci_bound/measure.hpp"

namespace ricci {

/// W1 on the real line: the integral of |F_mu - F_nu|, summed exactly over
/// the sorted breakpoints. `coords` is indexed by point.
double w1_line(const DiscreteMeasure& mu, const DiscreteMeasure& nu, std::span<const double> coords);

/// Optimal transport between two finite measures with a Kantorovich
/// certificate.
struct TransportSolution {
  /// Primal cost of the optimal coupling.
  double value = 0.0;
  /// Optimal coupling, plan(i, j) = mass moved from mu atom i to nu atom j.
  Matrix plan;
  /// Transportation duals: phi_i + psi_j <= cost(i, j), with equality
  /// wherever plan(i, j) > 0.
  std::vector<double> phi;
  std::vector<double> psi;
  /// 1-Lipschitz potential f evaluated on `potential_points`, built as
  /// f(x) = min_j (d(x, y_j) - psi_j).
  std::vector<std::size_t> potential_points;
  std::vector<double> potential;
  /// E_mu[f] - E_nu[f]; equals `value` up to rounding at optimality.
  double dual_value = 0.0;
  /// Largest violation of |f(x) - f(y)| <= d(x, y) over potential_points.
  double lipschitz_excess = 0.0;

  double duality_gap() const noexcept { return value - dual_value; }
};

/// Exact transportation problem between weight vectors `supply` and `demand`
/// under `cost` (supply.size() x demand.size()). Solved by successive
/// shortest augmenting paths; duals are read off the node potentials kept
/// for the reduced costs. Fills value, plan, phi and psi.
TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  const Matrix& cost);

/// Certified W1 over the chain metric. Supports index the chain's points.
TransportSolution w1_flow_certified(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                    const MetricChain& chain);

double w1_flow(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const MetricChain& chain);

/// Certified W1 for measures embedded on the line (distance |c_i - c_j|),
/// without a chain object.
TransportSolution w1_flow_certified(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                    std::span<const double> coords);

/// True iff nu dominates mu stochastically: F_nu(t) <= F_mu(t) at every
/// breakpoint (within 1e-12).
bool stochastic_dominance_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                std::span<const double> coords);

}  // namespace ricci
