#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ricci_bound/matrix.hpp"
#include "ricci_bound/measure.hpp"

namespace ricci {

/// A finite metric space carrying a row-stochastic transition kernel.
///
/// `coords` is set when the points sit on the real line with
/// d(i, j) = |coords[i] - coords[j]|; transport can then use the CDF formula.
/// `kernel_variance` is set by builders whose rows are (discretized) Gaussians.
struct MetricChain {
  std::vector<std::string> points;
  Matrix dist;
  Matrix kernel;
  std::optional<std::size_t> origin_hint;
  std::optional<std::vector<double>> coords;
  std::optional<double> kernel_variance;

  std::size_t size() const noexcept { return points.size(); }

  /// Row `x` of the kernel as a measure (zero entries dropped).
  DiscreteMeasure row(std::size_t x) const;

  /// Checks shape, finiteness, symmetry, zero diagonal, positive off-diagonal
  /// distances and row stochasticity. With `check_triangle` also verifies the
  /// triangle inequality exhaustively (O(n^3)).
  void validate(bool check_triangle = true) const;
};

/// Discrete-time M/M/k queue on {0, ..., truncation}: up-rate n0/(n0+k),
/// stay (k-n)_+/(n0+k), down min(n,k)/(n0+k). The last state folds its
/// right-jump mass into a self-loop.
MetricChain build_mmk_chain(int n0, int k, int truncation);

/// Smallest truncation for which the stationary mass of the last ten states
/// of the M/M/k chain is far below 1e-10.
int default_mmk_truncation(int n0, int k);

/// Discretized Ornstein-Uhlenbeck chain P_x = N((1-alpha)x, 1) on the grid
/// {-W, -W+h, ..., W}. Each grid point gets the Gaussian mass of its Voronoi
/// cell; the two outermost cells absorb the tails.
MetricChain build_discrete_ou_chain(double alpha, double grid_half_width, double grid_step);

/// Reflected walk on {0, ..., truncation}: up with probability p, down with
/// 1-p, staying put at 0 instead of stepping below; the top state self-loops
/// its up-mass. Its coarse curvature vanishes away from 0.
MetricChain build_reflected_walk(double p, int truncation);

/// Parses and validates a chain-spec JSON document.
MetricChain parse_chain(const nlohmann::json& doc);
MetricChain load_chain(const std::filesystem::path& path);
nlohmann::json chain_to_json(const MetricChain& chain);

struct GeodesicReport {
  double epsilon = 0.0;
  bool is_geodesic = false;
  std::optional<std::pair<std::size_t, std::size_t>> witness_failure;
};

/// The space is epsilon-geodesic iff shortest paths through steps of length
/// <= epsilon reproduce every distance (within 1e-9).
GeodesicReport check_epsilon_geodesic(const MetricChain& chain, double epsilon);

}  // namespace ricci
