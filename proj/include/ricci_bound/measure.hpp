#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ricci {

/// Finitely supported probability measure over the points of a chain.
/// `support[i]` is a point index, `weights[i]` its mass.
struct DiscreteMeasure {
  std::vector<std::size_t> support;
  std::vector<double> weights;

  static DiscreteMeasure dirac(std::size_t point);

  /// Builds a measure from a dense probability vector, dropping zero entries.
  static DiscreteMeasure from_dense(std::span<const double> masses);

  std::size_t size() const noexcept { return support.size(); }

  /// Throws DomainError unless weights are nonnegative and sum to 1 within
  /// `tolerance`, and support/weights have matching lengths.
  void validate(double tolerance = 1e-12) const;

  /// Mean of the line embedding `coords` (indexed by point) under this measure.
  double mean(std::span<const double> coords) const;
};

}  // namespace ricci
