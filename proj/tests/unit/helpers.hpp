#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "ricci_bound/chain.hpp"
#include "ricci_bound/curvature.hpp"

namespace ricci::testing {

inline MetricChain mmk(int n0, int k) { return build_mmk_chain(n0, k, default_mmk_truncation(n0, k)); }

// Points on the line, identity kernel unless one is given.
inline MetricChain line_points(const std::vector<double>& coords, const Matrix* kernel = nullptr) {
  MetricChain chain;
  const std::size_t n = coords.size();
  chain.dist = Matrix(n, n);
  chain.kernel = kernel ? *kernel : Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    chain.points.push_back(std::to_string(coords[i]));
    if (!kernel) chain.kernel(i, i) = 1.0;
    for (std::size_t j = 0; j < n; ++j) chain.dist(i, j) = std::abs(coords[i] - coords[j]);
  }
  chain.coords = coords;
  return chain;
}

// Profile with a prescribed envelope and constants; no chain behind it.
inline CurvatureProfile synthetic_profile(double eps, double rho, double j0, double s2, Envelope env) {
  CurvatureProfile p;
  p.epsilon = eps;
  p.rho = rho;
  p.j0 = j0;
  p.s2 = s2;
  p.envelope = std::move(env);
  return p;
}

// Composite trapezoid rule with n intervals.
inline double trapezoid(const std::function<double(double)>& f, double a, double b, std::size_t n) {
  const double h = (b - a) / static_cast<double>(n);
  double s = 0.5 * (f(a) + f(b));
  for (std::size_t i = 1; i < n; ++i) s += f(a + h * static_cast<double>(i));
  return s * h;
}

}  // namespace ricci::testing
